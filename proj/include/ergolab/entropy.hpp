#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ergolab/circle_map.hpp"
#include "ergolab/common.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/measures.hpp"

namespace ergolab {

/// Ordered breakpoints on the circle; atoms are the arcs between consecutive
/// breakpoints, with the last atom wrapping through 1 == 0. A point exactly on
/// a breakpoint belongs to the atom starting there (its right atom).
struct Partition {
  std::vector<double> breakpoints;  // strictly increasing, in [0,1)
  std::size_t atom_count() const { return breakpoints.size(); }
};

inline void validate(const Partition& p) {
  if (p.breakpoints.size() < 2) throw BadParams("partition: need >= 2 breakpoints");
  for (std::size_t i = 0; i < p.breakpoints.size(); ++i) {
    double b = p.breakpoints[i];
    if (!(b >= 0.0 && b < 1.0)) throw DomainError("partition: breakpoint outside [0,1)");
    if (i > 0 && !(b > p.breakpoints[i - 1]))
      throw BadParams("partition: breakpoints not strictly increasing");
  }
}

inline Partition partition_from_breakpoints(std::vector<double> breakpoints) {
  std::sort(breakpoints.begin(), breakpoints.end());
  Partition p{std::move(breakpoints)};
  validate(p);
  return p;
}

/// Uniform partition with breakpoints {offset + i/k}; diameter 1/k.
inline Partition make_partition(std::size_t k, double offset) {
  if (k < 2) throw BadParams("make_partition: k < 2");
  if (!(offset >= 0.0 && offset < 1.0 / static_cast<double>(k)))
    throw BadParams("make_partition: offset outside [0, 1/k)");
  std::vector<double> b(k);
  for (std::size_t i = 0; i < k; ++i)
    b[i] = offset + static_cast<double>(i) / static_cast<double>(k);
  return partition_from_breakpoints(std::move(b));
}

/// The partition into the map's d monotone full branches. Cylinders of its
/// refinements contract at rate 1/min_derivative per level, so the depth-q
/// entropy ratio H(P^q)/q carries no structural offset for linear maps.
inline Partition branch_partition(const CircleMap& map) {
  return partition_from_breakpoints(branch_points(map));
}

inline double diameter(const Partition& p) {
  double longest = 0.0;
  for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i)
    longest = std::max(longest, p.breakpoints[i + 1] - p.breakpoints[i]);
  longest = std::max(longest, 1.0 - p.breakpoints.back() + p.breakpoints.front());
  return longest;
}

/// Conservative diameter bound standing in for the (never computed)
/// expansivity constant: fine enough that cylinder diameters provably shrink
/// geometrically. For degree-d linear maps any diameter below 1/(d+1) works.
inline double max_admissible_diameter(const CircleMap& map) {
  double m = map.min_derivative();
  return std::min(1.0 / 8.0, (m - 1.0) / (2.0 * m));
}

/// Atom index containing x (boundary points go right).
inline std::size_t atom_index(const Partition& p, double x) {
  const auto& b = p.breakpoints;
  auto it = std::upper_bound(b.begin(), b.end(), x);
  if (it == b.begin()) return b.size() - 1;  // wraps into the last atom
  return static_cast<std::size_t>(it - b.begin()) - 1;
}

/// P^q: the join of f^-j(P) for j = 0..q-1, stored as the sorted cut set plus
/// the length-q symbol word of each cylinder arc.
struct RefinedPartition {
  Partition base;
  std::size_t depth = 1;
  std::vector<double> cuts;                      // sorted, in [0,1)
  std::vector<std::vector<std::uint32_t>> words; // words[i] = itinerary of arc i
  std::size_t cylinder_count() const { return cuts.size(); }
};

namespace detail {

inline std::vector<double> dedupe_circular(std::vector<double> cuts, double tol) {
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  out.reserve(cuts.size());
  for (double c : cuts) {
    if (out.empty() || c - out.back() > tol) out.push_back(c);
  }
  while (out.size() > 1 && circle_distance(out.back(), out.front()) <= tol)
    out.pop_back();
  return out;
}

/// Cut sets of P^1..P^q, each sorted and deduplicated.
inline std::vector<std::vector<double>> refinement_cuts(const CircleMap& map,
                                                        const Partition& base,
                                                        std::size_t q) {
  constexpr double kTol = 1e-12;
  std::vector<std::vector<double>> levels;
  std::vector<double> cuts = base.breakpoints;
  std::vector<double> frontier = base.breakpoints;  // f^-(j)(breakpoints)
  levels.push_back(dedupe_circular(cuts, kTol));
  for (std::size_t j = 1; j < q; ++j) {
    std::vector<double> next;
    next.reserve(frontier.size() * static_cast<std::size_t>(map.degree()));
    for (double p : frontier) {
      BranchPreimages pre = inverse_branches(map, p);
      next.insert(next.end(), pre.points.begin(), pre.points.end());
    }
    frontier = std::move(next);
    cuts.insert(cuts.end(), frontier.begin(), frontier.end());
    levels.push_back(dedupe_circular(cuts, kTol));
  }
  return levels;
}

}  // namespace detail

inline RefinedPartition refine(const CircleMap& map, const Partition& base,
                               std::size_t q) {
  if (q < 1) throw BadParams("refine: q must be >= 1");
  validate(base);
  RefinedPartition rp;
  rp.base = base;
  rp.depth = q;
  rp.cuts = detail::refinement_cuts(map, base, q).back();
  rp.words.reserve(rp.cuts.size());
  const std::size_t n = rp.cuts.size();
  for (std::size_t i = 0; i < n; ++i) {
    double a = rp.cuts[i];
    double b = i + 1 < n ? rp.cuts[i + 1] : rp.cuts[0] + 1.0;
    double mid = wrap01(0.5 * (a + b));
    std::vector<std::uint32_t> word(q);
    double x = mid;
    for (std::size_t j = 0; j < q; ++j) {
      word[j] = static_cast<std::uint32_t>(atom_index(base, x));
      x = map.eval(x);
    }
    rp.words.push_back(std::move(word));
  }
  return rp;
}

namespace detail {

/// Masses of the arcs delimited by sorted cuts, for weighted points.
inline std::vector<double> arc_masses(const std::vector<double>& cuts,
                                      const EmpiricalMeasure& mu) {
  std::vector<std::size_t> order(mu.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mu.points[a] < mu.points[b];
  });
  std::vector<double> sorted_pts(order.size());
  std::vector<double> prefix(order.size() + 1, 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted_pts[i] = mu.points[order[i]];
    prefix[i + 1] = prefix[i] + mu.weights[order[i]];
  }
  const double total = prefix.back();
  auto weight_below = [&](double x) {
    auto it = std::lower_bound(sorted_pts.begin(), sorted_pts.end(), x);
    return prefix[static_cast<std::size_t>(it - sorted_pts.begin())];
  };
  std::vector<double> masses(cuts.size(), 0.0);
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (i + 1 < cuts.size()) {
      masses[i] = weight_below(cuts[i + 1]) - weight_below(cuts[i]);
    } else {
      masses[i] = total - weight_below(cuts[i]) + weight_below(cuts[0]);
    }
    if (masses[i] < 0.0) masses[i] = 0.0;
  }
  return masses;
}

/// Masses of the arcs for a piecewise-uniform grid density.
inline std::vector<double> arc_masses(const std::vector<double>& cuts,
                                      const GridMeasure& mu) {
  std::vector<double> prefix(mu.k + 1, 0.0);
  for (std::size_t i = 0; i < mu.k; ++i) prefix[i + 1] = prefix[i] + mu.mass[i];
  auto cdf = [&](double x) {
    if (x >= 1.0) return prefix[mu.k];
    double t = x * static_cast<double>(mu.k);
    auto j = static_cast<std::size_t>(t);
    if (j >= mu.k) j = mu.k - 1;
    double frac = t - static_cast<double>(j);
    return prefix[j] + frac * mu.mass[j];
  };
  std::vector<double> masses(cuts.size(), 0.0);
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (i + 1 < cuts.size()) {
      masses[i] = cdf(cuts[i + 1]) - cdf(cuts[i]);
    } else {
      masses[i] = prefix[mu.k] - cdf(cuts[i]) + cdf(cuts[0]);
    }
    if (masses[i] < 0.0) masses[i] = 0.0;
  }
  return masses;
}

inline double shannon(const std::vector<double>& masses) {
  double h = 0.0;
  for (double m : masses) h -= xlogx(m);
  return h < 0.0 ? 0.0 : h;
}

}  // namespace detail

/// H(P, mu) = -sum mu(X_i) log mu(X_i); 0 <= H <= log(#atoms).
template <class Measure>
double partition_entropy(const Partition& p, const Measure& mu) {
  validate(mu);
  return detail::shannon(detail::arc_masses(p.breakpoints, mu));
}

template <class Measure>
double partition_entropy(const RefinedPartition& p, const Measure& mu) {
  validate(mu);
  return detail::shannon(detail::arc_masses(p.cuts, mu));
}

/// Whether an input measure is a Monte-Carlo sample (finite-n orbit average,
/// subject to plug-in bias) or exact (closed-form atoms, grid densities).
enum class MeasureKind { monte_carlo, exact };

struct EntropyEstimate {
  double entropy_est = 0.0;      // H(P^q_max) / q_max
  std::size_t q_used = 0;
  std::vector<double> per_q;     // H(P^q)/q for q = 1..q_max
  std::size_t cylinders = 0;     // cylinder count at q_max
};

namespace detail {

template <class Measure>
EntropyEstimate entropy_estimate_impl(const CircleMap& map, const Measure& mu,
                                      const Partition& base, std::size_t q_max,
                                      std::size_t sample_size) {
  if (q_max < 1) throw BadParams("entropy_estimate: q_max must be >= 1");
  validate(base);
  validate(mu);
  auto levels = refinement_cuts(map, base, q_max);
  EntropyEstimate est;
  est.q_used = q_max;
  est.cylinders = levels.back().size();
  if (sample_size > 0 && sample_size < 100 * est.cylinders)
    throw UnderSampled("entropy_estimate: fewer than 100 points per cylinder");
  est.per_q.reserve(q_max);
  for (std::size_t q = 1; q <= q_max; ++q) {
    double h = shannon(arc_masses(levels[q - 1], mu));
    est.per_q.push_back(h / static_cast<double>(q));
  }
  est.entropy_est = est.per_q.back();
  return est;
}

}  // namespace detail

/// Depth-q_max entropy ratio with the whole H(P^q)/q sequence kept as
/// diagnostics; no limit fitting, so any residual bias stays visible.
/// Monte-Carlo inputs are rejected when the deepest refinement would average
/// fewer than 100 points per cylinder.
inline EntropyEstimate entropy_estimate(const CircleMap& map,
                                        const EmpiricalMeasure& mu,
                                        const Partition& base, std::size_t q_max,
                                        MeasureKind kind = MeasureKind::monte_carlo) {
  std::size_t n = kind == MeasureKind::monte_carlo ? mu.size() : 0;
  return detail::entropy_estimate_impl(map, mu, base, q_max, n);
}

inline EntropyEstimate entropy_estimate(const CircleMap& map, const GridMeasure& mu,
                                        const Partition& base, std::size_t q_max) {
  return detail::entropy_estimate_impl(map, mu, base, q_max, 0);
}

/// Largest refinement depth an n-point sample supports on a degree-d branch
/// partition without tripping the 100-points-per-cylinder guard.
inline std::size_t auto_q_max(int degree, std::size_t n_points) {
  double budget = static_cast<double>(n_points) / 100.0;
  std::size_t q = 1;
  double cells = static_cast<double>(degree);
  while (cells * static_cast<double>(degree) <= budget && q < 14) {
    cells *= static_cast<double>(degree);
    ++q;
  }
  return std::max<std::size_t>(q, 2);
}

/// Largest depth a k-cell grid density resolves (>= 4 cells per cylinder).
inline std::size_t auto_q_max_grid(int degree, std::size_t grid_k) {
  double budget = static_cast<double>(grid_k) / 4.0;
  std::size_t q = 1;
  double cells = static_cast<double>(degree);
  while (cells * static_cast<double>(degree) <= budget && q < 14) {
    cells *= static_cast<double>(degree);
    ++q;
  }
  return std::max<std::size_t>(q, 2);
}

/// Per-measure record of the entropy/Lyapunov comparison.
struct PesinReport {
  double lyapunov = 0.0;     // int log|f'| dmu
  double entropy_est = 0.0;
  double residual = 0.0;     // lyapunov - entropy_est
  std::size_t q_used = 0;
  std::vector<double> diagnostics;  // H(P^q)/q sequence
  bool pesin_holds = false;
  double tolerance = 0.05;
};

template <class Measure>
PesinReport pesin_residual(const CircleMap& map, const Measure& mu,
                           const EntropyEstimate& est, double tolerance = 0.05) {
  PesinReport rep;
  rep.lyapunov = integrate(mu, [&](double x) { return std::log(map.derivative(x)); });
  rep.entropy_est = est.entropy_est;
  rep.residual = rep.lyapunov - rep.entropy_est;
  rep.q_used = est.q_used;
  rep.diagnostics = est.per_q;
  rep.tolerance = tolerance;
  rep.pesin_holds = std::fabs(rep.residual) < tolerance;
  return rep;
}

}  // namespace ergolab
