#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "ergolab/circle_map.hpp"
#include "ergolab/common.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

namespace detail {

/// Single-linkage clustering under the weak* metric: indices i, j join the
/// same cluster whenever dist(sig_i, sig_j) < eps. Clusters come back sorted
/// by size (ties by smallest member) so reports are reproducible.
inline std::vector<std::vector<std::size_t>> single_linkage(
    const TestFamily& family, const std::vector<std::vector<double>>& sigs,
    double eps) {
  const std::size_t n = sigs.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::size_t> root_of(n);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (family.distance(sigs[i], sigs[j]) < eps) parent[find(i)] = find(j);
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) {
                     if (a.size() != b.size()) return a.size() > b.size();
                     return a.front() < b.front();
                   });
  return clusters;
}

inline GridMeasure mean_grid(const std::vector<GridMeasure>& all,
                             const std::vector<std::size_t>& members) {
  const std::size_t k = all[members.front()].k;
  std::vector<double> mass(k, 0.0);
  for (std::size_t idx : members)
    for (std::size_t c = 0; c < k; ++c) mass[c] += all[idx].mass[c];
  double total = 0.0;
  for (double m : mass) total += m;
  for (double& m : mass) m /= total;
  return GridMeasure{k, std::move(mass)};
}

/// Low-discrepancy Lebesgue sample: golden-ratio sequence jittered by seeded
/// uniform noise within one stride.
inline double golden_anchor(std::size_t i, std::size_t count, std::uint64_t seed) {
  constexpr double kGoldenFrac = 0.6180339887498949;
  auto rng = make_rng(seed, mix64(i) ^ 0x414e43484f52ULL);
  double g = wrap01(0.5 + static_cast<double>(i) * kGoldenFrac);
  double jitter = (uniform01(rng) - 0.5) / static_cast<double>(count);
  return wrap01(g + jitter);
}

}  // namespace detail

/// Snapshots of sigma_n along geometric checkpoints, clustered to approximate
/// the p-limit set of one initial state.
struct PLimitEstimate {
  double x0 = 0.0;  // explicit point or seeded anchor
  std::vector<std::size_t> checkpoints;
  std::vector<GridMeasure> snapshots;
  struct Cluster {
    GridMeasure representative;
    std::vector<std::size_t> members;
  };
  std::vector<Cluster> clusters;
  double dispersion = 0.0;  // max pairwise distance among late snapshots
};

inline PLimitEstimate p_limit_set(const CircleMap& map, const InitialCondition& ic,
                                  std::size_t n_max, std::size_t checkpoint_count,
                                  std::size_t grid_k, double epsilon_cluster = 0.05) {
  if (n_max < 10000) throw BadParams("p_limit_set: n_max must be >= 1e4");
  if (checkpoint_count < 1 || grid_k < 2) throw BadParams("p_limit_set: bad params");
  std::vector<std::size_t> checkpoints;
  for (std::size_t j = checkpoint_count; j-- > 0;) {
    std::size_t n = n_max >> j;
    if (n >= 1 && (checkpoints.empty() || n > checkpoints.back()))
      checkpoints.push_back(n);
  }

  PLimitEstimate out;
  out.checkpoints = checkpoints;
  OrbitStream os(map, ic);
  out.x0 = ic.kind == InitialCondition::Kind::point ? ic.x0 : os.anchor();
  std::vector<double> counts(grid_k, 0.0);
  std::size_t step = 0;
  for (std::size_t n : checkpoints) {
    while (step < n) {
      counts[grid_cell(os.next(), grid_k)] += 1.0;
      ++step;
    }
    std::vector<double> mass(counts);
    for (double& m : mass) m /= static_cast<double>(n);
    out.snapshots.push_back(make_grid(grid_k, std::move(mass)));
  }

  TestFamily family(map);
  std::vector<std::vector<double>> sigs;
  sigs.reserve(out.snapshots.size());
  for (const auto& s : out.snapshots) sigs.push_back(family.signature(s));
  for (const auto& members : detail::single_linkage(family, sigs, epsilon_cluster))
    out.clusters.push_back({detail::mean_grid(out.snapshots, members), members});

  std::size_t late = out.snapshots.size() - out.snapshots.size() / 2;
  double disp = 0.0;
  for (std::size_t i = late; i < sigs.size(); ++i)
    for (std::size_t j = i + 1; j < sigs.size(); ++j)
      disp = std::max(disp, family.distance(sigs[i], sigs[j]));
  out.dispersion = disp;
  return out;
}

inline PLimitEstimate p_limit_set(const CircleMap& map, double x0, std::size_t n_max,
                                  std::size_t checkpoint_count, std::size_t grid_k,
                                  double epsilon_cluster = 0.05) {
  return p_limit_set(map, InitialCondition::point(x0), n_max, checkpoint_count,
                     grid_k, epsilon_cluster);
}

struct SrbCandidate {
  GridMeasure measure;
  double basin_weight = 0.0;  // member fraction of the whole sample
  std::size_t members = 0;
  PesinReport pesin;
  bool atomic_profile = false;  // > 0.9 of mass inside <= 3 grid cells
  bool srb_like = false;        // |residual| below the flag threshold
};

struct SrbLikeReport {
  std::vector<SrbCandidate> candidates;
  std::size_t sample_count = 0;
  std::size_t n = 0;
  std::size_t grid_k = 0;
  double epsilon_cluster = 0.0;
  std::uint64_t seed = 0;
  std::size_t non_convergent = 0;  // samples whose checkpoint dispersion > eps
  double flag_threshold = 0.0;
};

inline bool atomic_profile(const GridMeasure& mu) {
  std::vector<double> mass = mu.mass;
  std::size_t top = std::min<std::size_t>(3, mass.size());
  std::partial_sort(mass.begin(), mass.begin() + static_cast<long>(top), mass.end(),
                    std::greater<double>());
  double sum = 0.0;
  for (std::size_t i = 0; i < top; ++i) sum += mass[i];
  return sum > 0.9;
}

/// Scans a Lebesgue sample of initial states, clusters the terminal empirical
/// measures, and attaches an entropy/Lyapunov report to every cluster
/// representative. Samples whose mid-orbit snapshots stay more than
/// epsilon_cluster apart are reported as non-convergent instead of being
/// forced into a cluster.
inline SrbLikeReport srb_like_candidates(const CircleMap& map,
                                         std::size_t sample_count, std::size_t n,
                                         std::size_t grid_k, double epsilon_cluster,
                                         std::uint64_t seed, std::size_t q_max = 0,
                                         double flag_threshold = 0.1,
                                         std::size_t threads = 1) {
  if (sample_count < 100) throw BadParams("srb_like_candidates: sample_count < 100");
  if (n < 1000 || grid_k < 2) throw BadParams("srb_like_candidates: bad params");
  if (q_max == 0) q_max = auto_q_max_grid(map.degree(), grid_k);

  TestFamily family(map);
  std::vector<GridMeasure> terminal(sample_count);
  std::vector<double> dispersion(sample_count, 0.0);

  parallel_for(sample_count, threads, [&](std::size_t i) {
    double anchor = detail::golden_anchor(i, sample_count, seed);
    OrbitStream os(map, InitialCondition::seeded_near(anchor, seed, i));
    std::vector<double> counts(grid_k, 0.0);
    const std::size_t checks[3] = {n / 4, n / 2, n};
    std::vector<std::vector<double>> sigs;
    std::size_t step = 0;
    for (std::size_t c : checks) {
      while (step < c) {
        counts[grid_cell(os.next(), grid_k)] += 1.0;
        ++step;
      }
      std::vector<double> mass(counts);
      for (double& m : mass) m /= static_cast<double>(c);
      if (c == n) {
        terminal[i] = make_grid(grid_k, std::move(mass));
        sigs.push_back(family.signature(terminal[i]));
      } else {
        sigs.push_back(family.signature(GridMeasure{grid_k, std::move(mass)}));
      }
    }
    double disp = 0.0;
    for (std::size_t a = 0; a < sigs.size(); ++a)
      for (std::size_t b = a + 1; b < sigs.size(); ++b)
        disp = std::max(disp, family.distance(sigs[a], sigs[b]));
    dispersion[i] = disp;
  });

  SrbLikeReport report;
  report.sample_count = sample_count;
  report.n = n;
  report.grid_k = grid_k;
  report.epsilon_cluster = epsilon_cluster;
  report.seed = seed;
  report.flag_threshold = flag_threshold;

  std::vector<std::size_t> convergent;
  for (std::size_t i = 0; i < sample_count; ++i) {
    if (dispersion[i] <= epsilon_cluster) {
      convergent.push_back(i);
    } else {
      ++report.non_convergent;
    }
  }

  std::vector<std::vector<double>> sigs;
  sigs.reserve(convergent.size());
  for (std::size_t i : convergent) sigs.push_back(family.signature(terminal[i]));
  Partition base = branch_partition(map);
  for (const auto& local : detail::single_linkage(family, sigs, epsilon_cluster)) {
    std::vector<std::size_t> members;
    members.reserve(local.size());
    for (std::size_t idx : local) members.push_back(convergent[idx]);
    SrbCandidate cand;
    cand.measure = detail::mean_grid(terminal, members);
    cand.members = members.size();
    cand.basin_weight =
        static_cast<double>(members.size()) / static_cast<double>(sample_count);
    EntropyEstimate est = entropy_estimate(map, cand.measure, base, q_max);
    cand.pesin = pesin_residual(map, cand.measure, est);
    cand.atomic_profile = atomic_profile(cand.measure);
    cand.srb_like = std::fabs(cand.pesin.residual) < flag_threshold;
    report.candidates.push_back(std::move(cand));
  }
  return report;
}

/// Point estimate of the Lebesgue measure of the epsilon-weak basin: the
/// fraction of sampled initial states whose terminal sigma_n lands within
/// epsilon of mu.
inline double basin_fraction(const CircleMap& map, const GridMeasure& mu,
                             double epsilon, std::size_t sample_count,
                             std::size_t n, std::uint64_t seed,
                             std::size_t threads = 1) {
  if (!(epsilon > 0.0)) throw BadParams("basin_fraction: epsilon must be > 0");
  if (sample_count < 1 || n < 1) throw BadParams("basin_fraction: bad params");
  TestFamily family(map);
  std::vector<double> ref = family.signature(mu);
  std::vector<std::uint8_t> hit(sample_count, 0);
  parallel_for(sample_count, threads, [&](std::size_t i) {
    double anchor = detail::golden_anchor(i, sample_count, seed);
    OrbitStream os(map, InitialCondition::seeded_near(anchor, seed, i));
    SignatureAccumulator acc(family);
    for (std::size_t t = 0; t < n; ++t) acc.add(os.next());
    hit[i] = family.distance(acc.signature(), ref) < epsilon ? 1 : 0;
  });
  std::size_t count = 0;
  for (auto h : hit) count += h;
  return static_cast<double>(count) / static_cast<double>(sample_count);
}

struct DecayPoint {
  std::size_t n = 0;
  double fraction = 0.0;  // share of samples with dist(sigma_n, reference) >= eps
  double bound = 0.0;     // e^{n (eps - r)}
};

/// Measures how fast sigma_n concentrates near a reference equilibrium
/// candidate. The reference stands in for the set K_r: the distance to one
/// member upper-bounds the distance to the set, so the observed fractions test
/// a sufficient proxy for the exponential-decay bound e^{n(eps-r)}.
inline std::vector<DecayPoint> deviation_decay(const CircleMap& map,
                                               const GridMeasure& reference,
                                               double r, double epsilon,
                                               std::vector<std::size_t> n_list,
                                               std::size_t sample_count,
                                               std::uint64_t seed,
                                               std::size_t threads = 1) {
  if (!(r > 0.0)) throw BadParams("deviation_decay: r must be > 0");
  if (!(epsilon > 0.0 && epsilon < r / 2.0))
    throw BadParams("deviation_decay: need 0 < epsilon < r/2");
  if (n_list.empty()) throw BadParams("deviation_decay: empty n_list");
  if (sample_count < 1) throw BadParams("deviation_decay: sample_count < 1");
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  if (n_list.front() < 1) throw BadParams("deviation_decay: n must be >= 1");

  TestFamily family(map);
  std::vector<double> ref = family.signature(reference);
  std::vector<std::vector<std::uint8_t>> deviates(
      sample_count, std::vector<std::uint8_t>(n_list.size(), 0));

  parallel_for(sample_count, threads, [&](std::size_t i) {
    double anchor = detail::golden_anchor(i, sample_count, seed);
    OrbitStream os(map, InitialCondition::seeded_near(anchor, seed, i));
    SignatureAccumulator acc(family);
    std::size_t step = 0;
    for (std::size_t c = 0; c < n_list.size(); ++c) {
      while (step < n_list[c]) {
        acc.add(os.next());
        ++step;
      }
      deviates[i][c] = family.distance(acc.signature(), ref) >= epsilon ? 1 : 0;
    }
  });

  std::vector<DecayPoint> out(n_list.size());
  for (std::size_t c = 0; c < n_list.size(); ++c) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < sample_count; ++i) count += deviates[i][c];
    out[c].n = n_list[c];
    out[c].fraction = static_cast<double>(count) / static_cast<double>(sample_count);
    out[c].bound = std::exp(static_cast<double>(n_list[c]) * (epsilon - r));
  }
  return out;
}

}  // namespace ergolab
