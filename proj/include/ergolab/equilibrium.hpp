#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ergolab/circle_map.hpp"
#include "ergolab/common.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/parallel.hpp"

namespace ergolab {

/// Row-stochastic k x k discretization of the push-forward operator.
/// entries(i, j) = fraction of cell i whose image lands in cell j. Rows of an
/// expanding-map discretization have at most ceil(max f') + 2 nonzeros (the
/// image of a cell is one short arc), so rows are stored sparse at every k.
struct UlamMatrix {
  std::size_t k = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
  std::vector<double> stationary;  // filled by stationary_measure

  double entry(std::size_t i, std::size_t j) const {
    for (const auto& [col, p] : rows[i])
      if (col == j) return p;
    return 0.0;
  }
  bool solved() const { return !stationary.empty(); }
};

inline void validate(const UlamMatrix& m) {
  if (m.k < 2 || m.rows.size() != m.k) throw BadParams("ulam matrix: bad shape");
  for (const auto& row : m.rows) {
    double sum = 0.0;
    for (const auto& [col, p] : row) {
      if (col >= m.k || !(p >= 0.0)) throw BadParams("ulam matrix: bad entry");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-10)
      throw BadParams("ulam matrix: row does not sum to 1");
  }
}

inline UlamMatrix ulam_from_rows(
    std::size_t k, std::vector<std::vector<std::pair<std::uint32_t, double>>> rows) {
  UlamMatrix m{k, std::move(rows), {}};
  validate(m);
  return m;
}

/// Assembles the matrix by stratified sub-interval images: each cell is split
/// into samples_per_cell sub-intervals and the lift chord of each sub-interval
/// is spread over the grid cells it covers. Chords are exact for the linear
/// family and second-order accurate otherwise, and only eval/lift is needed,
/// so the assembler is uniform across families including the quadrature-
/// defined one.
inline UlamMatrix ulam_matrix(const CircleMap& map, std::size_t k,
                              std::size_t samples_per_cell = 256,
                              std::size_t threads = 1) {
  if (k < 2) throw BadParams("ulam_matrix: k must be >= 2");
  if (samples_per_cell < 64) throw BadParams("ulam_matrix: samples_per_cell < 64");
  UlamMatrix m;
  m.k = k;
  m.rows.resize(k);
  const double kk = static_cast<double>(k);
  const double s = static_cast<double>(samples_per_cell);

  parallel_for(k, threads, [&](std::size_t i) {
    std::vector<double> dense(k, 0.0);
    double left = (static_cast<double>(i)) / kk;
    double lift_left = map.lift(left);
    for (std::size_t t = 0; t < samples_per_cell; ++t) {
      double right = (static_cast<double>(i) + (static_cast<double>(t) + 1.0) / s) / kk;
      if (t + 1 == samples_per_cell) right = (static_cast<double>(i) + 1.0) / kk;
      double lift_right = map.lift(std::min(right, 1.0));
      double len = lift_right - lift_left;
      if (len > 0.0) {
        // Spread this sub-interval's share of the row uniformly (in the lift
        // coordinate) across the grid cells its image covers.
        double u = lift_left - std::floor(lift_left);
        double v = u + len;
        double share = 1.0 / s / len;
        double pos = u;
        auto cell = static_cast<long>(std::floor(u * kk));
        while (pos < v) {
          double cell_end = (static_cast<double>(cell) + 1.0) / kk;
          double seg = std::min(v, cell_end) - pos;
          if (seg > 0.0) {
            auto col = static_cast<std::size_t>(cell % static_cast<long>(k));
            dense[col] += share * seg;
          }
          pos = cell_end;
          ++cell;
        }
      }
      lift_left = lift_right;
    }
    double sum = 0.0;
    for (double p : dense) sum += p;
    auto& row = m.rows[i];
    for (std::size_t j = 0; j < k; ++j) {
      if (dense[j] > 0.0) row.emplace_back(static_cast<std::uint32_t>(j), dense[j] / sum);
    }
  });
  validate(m);
  return m;
}

/// Leading eigenvector by power iteration from the uniform vector; stops when
/// the L1 step drops below 1e-12. A detected period-2 oscillation is resolved
/// by averaging two successive iterates. Fills m.stationary and returns it as
/// a GridMeasure.
inline GridMeasure stationary_measure(UlamMatrix& m) {
  validate(m);
  const std::size_t k = m.k;
  std::vector<double> x(k, 1.0 / static_cast<double>(k));
  std::vector<double> prev(k, 0.0), y(k, 0.0);
  constexpr double kStepTol = 1e-12;
  constexpr std::size_t kMaxIters = 100000;

  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      double w = in[i];
      if (w == 0.0) continue;
      for (const auto& [col, p] : m.rows[i]) out[col] += w * p;
    }
  };
  auto l1_diff = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::fabs(a[i] - b[i]);
    return s;
  };
  auto normalize = [&](std::vector<double>& v) {
    double s = 0.0;
    for (double t : v) s += t;
    for (double& t : v) t /= s;
  };

  bool converged = false;
  for (std::size_t it = 0; it < kMaxIters; ++it) {
    apply(x, y);
    double step = l1_diff(y, x);
    if (step < kStepTol) {
      converged = true;
      x = y;
      break;
    }
    if (it > 0 && l1_diff(y, prev) < 1e-13) {
      // period-2 cycle in the chain; the midpoint is the fixed point
      for (std::size_t i = 0; i < k; ++i) x[i] = 0.5 * (x[i] + y[i]);
      normalize(x);
      apply(x, y);
      if (l1_diff(y, x) < kStepTol) {
        converged = true;
        break;
      }
      prev.assign(k, 0.0);
      continue;
    }
    prev = x;
    x = y;
  }
  if (!converged) throw NoConvergence("power iteration exceeded 1e5 iterations");
  normalize(x);
  apply(x, y);
  if (l1_diff(y, x) > 1e-10)
    throw NoConvergence("stationarity residual above 1e-10");
  m.stationary = x;
  return make_grid(k, std::move(x));
}

/// Entropy rate of the stationary chain: h = -sum_i pi_i sum_j P_ij log P_ij.
inline double markov_entropy(const UlamMatrix& m) {
  if (!m.solved()) throw BadParams("markov_entropy: stationary vector not solved");
  double h = 0.0;
  for (std::size_t i = 0; i < m.k; ++i) {
    double row_h = 0.0;
    for (const auto& [col, p] : m.rows[i]) row_h -= xlogx(p);
    h += m.stationary[i] * row_h;
  }
  return h < 0.0 ? 0.0 : h;
}

struct PressureEstimate {
  double markov_entropy = 0.0;  // one-step chain entropy of the Ulam kernel
  double entropy_est = 0.0;     // partition estimator on the stationary density
  double lyapunov = 0.0;        // int log|f'| d pi, midpoint rule on the grid
  double pressure = 0.0;        // entropy_est - lyapunov
  std::size_t k = 0;
  std::size_t q_used = 0;
};

/// Both entropy readings of the discretized operator, side by side. The chain
/// entropy carries a k-independent excess from cell-boundary overlap (a cell
/// image straddles partial cells unless the map aligns with the grid), so the
/// pressure itself is taken from the refinement estimator of the stationary
/// density, which is free of that offset.
inline PressureEstimate pressure_from_stationary(const CircleMap& map,
                                                 const UlamMatrix& m,
                                                 const GridMeasure& pi) {
  PressureEstimate est;
  est.k = m.k;
  est.markov_entropy = markov_entropy(m);
  est.q_used = auto_q_max_grid(map.degree(), m.k);
  est.entropy_est =
      entropy_estimate(map, pi, branch_partition(map), est.q_used).entropy_est;
  est.lyapunov = integrate(pi, [&](double x) { return std::log(map.derivative(x)); });
  est.pressure = est.entropy_est - est.lyapunov;
  return est;
}

inline PressureEstimate pressure_estimate(const CircleMap& map, std::size_t k,
                                          std::size_t samples_per_cell = 256,
                                          std::size_t threads = 1) {
  UlamMatrix m = ulam_matrix(map, k, samples_per_cell, threads);
  GridMeasure pi = stationary_measure(m);
  return pressure_from_stationary(map, m, pi);
}

struct KrResult {
  bool member = false;
  double margin = 0.0;  // entropy_est - int log|f'| dmu + r
};

/// Membership test for K_r = { nu : int psi dnu + h_nu >= -r } with
/// psi = -log|f'|; r = 0 is the equilibrium-state test. The caller supplies
/// the entropy estimate (partition estimator for empirical measures, chain
/// entropy for Ulam stationary vectors).
template <class Measure>
KrResult kr_membership(const CircleMap& map, const Measure& mu, double r,
                       double entropy_est) {
  if (!(r >= 0.0)) throw BadParams("kr_membership: r must be >= 0");
  double lyap = integrate(mu, [&](double x) { return std::log(map.derivative(x)); });
  KrResult out;
  out.margin = entropy_est - lyap + r;
  out.member = out.margin >= -1e-12;  // exact-tie slack of a few ulps
  return out;
}

}  // namespace ergolab
