#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "ergolab/circle_map.hpp"
#include "ergolab/common.hpp"
#include "ergolab/errors.hpp"

namespace ergolab {

constexpr double kMassTolerance = 1e-12;

/// Weighted point masses on [0,1). Points are never deduplicated: an orbit
/// average keeps exact multiplicity.
struct EmpiricalMeasure {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

inline void validate(const EmpiricalMeasure& mu) {
  if (mu.points.empty() || mu.points.size() != mu.weights.size())
    throw BadParams("empirical measure: points/weights mismatch or empty");
  double total = 0.0;
  for (std::size_t i = 0; i < mu.points.size(); ++i) {
    if (!(mu.points[i] >= 0.0 && mu.points[i] < 1.0))
      throw DomainError("empirical measure: point outside [0,1)");
    if (!(mu.weights[i] >= 0.0)) throw BadParams("empirical measure: negative weight");
    total += mu.weights[i];
  }
  if (std::fabs(total - 1.0) > kMassTolerance)
    throw BadParams("empirical measure: weights do not sum to 1");
}

inline EmpiricalMeasure make_empirical(std::vector<double> points,
                                       std::vector<double> weights) {
  EmpiricalMeasure mu{std::move(points), std::move(weights)};
  validate(mu);
  return mu;
}

inline EmpiricalMeasure uniform_empirical(std::vector<double> points) {
  if (points.empty()) throw BadParams("uniform_empirical: no points");
  double w = 1.0 / static_cast<double>(points.size());
  std::vector<double> weights(points.size(), w);
  // Equal weights of 1/n sum to 1 - few ulps for awkward n; pin the last one.
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) total += weights[i];
  weights.back() = 1.0 - total;
  return make_empirical(std::move(points), std::move(weights));
}

inline EmpiricalMeasure dirac(double x) { return make_empirical({x}, {1.0}); }

/// sigma_n(x0): uniform weights 1/n on the n orbit points after burn_in.
inline EmpiricalMeasure empirical_measure(const CircleMap& map, double x0,
                                          std::size_t n, std::size_t burn_in) {
  return uniform_empirical(orbit(map, x0, n, burn_in));
}

/// Same, for a seeded Lebesgue-typical initial point.
inline EmpiricalMeasure seeded_empirical_measure(const CircleMap& map,
                                                 std::uint64_t seed, std::size_t n,
                                                 std::size_t burn_in,
                                                 std::uint64_t stream = 0) {
  if (n < 1) throw BadParams("empirical_measure: n must be >= 1");
  OrbitStream os(map, InitialCondition::seeded(seed, stream));
  os.skip(burn_in);
  std::vector<double> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(os.next());
  return uniform_empirical(std::move(pts));
}

/// Histogram density on a uniform grid of k cells.
struct GridMeasure {
  std::size_t k = 0;
  std::vector<double> mass;
};

inline void validate(const GridMeasure& mu) {
  if (mu.k < 2 || mu.mass.size() != mu.k) throw BadParams("grid measure: k < 2");
  double total = 0.0;
  for (double m : mu.mass) {
    if (!(m >= 0.0)) throw BadParams("grid measure: negative mass");
    total += m;
  }
  if (std::fabs(total - 1.0) > kMassTolerance)
    throw BadParams("grid measure: masses do not sum to 1");
}

inline GridMeasure make_grid(std::size_t k, std::vector<double> mass) {
  GridMeasure mu{k, std::move(mass)};
  validate(mu);
  return mu;
}

inline GridMeasure uniform_grid(std::size_t k) {
  if (k < 2) throw BadParams("uniform_grid: k < 2");
  std::vector<double> mass(k, 1.0 / static_cast<double>(k));
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) total += mass[i];
  mass.back() = 1.0 - total;
  return GridMeasure{k, std::move(mass)};
}

inline std::size_t grid_cell(double x, std::size_t k) {
  auto c = static_cast<std::size_t>(x * static_cast<double>(k));
  return c >= k ? k - 1 : c;
}

/// Bins point masses: mass[i] collects the weight landing in [i/k, (i+1)/k);
/// a point exactly on a cell boundary goes to the cell on its right.
inline GridMeasure to_grid(const EmpiricalMeasure& mu, std::size_t k) {
  if (k < 2) throw BadParams("to_grid: k < 2");
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < mu.points.size(); ++i)
    mass[grid_cell(mu.points[i], k)] += mu.weights[i];
  return GridMeasure{k, std::move(mass)};
}

template <class Fn>
double integrate(const EmpiricalMeasure& mu, Fn&& fn) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.points.size(); ++i) {
    double v = fn(mu.points[i]);
    if (!std::isfinite(v)) throw NonFinite("integrate: non-finite integrand value");
    acc += mu.weights[i] * v;
  }
  return acc;
}

/// Midpoint rule on the grid cells; O(1/k) error, accepted and documented.
template <class Fn>
double integrate(const GridMeasure& mu, Fn&& fn) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.k; ++i) {
    double x = (static_cast<double>(i) + 0.5) / static_cast<double>(mu.k);
    double v = fn(x);
    if (!std::isfinite(v)) throw NonFinite("integrate: non-finite integrand value");
    acc += mu.mass[i] * v;
  }
  return acc;
}

/// f_* nu: each support point replaced by its image, weights preserved.
inline EmpiricalMeasure pushforward(const CircleMap& map, const EmpiricalMeasure& mu) {
  EmpiricalMeasure out = mu;
  for (double& x : out.points) x = map.eval(x);
  return out;
}

/// Test family for the weak* metric
///   dist(mu, nu) = sum_{i=0..I} 2^-i |int phi_i dmu - int phi_i dnu|
/// with phi_0 = -log|f'| and, for i >= 1, low-frequency trigonometric
/// functions affinely rescaled into [0,1]: the pair
/// ((1+cos 2pi m x)/2, (1+sin 2pi m x)/2) for m = 1..I/2.
class TestFamily {
 public:
  explicit TestFamily(const CircleMap& map, std::size_t truncation = 32)
      : map_(map), truncation_(truncation) {
    if (truncation < 16) throw BadParams("TestFamily: truncation must be >= 16");
    double hi = 0.0;
    for (std::size_t i = 0; i < 4096; ++i) {
      double x = static_cast<double>(i) / 4096.0;
      hi = std::max(hi, std::fabs(std::log(map_.derivative(x))));
    }
    phi0_sup_ = hi;
  }

  std::size_t truncation() const { return truncation_; }
  const CircleMap& map() const { return map_; }
  double phi0_sup() const { return phi0_sup_; }

  double phi(std::size_t i, double x) const {
    if (i == 0) return -std::log(map_.derivative(x));
    std::size_t m = (i + 1) / 2;
    double a = 2.0 * std::numbers::pi * static_cast<double>(m) * x;
    return i % 2 == 1 ? 0.5 * (1.0 + std::cos(a)) : 0.5 * (1.0 + std::sin(a));
  }

  /// Integrals of phi_0..phi_I against a measure. Uses a Chebyshev-style
  /// recurrence so each point costs two trig calls regardless of truncation.
  template <class Measure>
  std::vector<double> signature(const Measure& mu) const {
    std::vector<double> sig(truncation_ + 1, 0.0);
    accumulate(mu, sig);
    return sig;
  }

  double distance(const std::vector<double>& a, const std::vector<double>& b) const {
    if (a.size() != b.size()) throw BadParams("signature length mismatch");
    double acc = 0.0, w = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double term = std::fabs(a[i] - b[i]);
      if (!std::isfinite(term)) throw NonFinite("weak* distance term non-finite");
      acc += w * term;
      w *= 0.5;
    }
    return acc;
  }

  /// Adds the contribution of one weighted point to a raw (unnormalized)
  /// integral vector.
  void add_point(double x, double weight, std::vector<double>& sums) const {
    double phi0 = -std::log(map_.derivative(x));
    if (!std::isfinite(phi0)) throw NonFinite("phi_0 non-finite on support");
    sums[0] += weight * phi0;
    double c1 = std::cos(2.0 * std::numbers::pi * x);
    double s1 = std::sin(2.0 * std::numbers::pi * x);
    double cm = c1, sm = s1;
    for (std::size_t i = 1; i <= truncation_; i += 2) {
      sums[i] += weight * 0.5 * (1.0 + cm);
      if (i + 1 <= truncation_) sums[i + 1] += weight * 0.5 * (1.0 + sm);
      double cn = cm * c1 - sm * s1;
      double sn = sm * c1 + cm * s1;
      cm = cn;
      sm = sn;
    }
  }

 private:
  void accumulate(const EmpiricalMeasure& mu, std::vector<double>& sig) const {
    for (std::size_t i = 0; i < mu.points.size(); ++i)
      add_point(mu.points[i], mu.weights[i], sig);
  }
  void accumulate(const GridMeasure& mu, std::vector<double>& sig) const {
    for (std::size_t i = 0; i < mu.k; ++i) {
      double x = (static_cast<double>(i) + 0.5) / static_cast<double>(mu.k);
      add_point(x, mu.mass[i], sig);
    }
  }

  CircleMap map_;
  std::size_t truncation_;
  double phi0_sup_ = 0.0;
};

template <class MeasureA, class MeasureB>
double weak_star_distance(const MeasureA& a, const MeasureB& b,
                          const TestFamily& family) {
  return family.distance(family.signature(a), family.signature(b));
}

/// Running weak* signature of an empirical measure, fed one orbit point at a
/// time; snapshots at checkpoints cost O(truncation).
class SignatureAccumulator {
 public:
  explicit SignatureAccumulator(const TestFamily& family)
      : family_(&family), sums_(family.truncation() + 1, 0.0) {}

  void add(double x) {
    family_->add_point(x, 1.0, sums_);
    ++count_;
  }

  std::size_t count() const { return count_; }

  std::vector<double> signature() const {
    if (count_ == 0) throw BadParams("SignatureAccumulator: empty");
    std::vector<double> sig = sums_;
    double inv = 1.0 / static_cast<double>(count_);
    for (double& v : sig) v *= inv;
    return sig;
  }

 private:
  const TestFamily* family_;
  std::vector<double> sums_;
  std::size_t count_ = 0;
};

}  // namespace ergolab
