#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

enum class MapFamily { linear, smooth_perturbed, nonhoelder };

inline const char* family_name(MapFamily f) {
  switch (f) {
    case MapFamily::linear: return "linear";
    case MapFamily::smooth_perturbed: return "smooth_perturbed";
    case MapFamily::nonhoelder: return "nonhoelder";
  }
  return "?";
}

struct MapParams {
  int degree = 2;
  double c = 0.0;  // perturbation amplitude; ignored by the linear family
};

namespace detail {

constexpr std::size_t kQuadratureNodes = std::size_t{1} << 16;
constexpr std::size_t kValidationGrid = 100000;
constexpr double kExpansionMargin = 1e-6;

/// Derivative modulus shape for the nonhoelder family: continuous at the
/// singular point x = 0 but with modulus of continuity ~ 1/log(1/rho), which
/// beats every Hoelder bound.
inline double nonhoelder_shape(double x) {
  double rho = circle_distance(wrap01(x), 0.0);
  if (rho <= 0.0) return 0.0;
  return 1.0 / std::log(std::numbers::e + 1.0 / rho);
}

struct MapImpl {
  MapFamily family;
  MapParams params;
  double min_derivative = 0.0;
  // nonhoelder only: cumulative quadrature table of the prescribed derivative,
  // rescaled so cum.back() == degree; lift is its linear interpolant.
  std::vector<double> cum;
  double shape_mean = 0.0;
  double lift_scale = 1.0;

  double derivative(double x) const {
    const double d = static_cast<double>(params.degree);
    switch (family) {
      case MapFamily::linear:
        return d;
      case MapFamily::smooth_perturbed:
        return d + params.c * std::cos(2.0 * std::numbers::pi * x);
      case MapFamily::nonhoelder:
        return lift_scale * (d + params.c * (nonhoelder_shape(x) - shape_mean));
    }
    return d;
  }

  // Monotone lift F : [0,1] -> [0, degree] with F(0) = 0.
  double lift(double x) const {
    const double d = static_cast<double>(params.degree);
    switch (family) {
      case MapFamily::linear:
        return d * x;
      case MapFamily::smooth_perturbed:
        return d * x + params.c / (2.0 * std::numbers::pi) *
                           std::sin(2.0 * std::numbers::pi * x);
      case MapFamily::nonhoelder: {
        const std::size_t n = cum.size() - 1;
        double t = x * static_cast<double>(n);
        std::size_t j = std::min(static_cast<std::size_t>(t), n - 1);
        double frac = t - static_cast<double>(j);
        return cum[j] + frac * (cum[j + 1] - cum[j]);
      }
    }
    return d * x;
  }
};

}  // namespace detail

/// Evaluatable degree-d expanding map of [0,1). Immutable after construction
/// (quadrature tables frozen), cheap to copy, safe to share across threads.
class CircleMap {
 public:
  CircleMap() = default;

  double eval(double x) const {
    check_domain(x);
    return wrap01(impl_->lift(x));
  }

  /// Monotone lift on [0,1]; lift(1) - lift(0) == degree.
  double lift(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("lift: x outside [0,1]");
    return impl_->lift(x);
  }

  double derivative(double x) const {
    check_domain(x);
    return impl_->derivative(x);
  }

  int degree() const { return impl_->params.degree; }
  MapFamily family() const { return impl_->family; }
  const MapParams& params() const { return impl_->params; }

  /// Minimum derivative certified over the construction-time validation grid.
  double min_derivative() const { return impl_->min_derivative; }

  explicit CircleMap(std::shared_ptr<const detail::MapImpl> impl)
      : impl_(std::move(impl)) {}

 private:
  static void check_domain(double x) {
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("x outside [0,1)");
  }

  std::shared_ptr<const detail::MapImpl> impl_;
};

/// Returns the minimum of f' over an evenly spaced grid; throws NotExpanding
/// if that minimum is <= 1.
inline double validate_expanding(const CircleMap& map, std::size_t grid_points) {
  if (grid_points < 1000) throw BadParams("validate_expanding: grid < 1e3");
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_points; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(grid_points);
    lo = std::min(lo, map.derivative(x));
  }
  if (!(lo > 1.0)) throw NotExpanding("derivative <= 1 on validation grid");
  return lo;
}

inline CircleMap make_map(MapFamily family, const MapParams& params) {
  if (params.degree < 2) throw BadParams("degree must be >= 2");
  auto impl = std::make_shared<detail::MapImpl>();
  impl->family = family;
  impl->params = params;
  const double d = static_cast<double>(params.degree);

  switch (family) {
    case MapFamily::linear:
      break;
    case MapFamily::smooth_perturbed: {
      if (!(params.c >= 0.0)) throw BadParams("amplitude c must be >= 0");
      if (!(d - params.c > 1.0 + detail::kExpansionMargin))
        throw NotExpanding("smooth_perturbed: d - c too close to 1");
      break;
    }
    case MapFamily::nonhoelder: {
      if (!(params.c >= 0.0)) throw BadParams("amplitude c must be >= 0");
      const std::size_t n = detail::kQuadratureNodes;
      // Trapezoidal mean of the shape, enforcing a zero-mean perturbation so
      // the raw lift increment is already the degree before rescaling.
      std::vector<double> shape(n + 1);
      for (std::size_t i = 0; i <= n; ++i)
        shape[i] =
            detail::nonhoelder_shape(static_cast<double>(i) / static_cast<double>(n));
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += 0.5 * (shape[i] + shape[i + 1]);
      mean /= static_cast<double>(n);
      impl->shape_mean = mean;

      impl->cum.assign(n + 1, 0.0);
      double prev = d + params.c * (shape[0] - mean);
      for (std::size_t i = 0; i < n; ++i) {
        double cur = d + params.c * (shape[i + 1] - mean);
        if (!(prev > 1.0 + detail::kExpansionMargin))
          throw NotExpanding("nonhoelder: derivative too close to 1");
        impl->cum[i + 1] =
            impl->cum[i] + 0.5 * (prev + cur) / static_cast<double>(n);
        prev = cur;
      }
      impl->lift_scale = d / impl->cum.back();
      for (double& v : impl->cum) v *= impl->lift_scale;
      impl->cum.back() = d;  // pin the winding exactly
      break;
    }
  }

  CircleMap map{std::shared_ptr<const detail::MapImpl>(impl)};
  double lo = validate_expanding(map, detail::kValidationGrid);
  if (!(lo > 1.0 + detail::kExpansionMargin))
    throw NotExpanding("min sampled derivative <= 1 + 1e-6");
  impl->min_derivative = lo;
  return map;
}

/// Preimages of one target under every monotone branch.
struct BranchPreimages {
  double target = 0.0;
  std::vector<double> points;     // strictly increasing, one per branch
  std::vector<double> residuals;  // |f(points[i]) - target| on the circle
};

/// Solves lift(x) = target on [0,1] by bisection. The lift is strictly
/// increasing, so 60 halvings bracket the root to ~1e-18 unconditionally even
/// when the derivative is barely above 1.
inline double invert_lift(const CircleMap& map, double target) {
  double lo = 0.0, hi = 1.0;
  double flo = map.lift(lo), fhi = map.lift(hi);
  if (target < flo || target > fhi)
    throw ConvergenceError("invert_lift: target outside lift range");
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = map.lift(mid);
    if (fm < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  (void)flo;
  (void)fhi;
  return 0.5 * (lo + hi);
}

inline BranchPreimages inverse_branches(const CircleMap& map, double y) {
  if (!(y >= 0.0 && y < 1.0)) throw DomainError("inverse_branches: y outside [0,1)");
  BranchPreimages out;
  out.target = y;
  const int d = map.degree();
  const double f0 = map.lift(0.0);
  const double m0 = std::ceil(f0 - y);
  for (int b = 0; b < d; ++b) {
    double target = y + m0 + static_cast<double>(b);
    double x = invert_lift(map, target);
    if (x >= 1.0) x = std::nextafter(1.0, 0.0);
    double res = circle_distance(map.eval(x), y);
    if (!(res <= 1e-12))
      throw ConvergenceError("inverse_branches: residual above tolerance");
    out.points.push_back(x);
    out.residuals.push_back(res);
  }
  return out;
}

/// Branch endpoints: the d preimages of the fixed cut at 0. The arcs between
/// consecutive endpoints are exactly the monotone full branches of the map.
inline std::vector<double> branch_points(const CircleMap& map) {
  return inverse_branches(map, 0.0).points;
}

/// Forward orbit of an explicit initial point, in plain double arithmetic:
/// n points starting at f^burn_in(x0).
inline std::vector<double> orbit(const CircleMap& map, double x0, std::size_t n,
                                 std::size_t burn_in) {
  if (n < 1) throw BadParams("orbit: n must be >= 1");
  if (!(x0 >= 0.0 && x0 < 1.0)) throw DomainError("orbit: x0 outside [0,1)");
  double x = x0;
  for (std::size_t i = 0; i < burn_in; ++i) x = map.eval(x);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(x);
    x = map.eval(x);
  }
  return out;
}

/// How an orbit starts: at an explicit point (exact double iteration), at a
/// seeded Lebesgue-typical point (optionally anchored near a given value), or
/// at an exact rational p/q, which a linear map iterates in modular arithmetic
/// so genuinely periodic orbits stay periodic.
struct InitialCondition {
  enum class Kind { point, seeded, rational };
  Kind kind = Kind::point;
  double x0 = 0.0;  // explicit point, or anchor for seeded draws
  bool has_anchor = false;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static InitialCondition point(double x) {
    InitialCondition ic;
    ic.kind = Kind::point;
    ic.x0 = x;
    return ic;
  }
  static InitialCondition seeded(std::uint64_t seed, std::uint64_t stream = 0) {
    InitialCondition ic;
    ic.kind = Kind::seeded;
    ic.seed = seed;
    ic.stream = stream;
    return ic;
  }
  static InitialCondition seeded_near(double anchor, std::uint64_t seed,
                                      std::uint64_t stream = 0) {
    InitialCondition ic = seeded(seed, stream);
    ic.x0 = anchor;
    ic.has_anchor = true;
    return ic;
  }
  static InitialCondition rational(std::uint64_t num, std::uint64_t den) {
    if (den == 0 || num >= den) throw DomainError("rational: need 0 <= p/q < 1");
    InitialCondition ic;
    ic.kind = Kind::rational;
    ic.num = num;
    ic.den = den;
    ic.x0 = static_cast<double>(num) / static_cast<double>(den);
    return ic;
  }
};

/// Streaming orbit generator.
///
/// For an explicit point this is plain iteration of eval. For a seeded draw on
/// the linear family it instead slides a window over an i.i.d. base-d digit
/// tape: multiplication by a power of two is exact in binary floating point,
/// so a naively iterated double collapses onto the fixed point 0 after ~53
/// steps, which is the orbit of a (measure-zero) dyadic rational rather than
/// of a typical point. The tape realizes the exact orbit of a random real
/// whose leading digits agree with the anchor, truncated to the window width.
/// Nonlinear families inject rounding noise on every step and need no tape.
class OrbitStream {
 public:
  OrbitStream(const CircleMap& map, const InitialCondition& ic) : map_(map) {
    if (ic.kind == InitialCondition::Kind::point) {
      if (!(ic.x0 >= 0.0 && ic.x0 < 1.0))
        throw DomainError("OrbitStream: x0 outside [0,1)");
      x_ = ic.x0;
      return;
    }
    if (ic.kind == InitialCondition::Kind::rational) {
      anchor_ = ic.x0;
      if (map.family() == MapFamily::linear) {
        rational_ = true;
        num_ = ic.num;
        den_ = ic.den;
      } else {
        x_ = ic.x0;
      }
      return;
    }
    rng_ = make_rng(ic.seed, ic.stream);
    double anchor = ic.has_anchor ? ic.x0 : uniform01(rng_);
    anchor_ = wrap01(anchor);
    if (map.family() != MapFamily::linear) {
      x_ = anchor_;
      return;
    }
    tape_ = true;
    const std::uint64_t d = static_cast<std::uint64_t>(map.degree());
    base_ = d;
    std::uint64_t span = 1;
    width_ = 0;
    while (span <= (std::uint64_t{1} << 63) / d) {
      span *= d;
      ++width_;
    }
    span_ = span;
    drop_ = span / d;  // d^(width-1), strips the leading digit
    inv_span_ = 1.0 / static_cast<double>(span_);
    // Seed the window with the anchor's leading base-d digits, then extend
    // with the pseudo-random tape.
    double a = anchor_;
    window_ = 0;
    for (int j = 0; j < width_; ++j) {
      a *= static_cast<double>(d);
      double dig = std::floor(a);
      if (dig >= static_cast<double>(d)) dig = static_cast<double>(d) - 1.0;
      a -= dig;
      window_ = window_ * d + static_cast<std::uint64_t>(dig);
    }
  }

  double next() {
    if (rational_) {
      double out = static_cast<double>(num_) / static_cast<double>(den_);
      if (out >= 1.0) out = std::nextafter(1.0, 0.0);
      auto prod = static_cast<unsigned __int128>(num_) *
                  static_cast<unsigned __int128>(map_.degree());
      num_ = static_cast<std::uint64_t>(prod % den_);
      return out;
    }
    if (!tape_) {
      double out = x_;
      x_ = map_.eval(x_);
      return out;
    }
    double out = static_cast<double>(window_) * inv_span_;
    if (out >= 1.0) out = std::nextafter(1.0, 0.0);
    window_ = (window_ % drop_) * base_ + next_digit();
    return out;
  }

  void skip(std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) (void)next();
  }

  double anchor() const { return anchor_; }

 private:
  std::uint64_t next_digit() {
    if (base_ == 2) {
      if (bits_left_ == 0) {
        bit_buffer_ = rng_();
        bits_left_ = 64;
      }
      std::uint64_t b = bit_buffer_ & 1;
      bit_buffer_ >>= 1;
      --bits_left_;
      return b;
    }
    return uniform_below(rng_, base_);
  }

  CircleMap map_;
  double x_ = 0.0;
  double anchor_ = 0.0;
  bool tape_ = false;
  bool rational_ = false;
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
  std::mt19937_64 rng_;
  std::uint64_t window_ = 0;
  std::uint64_t span_ = 0;
  std::uint64_t drop_ = 0;
  std::uint64_t base_ = 0;
  double inv_span_ = 0.0;
  int width_ = 0;
  std::uint64_t bit_buffer_ = 0;
  int bits_left_ = 0;
};

}  // namespace ergolab
