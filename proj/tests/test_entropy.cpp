#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ergolab/ergolab.hpp"

using namespace ergolab;
using Catch::Approx;

namespace {

CircleMap doubling() { return make_map(MapFamily::linear, {2, 0.0}); }
CircleMap tripling() { return make_map(MapFamily::linear, {3, 0.0}); }
CircleMap smooth01() { return make_map(MapFamily::smooth_perturbed, {2, 0.1}); }

}  // namespace

TEST_CASE("make_partition basics", "[entropy]") {
  auto p = make_partition(2, 0.0);
  CHECK(p.breakpoints == std::vector<double>{0.0, 0.5});
  CHECK(diameter(p) == 0.5);

  auto p4 = make_partition(4, 0.01);
  REQUIRE(p4.atom_count() == 4);
  CHECK(diameter(p4) == Approx(0.25).margin(1e-15));

  CHECK_THROWS_AS(make_partition(1, 0.0), BadParams);
  CHECK_THROWS_AS(make_partition(4, 0.3), BadParams);
}

TEST_CASE("seeded offsets give non-periodic endpoints", "[entropy]") {
  // periodic points of x -> 2x mod 1 with period m are exactly p / (2^m - 1),
  // i.e. frac(x (2^m - 1)) == 0; a seeded offset misses every one of them
  auto map = doubling();
  auto rng = make_rng(404);
  double offset = uniform01(rng) / 8.0;
  auto p = make_partition(8, offset);
  for (double e : p.breakpoints) {
    for (int m = 1; m <= 20; ++m) {
      double scaled = e * (std::pow(2.0, m) - 1.0);
      double frac = scaled - std::floor(scaled);
      CHECK(std::min(frac, 1.0 - frac) > 1e-9);
    }
    auto orb = orbit(map, e, 21, 0);
    for (int j = 1; j <= 20; ++j) CHECK(circle_distance(orb[j], e) > 1e-9);
  }
}

TEST_CASE("refinement of linear maps gives uniform cylinders", "[entropy]") {
  auto rp = refine(doubling(), make_partition(2, 0.0), 3);
  REQUIRE(rp.cylinder_count() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(rp.cuts[i] == Approx(static_cast<double>(i) / 8.0).margin(1e-12));
    // the symbol word of the i-th dyadic cylinder spells i in binary
    REQUIRE(rp.words[i].size() == 3);
    std::size_t coded = 0;
    for (auto s : rp.words[i]) coded = coded * 2 + s;
    CHECK(coded == i);
  }

  auto rp9 = refine(tripling(), make_partition(3, 0.0), 2);
  REQUIRE(rp9.cylinder_count() == 9);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(rp9.cuts[i] == Approx(static_cast<double>(i) / 9.0).margin(1e-12));

  auto rp1 = refine(doubling(), make_partition(2, 0.0), 1);
  CHECK(rp1.cylinder_count() == 2);
}

TEST_CASE("refined cuts satisfy the pullback equations", "[entropy]") {
  auto map = smooth01();
  auto base = make_partition(2, 0.0);
  auto rp = refine(map, base, 2);
  REQUIRE(rp.cylinder_count() == 4);
  auto prev = refine(map, base, 1);
  for (double c : rp.cuts) {
    double moved = map.eval(c);
    bool in_base = false;
    for (double b : base.breakpoints)
      if (circle_distance(c, b) < 1e-10) in_base = true;
    bool maps_to_cut = false;
    for (double b : prev.cuts)
      if (circle_distance(moved, b) < 1e-10) maps_to_cut = true;
    CHECK((in_base || maps_to_cut));
  }
  // cylinder count never exceeds (#atoms) * degree^(q-1)
  for (std::size_t q = 1; q <= 6; ++q)
    CHECK(refine(map, base, q).cylinder_count() <=
          2 * static_cast<std::size_t>(std::pow(2.0, static_cast<double>(q - 1))));
}

TEST_CASE("partition entropy closed forms", "[entropy]") {
  auto p4 = make_partition(4, 0.0);
  CHECK(partition_entropy(p4, uniform_grid(4)) == Approx(std::log(4.0)).margin(1e-12));
  CHECK(partition_entropy(p4, dirac(0.0)) == 0.0);
  CHECK(partition_entropy(make_partition(8, 0.0), dirac(0.3)) == 0.0);
}

TEST_CASE("empirical refinement entropy approaches q log 2", "[entropy]") {
  auto map = doubling();
  auto mu = seeded_empirical_measure(map, 7, 1000000, 0);
  auto rp = refine(map, make_partition(2, 0.0), 10);
  double h = partition_entropy(rp, mu);
  CHECK(h == Approx(10.0 * std::log(2.0)).epsilon(0.02));
}

TEST_CASE("entropy is monotone under refinement and bounded", "[entropy]") {
  auto map = doubling();
  auto base = make_partition(2, 0.0);
  auto mu = seeded_empirical_measure(map, 10, 200000, 0);
  double prev = 0.0;
  for (std::size_t q = 1; q <= 8; ++q) {
    double h = partition_entropy(refine(map, base, q), mu);
    CHECK(h >= prev - 1e-12);
    CHECK(h <= static_cast<double>(q) * std::log(2.0) + std::log(2.0) + 1e-9);
    prev = h;
  }
}

TEST_CASE("refinement entropy is subadditive for exact measures", "[entropy]") {
  for (const auto& map : {doubling(), tripling()}) {
    auto base = branch_partition(map);
    auto leb = uniform_grid(729);
    for (std::size_t a : {1UL, 2UL, 3UL}) {
      for (std::size_t b : {1UL, 2UL}) {
        double hab = partition_entropy(refine(map, base, a + b), leb);
        double ha = partition_entropy(refine(map, base, a), leb);
        double hb = partition_entropy(refine(map, base, b), leb);
        CHECK(hab <= ha + hb + 1e-9);
      }
    }
  }
}

TEST_CASE("entropy estimate on exact grid measures", "[entropy]") {
  auto map = doubling();
  auto est = entropy_estimate(map, uniform_grid(1024), make_partition(2, 0.0), 10);
  CHECK(est.entropy_est == Approx(std::log(2.0)).margin(1e-6));
  CHECK(est.q_used == 10);
  REQUIRE(est.per_q.size() == 10);
  // the whole diagnostic sequence is flat at log 2 for the dyadic partition
  for (double v : est.per_q) CHECK(v == Approx(std::log(2.0)).margin(1e-6));
}

TEST_CASE("entropy estimate on empirical measures", "[entropy]") {
  auto tri = tripling();
  auto mu = seeded_empirical_measure(tri, 21, 1000000, 0);
  auto est = entropy_estimate(tri, mu, branch_partition(tri), 8);
  CHECK(est.entropy_est == Approx(std::log(3.0)).epsilon(0.05));

  // diagnostics decrease toward the rate (within statistical wiggle)
  for (std::size_t q = 1; q < est.per_q.size(); ++q)
    CHECK(est.per_q[q] <= est.per_q[q - 1] + 0.01);
}

TEST_CASE("atomic measures have zero entropy at any depth", "[entropy]") {
  auto map = doubling();
  auto est = entropy_estimate(map, dirac(0.0), make_partition(2, 0.0), 6,
                              MeasureKind::exact);
  CHECK(est.entropy_est == 0.0);
  for (double v : est.per_q) CHECK(v == 0.0);
}

TEST_CASE("undersampled empirical input is rejected", "[entropy]") {
  auto map = doubling();
  auto mu = seeded_empirical_measure(map, 3, 1000, 0);
  CHECK_THROWS_AS(entropy_estimate(map, mu, make_partition(2, 0.0), 10),
                  UnderSampled);
}

TEST_CASE("pesin residuals", "[entropy]") {
  auto map = doubling();
  auto base = make_partition(2, 0.0);

  auto leb_est = entropy_estimate(map, uniform_grid(1024), base, 10);
  auto leb_rep = pesin_residual(map, uniform_grid(1024), leb_est);
  CHECK(leb_rep.lyapunov == Approx(std::log(2.0)).margin(1e-12));
  CHECK(std::fabs(leb_rep.residual) < 1e-6);
  CHECK(leb_rep.residual >= -1e-9);  // exact inputs obey the inequality tightly
  CHECK(leb_rep.pesin_holds);

  auto atom_est = entropy_estimate(map, dirac(0.0), base, 6, MeasureKind::exact);
  auto atom_rep = pesin_residual(map, dirac(0.0), atom_est);
  CHECK(atom_rep.residual == Approx(std::log(2.0)).margin(1e-12));
  CHECK_FALSE(atom_rep.pesin_holds);
  CHECK(atom_rep.residual == atom_rep.lyapunov - atom_rep.entropy_est);
}

TEST_CASE("smooth map residual is small and agrees with the Ulam route",
          "[entropy]") {
  auto map = smooth01();
  auto mu = seeded_empirical_measure(map, 17, 1000000, 100);
  auto est = entropy_estimate(map, mu, branch_partition(map), 10);
  auto rep = pesin_residual(map, mu, est);
  CHECK(std::fabs(rep.residual) < 0.05);

  // independent route: the same estimate on the stationary density of the
  // discretized operator
  auto pest = pressure_estimate(map, 256);
  CHECK(std::fabs(pest.entropy_est - rep.entropy_est) < 0.05);
}

TEST_CASE("ruelle inequality holds across families", "[entropy]") {
  std::vector<CircleMap> maps = {doubling(), tripling(), smooth01(),
                                 make_map(MapFamily::nonhoelder, {2, 0.05})};
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const auto& map = maps[m];
    auto mu = seeded_empirical_measure(map, 1000 + m, 200000, 50);
    auto q = auto_q_max(map.degree(), mu.size());
    auto est = entropy_estimate(map, mu, branch_partition(map), q);
    auto rep = pesin_residual(map, mu, est);
    CHECK(rep.residual >= -0.05);
  }
}
