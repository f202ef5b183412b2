#include "doctest.h"

#include <cmath>

#include "q8/stability.hpp"

using namespace q8;
using namespace q8::stability;

namespace {

const group::GroupTable& table() {
  static const auto t = [] {
    auto [a, b] = group::printed_generators();
    return group::generate_group(a, b, 16);
  }();
  return t;
}

NodeEigenSplit make_split(double e, double c, double t) {
  // outgoing axis 0, incoming axis 1, transverse axis 2
  return split_node(dynamics::kQa, {e, -c, t}, 0, 1);
}

}  // namespace

TEST_CASE("node splits") {
  const auto s = split_node(dynamics::kQb, {0.5, -0.7, 1.1}, 2, 1);
  CHECK(s.transverse_axis == 0);
  CHECK(s.e == 1.1);
  CHECK(s.c == doctest::Approx(0.7));
  CHECK(s.t == 0.5);
  CHECK_FALSE(s.geometry_violation);
  CHECK(s.transverse_expanding);
  CHECK(split_node(dynamics::kQb, {-0.5, -0.7, -1.1}, 0, 1).geometry_violation);
  CHECK_THROWS_AS(split_node(0, {1, 1, 1}, 1, 1), std::invalid_argument);
}

TEST_CASE("Krupa-Melbourne index arithmetic") {
  const auto one = rho_km({make_split(1, 1, 0), make_split(2, 2, 0), make_split(0.5, 0.5, 0)});
  for (double r : one.rho_i) CHECK(r == 1.0);
  CHECK(one.rho == 1.0);

  const auto contracting = rho_km({make_split(1.2, 0.8, -0.8)});
  CHECK(contracting.rho_i[0] == doctest::Approx(0.8 / 1.2));

  const auto expanding = rho_km({make_split(1.2, 0.8, 1.2)});
  CHECK(expanding.rho_i[0] == 0.0);
  CHECK_FALSE(std::signbit(expanding.rho));
  CHECK(expanding.discrepancy_notes.size() == 1);

  const auto prod = rho_km({make_split(1.0, 2.0, -0.5), make_split(2.0, 3.0, -4.0)});
  CHECK(prod.rho == doctest::Approx(1.5 * 1.5));
}

TEST_CASE("closed-form indices") {
  const auto upper = rho_closed_form({-1, 0.1, -0.5});
  CHECK_FALSE(upper.lower_branch);
  CHECK(upper.rho == doctest::Approx(-3.375));
  CHECK(upper.rho_abs == doctest::Approx(3.375));

  const auto lower = rho_closed_form({-1, 0.1, -1.0});
  CHECK(lower.lower_branch);
  CHECK(lower.rho == doctest::Approx(-5.625));

  // The two branches meet where 2u - 4q = -u + 2 eps.
  const double u = -1.3, eps = 0.2, q = 0.75 * u - 0.5 * eps;
  const auto at = rho_closed_form({u, eps, q});
  const auto below = rho_closed_form({u, eps, std::nextafter(q, -10.0)});
  CHECK(at.rho == doctest::Approx(below.rho));

  CHECK_THROWS_AS(rho_closed_form({-0.2, 0.1, 0.0}), std::domain_error);
}

TEST_CASE("region classification") {
  CHECK(classify({1, 0.1, -0.15}).kind == StabilityKind::CompletelyUnstable);
  const auto as = classify({-1, 0.1, -1.0});
  CHECK(as.kind == StabilityKind::AsymptoticallyStable);
  CHECK(as.stable_bound == doctest::Approx(-0.8));
  const auto eas = classify({-1, 0.1, -0.5});
  CHECK(eas.kind == StabilityKind::EssentiallyAsymptoticallyStable);
  REQUIRE(eas.essential_upper);
  CHECK(*eas.essential_upper == doctest::Approx(-0.5 + 0.512 / 1.44));
  CHECK(classify({-1, 0.1, 0.5}).kind == StabilityKind::Inconclusive);
  CHECK(classify({0, 0.1, 0.5}).kind == StabilityKind::Inconclusive);

  CHECK_FALSE(as.existence_printed);
  CHECK_FALSE(classify({-1, 0.1, -0.2}).existence_printed);
  CHECK(classify({-1, 0.1, -0.2}).existence_abs);
}

TEST_CASE("regions partition a grid") {
  const double eps = 0.1;
  int counts[4] = {0, 0, 0, 0};
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double u = -2.0 + 0.04 * i, q = -2.0 + 0.04 * j;
      const auto c = classify({u, eps, q});
      // Independent predicates.
      const double lo = 0.75 * u - 0.5 * eps;
      const double hi = u / 2 - std::pow(u + 2 * eps, 3) / std::pow(-u + 2 * eps, 2);
      const bool a = u < 0 && q < lo;
      const bool b = u < 0 && lo < q && q < hi;
      const bool d = u > 0;
      CHECK(a + b + d <= 1);
      CHECK(c.stable_region == a);
      CHECK(c.essential_region == b);
      ++counts[static_cast<int>(c.kind)];
    }
  }
  CHECK(counts[0] > 0);
  CHECK(counts[1] > 0);
  CHECK(counts[2] > 0);
}

TEST_CASE("analysis of a detected cycle") {
  const auto rep = analyze({1, 0.1, -0.15}, {}, table());
  REQUIRE(rep.cycle);
  CHECK(rep.geometry_error.empty());
  REQUIRE(rep.splits.size() == 6);
  for (const auto& s : rep.splits) {
    CHECK(s.e > 0.0);
    CHECK(s.incoming_eigenvalue < 0.0);
  }
  REQUIRE(rep.rho);
  CHECK(rep.rho->rho_i.size() == 6);
  double prod = 1.0;
  for (const auto& s : rep.splits) prod *= std::min(s.c / s.e, 1.0 - s.t / s.e);
  CHECK(rep.rho->rho == doctest::Approx(prod));

  const auto none = analyze({-1, 0.1, -1.0}, {}, table());
  CHECK_FALSE(none.cycle);
  CHECK_FALSE(none.rho);
}

TEST_CASE("polyline geometry") {
  const auto c = dynamics::detect_cycle(dynamics::connection_graph({1, 0.1, -0.15}, {}, table()));
  REQUIRE(c);
  const auto line = cycle_polyline(*c, 1000);
  CHECK(line.size() == 1000);
  CHECK(distance_to_polyline(line[17], line) < 1e-12);
  CHECK(distance_to_polyline(dynamics::vertex_location(dynamics::kQa), line) < 1e-12);
  const dynamics::Theta3 off = {line[300][0] + 1e-3, line[300][1], line[300][2]};
  CHECK(distance_to_polyline(off, line) <= 1e-3 + 1e-15);
}

TEST_CASE("basin probe is reproducible across worker counts") {
  const Params p{1, 0.1, -0.15};
  const auto c = dynamics::detect_cycle(dynamics::connection_graph(p, {}, table()));
  REQUIRE(c);
  ProbeOptions one, three;
  one.threads = 1;
  three.threads = 3;
  const auto a = basin_probe(p, *c, 1e-2, 100, 99, one);
  const auto b = basin_probe(p, *c, 1e-2, 100, 99, three);
  CHECK(a.returned == b.returned);
  CHECK(a.returned_fraction == b.returned_fraction);
  CHECK(a.failures == 0);
  CHECK_THROWS_AS(basin_probe(p, *c, 0.0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(basin_probe(p, *c, 1e-3, 10, 1), std::invalid_argument);
}
