#include "doctest.h"

#include <random>

#include "q8/angles.hpp"
#include "q8/dynamics.hpp"

using namespace q8;
using namespace q8::dynamics;

namespace {

const group::GroupTable& table() {
  static const auto t = [] {
    auto [a, b] = group::printed_generators();
    return group::generate_group(a, b, 16);
  }();
  return t;
}

std::complex<double> char_poly(const Mat3& m, std::complex<double> x) {
  const std::complex<double> a = m[0][0] - x, e = m[1][1] - x, i = m[2][2] - x;
  return a * (e * i - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * i - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - e * m[2][0]);
}

ConnectionResult edge(int from, int reached) {
  ConnectionResult r;
  r.from = from;
  r.reached = reached;
  r.verdict = ConnectionVerdict::Misrouted;
  return r;
}

}  // namespace

TEST_CASE("jacobian at lattice points") {
  const Params p{1.0, 0.1, -0.15};
  const auto j0 = jacobian({0, 0, 0}, p);
  for (int i = 0; i < 3; ++i) CHECK(j0[i][i] == doctest::Approx(1.2));
  const auto ja = jacobian({kPi, 0, 0}, p);
  CHECK(ja[0][0] == doctest::Approx(-0.8));
  CHECK(ja[1][1] == doctest::Approx(1.2));
  CHECK(ja[2][2] == doctest::Approx(-1.4));
  const auto fd = finite_difference_jacobian({kPi, 0, 0}, p);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) CHECK(std::abs(fd[i][k] - ja[i][k]) < 1e-6);
}

TEST_CASE("jacobian matches finite differences at random points") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ang(-3.2, 3.2), par(-2.0, 2.0);
  for (int n = 0; n < 200; ++n) {
    const Theta3 t{ang(rng), ang(rng), ang(rng)};
    const Params p{par(rng), par(rng), par(rng)};
    const auto j = jacobian(t, p), fd = finite_difference_jacobian(t, p);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) CHECK(std::abs(fd[i][k] - j[i][k]) < 1e-6);
  }
}

TEST_CASE("general eigenvalue solver") {
  const Mat3 rot = {{{0.0, -2.0, 0.0}, {2.0, 0.0, 0.0}, {0.0, 0.0, -1.5}}};
  const auto ev = eigenvalues(rot);
  CHECK(ev[0].real() == doctest::Approx(-1.5));
  CHECK(std::abs(std::abs(ev[1].imag()) - 2.0) < 1e-12);
  CHECK(std::abs(ev[1].real()) < 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 0; n < 50; ++n) {
    Mat3 m;
    for (auto& row : m)
      for (auto& v : row) v = u(rng);
    for (const auto& x : eigenvalues(m)) CHECK(std::abs(char_poly(m, x)) < 1e-9);
  }
}

TEST_CASE("equilibria reproduce the eigenvalue formulas") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> par(-2.0, 2.0);
  for (int n = 0; n < 100; ++n) {
    const Params p{par(rng), par(rng), par(rng)};
    for (const auto& e : equilibria(p)) {
      CHECK(e.field_norm < 1e-14);
      CHECK(e.max_table_deviation < 1e-12);
      CHECK(e.max_fd_deviation < 1e-6);
      CHECK(e.max_offdiagonal < 1e-14);
    }
    const auto qb = vertex_eigenvalues(kQb, p);
    CHECK(qb[0] == doctest::Approx(-p.u + 2 * p.epsilon));
    CHECK(qb[1] == doctest::Approx(-p.u + 2 * p.epsilon));
    CHECK(qb[2] == doctest::Approx(p.u + 2 * p.epsilon));
    const auto qab = vertex_eigenvalues(kQab, p);
    CHECK(qab[0] == doctest::Approx(p.u + 2 * p.epsilon));
    CHECK(qab[1] == doctest::Approx(-p.u + 2 * p.epsilon));
    CHECK(qab[2] == doctest::Approx(-p.u + 2 * p.epsilon));
  }
  CHECK(vertex_label(kQa) == "Q8~a");
  CHECK(vertex_label(3) == "(pi,pi,0)");
}

TEST_CASE("invariant surfaces") {
  const Params p{1.0, 0.1, -0.15};
  const auto r = invariant_surface_check(1, {0.3, 0.0, 0.2}, p, 100.0, 1e-12);
  CHECK(r.surface == "sin(theta2)");
  CHECK(r.max_drift < 1e-9);
  const auto at_eq = invariant_surface_check(0, vertex_location(kQb), p, 10.0, 1e-10);
  CHECK(at_eq.max_drift < 1e-15);
  CHECK_THROWS_AS(invariant_surface_check(0, {0.1, 0.0, 0.0}, p, 10.0, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(invariant_surface_check(3, {0.0, 0.0, 0.0}, p, 10.0, 1e-10), std::out_of_range);
}

TEST_CASE("cofactor identity") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ang(-3.2, 3.2), par(-2.0, 2.0);
  for (int n = 0; n < 1000; ++n) {
    const Theta3 t{ang(rng), ang(rng), ang(rng)};
    const Params p{par(rng), par(rng), par(rng)};
    for (int axis = 0; axis < 3; ++axis) CHECK(cofactor_residual(axis, t, p) < 1e-12);
  }
}

TEST_CASE("integration") {
  const Params p{-1.0, 0.1, -0.3};
  const auto still = integrate3(vertex_location(kOrigin), p, 20.0);
  for (const auto& x : still.x) CHECK(x == vertex_location(kOrigin));

  const double tol = 1e-10;
  const Theta3 s{0.4, 1.1, -0.7};
  const auto fwd = integrate3(s, p, 2.0, {tol});
  const auto back = integrate3_reversed(fwd.back(), p, 2.0, {tol});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(back.back()[i] - s[i]) < 10 * tol);

  // theta -> -theta maps trajectories to trajectories.
  const auto mirrored = integrate3({-s[0], -s[1], -s[2]}, p, 2.0, {tol});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mirrored.back()[i] + fwd.back()[i]) < 1e-8);

  const auto plane = integrate3({0.3, 0.9, 0.0}, p, 30.0, {tol});
  for (const auto& x : plane.x) CHECK(x[2] == 0.0);
  CHECK_THROWS_AS(integrate3(s, p, 0.0), std::invalid_argument);
}

TEST_CASE("shooting from a sink reports no unstable direction") {
  const Params p{0.0, -0.1, 0.0};
  const auto legs = find_connections(p, {}, table());
  REQUIRE(legs[0].attempts.size() == 1);
  CHECK(legs[0].attempts[0].verdict == ConnectionVerdict::NoUnstableDirection);
  CHECK_FALSE(legs[0].connected());
  ConnectionOptions bad;
  bad.delta = 0.1;
  CHECK_THROWS_AS(find_connections(p, bad, table()), std::invalid_argument);
}

TEST_CASE("shooting follows the saddle chain") {
  const Params p{1.0, 0.1, -0.15};
  const ConnectionOptions opt;
  const auto r = shoot(p, kQa, 1, +1, kQb, opt, table());
  CHECK(r.reached == 3);
  CHECK(r.verdict == ConnectionVerdict::Misrouted);
  CHECK(r.terminal_distance < opt.tol);
  // Along the arc only theta2 moves; the other two stay on their planes.
  for (const auto& x : r.arc.x) {
    CHECK(std::abs(std::sin(x[0])) < 1e-9);
    CHECK(std::abs(std::sin(x[2])) < 1e-9);
  }
  const auto again = shoot(p, kQa, 1, +1, kQb, opt, table());
  CHECK(again.arc.t == r.arc.t);
}

TEST_CASE("halving delta keeps terminal distances") {
  const Params p{1.0, 0.1, -0.15};
  ConnectionOptions opt;
  const auto g1 = connection_graph(p, opt, table());
  opt.delta /= 2;
  const auto g2 = connection_graph(p, opt, table());
  REQUIRE(g1.edges.size() == g2.edges.size());
  for (std::size_t k = 0; k < g1.edges.size(); ++k) {
    CHECK(g1.edges[k].reached == g2.edges[k].reached);
    if (g1.edges[k].reached >= 0) CHECK(g2.edges[k].terminal_distance < 10 * g1.edges[k].terminal_distance);
  }
}

TEST_CASE("cycle detection on a synthetic graph") {
  ConnectionGraph g;
  g.edges = {edge(kQa, kQab), edge(kQab, kQb), edge(kQb, kQa), edge(kQa, 3), edge(3, kQb), edge(kQb, kQab),
             edge(kQab, kQa)};
  const auto c = detect_cycle(g);
  REQUIRE(c);
  CHECK(c->visits_printed_order);
  CHECK(c->nodes == std::vector<int>{kQa, 3, kQb, kQab});
  REQUIRE(c->legs.size() == 4);
  CHECK(c->legs[0].from == kQa);
  CHECK(c->legs[0].reached == 3);

  ConnectionGraph reverse;
  reverse.edges = {edge(kQa, kQab), edge(kQab, kQb), edge(kQb, kQa)};
  const auto rc = detect_cycle(reverse);
  REQUIRE(rc);
  CHECK_FALSE(rc->visits_printed_order);
  CHECK(rc->nodes.size() == 3);

  ConnectionGraph none;
  none.edges = {edge(kQa, kOrigin), edge(kQb, kOrigin)};
  CHECK_FALSE(detect_cycle(none));
}

TEST_CASE("detected cycle in the unstable region") {
  const auto g = connection_graph({1.0, 0.1, -0.15}, {}, table());
  const auto c = detect_cycle(g);
  REQUIRE(c);
  CHECK(c->visits_printed_order);
  CHECK(c->nodes == std::vector<int>{kQa, 3, kQb, 6, kQab, 5});
}
