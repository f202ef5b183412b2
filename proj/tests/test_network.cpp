#include "doctest.h"

#include <cmath>

#include "q8/network.hpp"

using namespace q8;
using namespace q8::network;

namespace {

const group::GroupTable& table() {
  static const auto t = [] {
    auto [a, b] = group::printed_generators();
    return group::generate_group(a, b, 16);
  }();
  return t;
}

CellNetwork make(const std::string& f, const std::string& g, const std::string& h, double eps) {
  return build_network(group::build_cayley_graph(table()), builtin_coupling(f, g, h), eps);
}

}  // namespace

TEST_CASE("wiring of cell one") {
  const auto net = make("decay", "diffusive", "mixed", 1.0);
  CHECK(net.wiring().g_source[0] == 12);
  CHECK(net.wiring().h_first[0] == 5);
  CHECK(net.wiring().h_second[0] == 9);
}

TEST_CASE("wiring is given by right translations") {
  const auto net = make("decay", "diffusive", "mixed", 1.0);
  const auto& t = table();
  const auto a_inv = t.a().inverse();
  const auto& b = t.b();
  const auto b2 = group::compose(b, b);
  for (const auto& g : t.elements()) {
    const int i = g(1);
    CHECK(net.wiring().g_source[i - 1] == g(a_inv(1)));
    CHECK(net.wiring().h_first[i - 1] == g(b(1)));
    CHECK(net.wiring().h_second[i - 1] == g(b2(1)));
  }
}

TEST_CASE("field equivariance under all elements") {
  const auto states = random_states(100, 42);
  for (const auto* g : {"diffusive", "sine", "mixed"}) {
    for (const auto* h : {"diffusive", "sine", "mixed"}) {
      const auto net = make("bistable", g, h, 0.7);
      CHECK(equivariance_residual(net, table().elements(), states) < 1e-9);
    }
  }
}

TEST_CASE("field equivariance by direct evaluation") {
  const auto net = make("bistable", "sine", "mixed", 1.3);
  const auto x = random_states(1, 5).front();
  const auto& a = table().a();
  const auto lhs = net(act(a, x));
  const auto fx = net(x);
  for (int i = 1; i <= group::kCells; ++i) CHECK(std::abs(lhs[a(i) - 1] - fx[i - 1]) < 1e-12);
}

TEST_CASE("decoupled and homogeneous cases") {
  const auto x = random_states(1, 9).front();
  const auto id = make("identity", "zero", "zero", 1.0)(x);
  for (int i = 0; i < group::kCells; ++i) CHECK(id[i] == x[i]);

  State ones;
  ones.fill(1.0);
  const auto eq = make("bistable", "zero", "zero", 1.0)(ones);
  for (double v : eq) CHECK(v == 0.0);

  State c;
  c.fill(0.37);
  const auto hom = make("bistable", "sine", "mixed", 0.9)(c);
  for (double v : hom) CHECK(v == doctest::Approx(hom[0]).epsilon(1e-15));
}

TEST_CASE("uncoupled decay follows exp(-t)") {
  const auto net = make("decay", "diffusive", "mixed", 0.0);
  const auto x0 = random_states(1, 3).front();
  const auto tr = simulate(net, x0, {5.0, 1e-10});
  for (int i = 0; i < group::kCells; ++i) CHECK(std::abs(tr.back()[i] - x0[i] * std::exp(-5.0)) < 1e-8);
}

TEST_CASE("uncoupled phase oscillators advance independently") {
  const auto net = make("phase", "sine", "sine", 0.0);
  auto x0 = random_states(1, 4).front();
  const auto base = simulate(net, x0, {10.0, 1e-10});
  x0[7] += 0.5;
  const auto moved = simulate(net, x0, {10.0, 1e-10});
  for (int i = 0; i < group::kCells; ++i) {
    if (i == 7) continue;
    CHECK(std::abs(base.back()[i] - moved.back()[i]) < 1e-8);
  }
  // omega + alpha sin x with omega > alpha never stalls.
  for (int i = 0; i < group::kCells; ++i) CHECK(base.back()[i] - base.x.front()[i] > 5.0);
}

TEST_CASE("flow equivariance by double integration") {
  const auto net = make("bistable", "sine", "mixed", 0.5);
  const auto x0 = random_states(1, 11).front();
  const SimulationOptions opt{10.0, 1e-10};
  const auto base = simulate(net, x0, opt);
  for (const auto& g : table().elements()) {
    const auto moved = simulate(net, act(g, x0), opt);
    const auto expect = act(g, base.back());
    for (int i = 0; i < group::kCells; ++i) CHECK(std::abs(moved.back()[i] - expect[i]) < 1e-6);
  }
}

TEST_CASE("wiring audit") {
  const auto net = make("decay", "diffusive", "mixed", 1.0);
  const auto rows = audit_wiring(net);
  CHECK(rows.size() == 16);
  int mismatches = 0;
  for (const auto& r : rows) mismatches += r.verdict != group::Verdict::Match;
  CHECK(mismatches > 0);

  // A relabelled graph moves every source away from the printed rows.
  const auto shuffle = group::Perm16::from_cycles("(1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16)");
  const auto shuffled = build_network(group::build_cayley_graph(table()).relabeled(shuffle),
                                      builtin_coupling("decay", "diffusive", "mixed"), 1.0);
  for (const auto& r : audit_wiring(shuffled)) CHECK(r.verdict != group::Verdict::Match);
}

TEST_CASE("rejections") {
  CHECK_THROWS_AS(builtin_cell("nope"), std::invalid_argument);
  CHECK_THROWS_AS(builtin_pair("nope"), std::invalid_argument);
  CouplingSpec broken = builtin_coupling("decay", "diffusive", "mixed");
  broken.g = nullptr;
  CHECK_THROWS(build_network(group::build_cayley_graph(table()), broken));
  const auto net = make("identity", "zero", "zero", 1.0);
  CHECK_THROWS(simulate(net, random_states(1, 1).front(), {-1.0, 1e-8}));
}
