#include "doctest.h"

#include <random>

#include "q8/angles.hpp"
#include "q8/torus.hpp"

using namespace q8;
using namespace q8::torus;

namespace {

const group::GroupTable& table() {
  static const auto t = [] {
    auto [a, b] = group::printed_generators();
    return group::generate_group(a, b, 16);
  }();
  return t;
}

Phase16 random_phase(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  Phase16 p;
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace

TEST_CASE("phase shifts") {
  std::mt19937_64 rng(1);
  const auto p = random_phase(rng);
  CHECK(circular_distance(phase_shift(p, 0.0), p) == 0.0);
  CHECK(circular_distance(phase_shift(p, kTwoPi), p) < 1e-12);
  CHECK(circular_distance(phase_shift(phase_shift(p, kPi), kPi), p) < 1e-12);
  CHECK(circular_distance(group_phase_action(group::Perm16{}, 0.0, p), p) == 0.0);
}

TEST_CASE("action moves cell i to g(i)") {
  std::mt19937_64 rng(2);
  const auto p = random_phase(rng);
  const auto& a = table().a();
  const auto q = group_phase_action(a, 0.3, p);
  for (int i = 1; i <= group::kCells; ++i) CHECK(circular_distance(q[a(i) - 1], p[i - 1] + 0.3) < 1e-12);
}

TEST_CASE("fixed families of single generators") {
  const double p1 = 0.4, p2 = 1.7, p3 = -0.9;
  // The printed two-parameter family is not fixed by b^2: b^2 swaps cells 1
  // and 9, which carry 0 and p2.
  const auto b2 = table().evaluate("b^2");
  CHECK(b2(1) == 9);
  const Phase16 printed = {0, p1, 0, p1, 0, p1, 0, p1, p2, p3, p2, p3, p2, p3, p2, p3};
  CHECK(circular_distance(group_phase_action(b2, 0.0, printed), printed) > 1.0);
  Phase16 fixed{};
  for (int i = 1; i <= group::kCells; ++i) fixed[i - 1] = i < b2(i) ? 0.1 * i : fixed[b2(i) - 1];
  CHECK(circular_distance(group_phase_action(b2, 0.0, fixed), fixed) < 1e-15);

  // Constant on each orbit of <a> is fixed by (a, 0).
  Phase16 z8a{};
  const auto& a = table().a();
  for (int c = 5, k = 0; k < 8; ++k, c = a(c)) z8a[c - 1] = p3;
  CHECK(circular_distance(group_phase_action(a, 0.0, z8a), z8a) < 1e-15);
}

TEST_CASE("isotropy catalog") {
  const auto rows = isotropy_catalog(table());
  REQUIRE(rows.size() == printed_isotropy_table().size());
  CHECK(rows[0].entry.name == "Q8");
  CHECK(rows[0].verdict == RowVerdict::Verified);

  const auto& z2 = rows[13];
  CHECK(z2.entry.name == "Z2");
  CHECK(z2.entry.dim == 3);
  CHECK(z2.verdict == RowVerdict::Failed);
  CHECK(rows[5].verdict == RowVerdict::Verified);  // Z8^b, fixed by b

  bool duplicate_flagged = false;
  for (const auto& f : rows[3].flags) duplicate_flagged |= f.find("identical to row 3") != std::string::npos;
  CHECK(duplicate_flagged);

  for (const auto& r : rows) {
    INFO(r.entry.name);
    CHECK(r.corrected.has_value() == (r.verdict == RowVerdict::Failed));
    if (r.verdict != RowVerdict::Failed || !r.corrected->exists) continue;
    // Every corrected family is fixed by its generators.
    std::vector<double> prm(r.corrected->dim, 0.37);
    Phase16 x;
    for (int i = 0; i < group::kCells; ++i) x[i] = r.corrected->family[i].evaluate(prm);
    for (const auto& g : r.entry.generators) {
      CHECK(circular_distance(group_phase_action(table().evaluate(g.element), g.phase(), x), x) < 1e-12);
    }
  }
}

TEST_CASE("plane coordinates") {
  for (double v : embed({0, 0, 0})) CHECK(v == 0.0);
  const auto e1 = embed_unreduced({0.8, 0, 0});
  for (int i = 0; i < group::kCells; ++i) CHECK(std::abs(std::abs(e1[i]) - 0.1) < 1e-15);
  CHECK(e1[0] == doctest::Approx(-0.1));

  const auto pr = project(embed({1.0, 0.5, -0.2}));
  CHECK(pr.theta[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pr.theta[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pr.theta[2] == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(pr.residual < 1e-12);

  const auto only1 = project(embed_unreduced({0.6, 0, 0}));
  CHECK(only1.theta[0] == doctest::Approx(0.6));
  CHECK(std::abs(only1.theta[1]) < 1e-15);
  CHECK(std::abs(only1.theta[2]) < 1e-15);

  Phase16 off{};
  off[0] = 0.3;
  CHECK(project(off).residual > 0.1);
}

TEST_CASE("basis is orthogonal") {
  const auto& e = plane_basis();
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) {
      double d = 0.0;
      for (int i = 0; i < group::kCells; ++i) d += e[m][i] * e[n][i];
      CHECK(d == doctest::Approx(m == n ? 0.25 : 0.0));
    }
}

TEST_CASE("trigonometric and factored fields agree") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-4.0, 4.0), par(-2.0, 2.0);
  for (int k = 0; k < 500; ++k) {
    const Theta3 t{ang(rng), ang(rng), ang(rng)};
    const Params p{par(rng), par(rng), par(rng)};
    const auto a = reduced_field(t, p), b = factored_field(t, p);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }
}

TEST_CASE("field zeros and invariant planes") {
  const Params p{1.0, 0.1, -0.15};
  for (const Theta3& t : {Theta3{0, 0, 0}, Theta3{kPi, 0, 0}, Theta3{0, kPi, 0}, Theta3{0, 0, kPi}}) {
    for (double v : reduced_field(t, p)) CHECK(std::abs(v) < 1e-15);
  }
  for (double v : factored_field({0, 0, 0}, {1, 0.1, 0})) CHECK(v == 0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int k = 0; k < 50; ++k) CHECK(factored_field({0.0, ang(rng), ang(rng)}, p)[0] == 0.0);
}

TEST_CASE("plane symmetries commute with the reduced field") {
  const auto syms = plane_symmetries(table());
  REQUIRE_FALSE(syms.empty());
  CHECK(syms.front().element == "e");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  const Params p{-0.7, 0.2, 0.3};
  for (const auto& s : syms) {
    INFO(s.element);
    for (int k = 0; k < 20; ++k) {
      const Theta3 t{ang(rng), ang(rng), ang(rng)};
      Theta3 mt{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mt[i] += s.matrix[i][j] * t[j];
      const auto f = factored_field(t, p), fm = factored_field(mt, p);
      for (int i = 0; i < 3; ++i) {
        double mf = 0.0;
        for (int j = 0; j < 3; ++j) mf += s.matrix[i][j] * f[j];
        CHECK(std::abs(fm[i] - mf) < 1e-12);
      }
    }
  }
}
