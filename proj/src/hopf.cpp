#include "q8/hopf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "q8/angles.hpp"
#include "q8/random.hpp"

namespace q8::hopf {

namespace {

const cplx kI{0.0, 1.0};

Mat2 generator(std::string_view name) {
  if (name == "a") {
    const cplx w = std::polar(1.0, kPi / 4.0);
    return {w, 0, 0, std::conj(w)};
  }
  if (name == "b") return {0, -1, 1, 0};
  if (name == "kappa" || name == "k") return {0, 1, 1, 0};
  if (name == "rho" || name == "r") return {kI, 0, 0, -kI};
  if (name == "Id" || name == "e") return {};
  throw std::invalid_argument("unknown symmetry '" + std::string(name) + "'");
}

Mat2 matrix_power(const Mat2& m, int k) {
  Mat2 r;
  for (int i = 0; i < k; ++i) r = m * r;
  return r;
}

ComplexPair phase_shift(const ComplexPair& z, double phi) {
  const cplx e = std::polar(1.0, phi);
  return {e * z.plus, e * z.minus};
}

}  // namespace

double distance(const ComplexPair& x, const ComplexPair& y) {
  return std::max(std::abs(x.plus - y.plus), std::abs(x.minus - y.minus));
}

Mat2 symmetry_matrix(std::string_view word) {
  Mat2 result;
  std::size_t pos = 0;
  auto starts = [&](std::string_view tok) { return word.substr(pos, tok.size()) == tok; };
  while (pos < word.size()) {
    if (std::isspace(static_cast<unsigned char>(word[pos])) || word[pos] == '*') {
      ++pos;
      continue;
    }
    std::string_view tok;
    for (std::string_view t : {"kappa", "rho", "Id", "a", "b", "k", "r", "e"}) {
      if (starts(t)) {
        tok = t;
        break;
      }
    }
    if (tok.empty()) throw std::invalid_argument("unknown symmetry in '" + std::string(word) + "'");
    pos += tok.size();
    int exp = 1;
    if (pos < word.size() && word[pos] == '^') {
      ++pos;
      if (pos >= word.size() || !std::isdigit(static_cast<unsigned char>(word[pos]))) {
        throw std::invalid_argument("bad exponent in '" + std::string(word) + "'");
      }
      exp = 0;
      while (pos < word.size() && std::isdigit(static_cast<unsigned char>(word[pos]))) {
        exp = exp * 10 + (word[pos++] - '0');
      }
    }
    result = result * matrix_power(generator(tok), exp);
  }
  return result;
}

ComplexPair act(std::string_view word, const ComplexPair& z, double phi) {
  return phase_shift(symmetry_matrix(word)(z), phi);
}

std::vector<KernelCheck> kernel_check(int samples, unsigned long long seed) {
  std::vector<KernelCheck> out;
  for (auto [word, phase] : {std::pair<const char*, double>{"a^4", kPi}, {"rho^2", kPi}, {"a^2", kPi}}) {
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      CounterRng rng(seed, static_cast<std::uint64_t>(s));
      ComplexPair z{{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
      worst = std::max(worst, distance(act(word, z, phase), z));
    }
    out.push_back({word, phase, worst, worst < 1e-14});
  }
  return out;
}

ComplexPair normal_form(const ComplexPair& z, const HopfCoeffs& c) {
  const cplx z1 = z.plus, z2 = z.minus;
  const cplx c1 = std::conj(z1), c2 = std::conj(z2);
  auto p = [](cplx x, int k) {
    cplx r{1.0};
    for (int i = 0; i < k; ++i) r *= x;
    return r;
  };
  return {c.A * z1 + c.B * z1 * z1 * c1 + c.C * p(c1, 3) * p(z2, 4) + c.D * p(z1, 5) * p(c2, 4),
          c.A * z2 + c.B * z2 * z2 * c2 + c.C * p(z1, 4) * p(c2, 3) + c.D * p(c1, 4) * p(z2, 5)};
}

std::vector<EquivarianceCheck> normal_form_equivariance(const HopfCoeffs& c, int samples,
                                                        unsigned long long seed) {
  std::vector<EquivarianceCheck> out;
  for (const char* word : {"kappa", "rho", "a", "b", "R_phi"}) {
    const bool shift = std::string_view(word) == "R_phi";
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      CounterRng rng(seed, static_cast<std::uint64_t>(s));
      auto coord = [&] { return 0.7 * (2.0 * rng.uniform() - 1.0); };
      const ComplexPair z{{coord(), coord()}, {coord(), coord()}};
      const double phi = shift ? kTwoPi * rng.uniform() : 0.0;
      const std::string_view g = shift ? "Id" : word;
      worst = std::max(worst, distance(normal_form(act(g, z, phi), c), act(g, normal_form(z, c), phi)));
    }
    out.push_back({word, worst});
  }
  return out;
}

std::array<Condition, 5> nondegeneracy(const HopfCoeffs& c) {
  auto cond = [](std::string name, std::string expr, double v) {
    return Condition{std::move(name), std::move(expr), v, v != 0.0};
  };
  return {cond("(a)", "Re(A_N + B)", std::real(c.A_N + c.B)),
          cond("(b)", "Re(B)", std::real(c.B)),
          cond("(c)", "Re(2A_N + B)", std::real(2.0 * c.A_N + c.B)),
          cond("(d)", "Re(B conj(C))", std::real(c.B * std::conj(c.C))),
          cond("(e)", "Re(A_lambda)", std::real(c.A_lambda))};
}

std::string_view to_string(Criticality c) {
  switch (c) {
    case Criticality::Super: return "supercritical";
    case Criticality::Sub: return "subcritical";
    case Criticality::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

Criticality criticality_of(double radial) {
  if (radial > 0.0) return Criticality::Super;
  if (radial < 0.0) return Criticality::Sub;
  return Criticality::Inconclusive;
}

Stability from_bool(bool stable) { return stable ? Stability::Stable : Stability::Unstable; }

BranchReport two_block_branch(const HopfCoeffs& c, double det_sign) {
  const double radial = std::real(2.0 * c.A_N + c.B);
  const double trace = std::real(c.B);
  const double bc = std::real(c.B * std::conj(c.C));
  const double det = det_sign * bc;

  BranchReport r;
  r.eigen_signs = {{"Re(2A_N + B)", radial},
                   {"trace = Re(B)", trace},
                   {det_sign < 0 ? "det = -Re(B conj(C))" : "det = Re(B conj(C))", det}};
  r.criticality = criticality_of(radial);
  if (radial == 0.0 || trace == 0.0 || bc == 0.0) {
    r.note = "nondegeneracy (b), (c) or (d) fails";
    return r;
  }
  // Radial sign in the same convention as the rotating-wave row; the
  // transverse 2x2 block is stable when trace < 0 and det > 0.
  r.stability = from_bool(radial > 0.0 && trace < 0.0 && det > 0.0);
  r.sign_rule = from_bool(radial > 0.0 && trace > 0.0 && 2.0 * bc < 0.0);
  if (r.stability != r.sign_rule) {
    r.note = "block trace test and the literal Re(B) > 0 condition disagree";
  }
  return r;
}

}  // namespace

std::array<BranchReport, 3> classify_branches(const HopfCoeffs& c) {
  BranchReport rot;
  rot.orbit_type = "(a,0)";
  rot.isotropy_q8 = "Z8~a";
  rot.isotropy_d8 = "Z8~(rho)";
  rot.branching_equation = "A + B a^2 = 0";
  const double radial = std::real(c.A_N + c.B);
  const double reb = std::real(c.B);
  rot.eigen_signs = {{"Re(A_N + B)", radial}, {"-Re(B)", -reb}, {"-Re(B)", -reb}};
  rot.criticality = criticality_of(radial);
  if (radial != 0.0 && reb != 0.0) {
    rot.stability = from_bool(radial > 0.0 && reb < 0.0);
    rot.sign_rule = rot.stability;
  } else {
    rot.note = "nondegeneracy (a) or (b) fails";
  }

  BranchReport edge = two_block_branch(c, -1.0);
  edge.orbit_type = "(a,a)";
  edge.isotropy_q8 = "Z8~b";
  edge.isotropy_d8 = "Z2~(rho^2) x Z2~(kappa)";
  edge.branching_equation = "A + B a^2 + C a^6 + D a^8 = 0";

  BranchReport vertex = two_block_branch(c, +1.0);
  vertex.orbit_type = "(a,e^{i pi/4}a)";
  vertex.isotropy_q8 = "Z8~c";
  vertex.isotropy_d8 = "Z2~(rho^2) x Z2~(rho kappa)";
  vertex.branching_equation = "A + B a^2 - C a^6 - D a^8 = 0";

  return {rot, edge, vertex};
}

namespace {

struct D8Element {
  std::string word;
  Mat2 m;
};

std::vector<D8Element> d8_elements() {
  std::vector<D8Element> out;
  for (int k = 0; k < 4; ++k) {
    std::string rk = k == 0 ? "Id" : (k == 1 ? "rho" : "rho^" + std::to_string(k));
    out.push_back({rk, symmetry_matrix(rk)});
    std::string rkk = k == 0 ? "kappa" : rk + " kappa";
    out.push_back({rkk, symmetry_matrix(rkk)});
  }
  return out;
}

// Phase phi with R_phi(M z) = z, if any.
std::optional<double> solve_phase(const Mat2& m, const ComplexPair& z) {
  const ComplexPair w = m(z);
  const cplx& src = std::abs(w.plus) >= std::abs(w.minus) ? w.plus : w.minus;
  const cplx& dst = std::abs(w.plus) >= std::abs(w.minus) ? z.plus : z.minus;
  if (std::abs(src) < 1e-300) return std::nullopt;
  double phi = std::arg(dst / src);
  if (distance(phase_shift(w, phi), z) > 1e-12 * (1.0 + std::abs(z.plus) + std::abs(z.minus))) {
    return std::nullopt;
  }
  double r = wrap_2pi(phi);
  if (kTwoPi - r < 1e-12) r = 0.0;
  return r;
}

}  // namespace

std::vector<IsotropyRowC2> isotropy_table_c2() {
  using Family = ComplexPair (*)(cplx, cplx);
  struct Spec {
    IsotropyRowC2 row;
    Family family;
  };
  std::vector<Spec> specs = {
      {{"Q8xS1", "D8xS1", "(0,0)", 0, "Trivial solution",
        {{"kappa", 0.0}, {"rho", 0.0}, {"Id", 1.0}}},
       [](cplx, cplx) { return ComplexPair{0, 0}; }},
      {{"Z8~a", "Z8~(rho)", "(z,0)", 1, "Rotating Wave", {{"rho", -kPi / 2}}},
       [](cplx z, cplx) { return ComplexPair{z, 0}; }},
      {{"Z8~b", "Z2~(rho^2) x Z2~(kappa)", "(z,z)", 1, "Edge Solution",
        {{"kappa", 0.0}, {"rho^2", kPi}}},
       [](cplx z, cplx) { return ComplexPair{z, z}; }},
      {{"Z8~c", "Z2~(rho^2) x Z2~(rho kappa)", "(z,iz)", 1, "Vertex Oscillation",
        {{"rho kappa", kPi}, {"rho^2", kPi}}},
       [](cplx z, cplx) { return ComplexPair{z, kI * z}; }},
      {{"Z2~", "Z2~(rho^2)", "(w,z)", 2, "Submaximal", {{"rho^2", kPi}}},
       [](cplx z, cplx w) { return ComplexPair{w, z}; }},
  };

  std::vector<cplx> grid;
  for (double re : {-1.3, -0.4, 0.7, 1.9})
    for (double im : {-0.8, 0.3, 1.1}) grid.emplace_back(re, im);

  const auto elements = d8_elements();
  std::vector<IsotropyRowC2> out;
  for (auto& [row, family] : specs) {
    double worst = 0.0;
    for (const auto& g : row.generators) {
      const Mat2 m = symmetry_matrix(g.element);
      for (cplx z : grid)
        for (cplx w : grid) {
          const ComplexPair p = family(z, w);
          worst = std::max(worst, distance(phase_shift(m(p), g.phase), p));
        }
    }
    row.max_residual = worst;
    row.generators_fix_family = worst < 1e-12;

    const ComplexPair generic = family({0.83, -0.41}, {-0.27, 1.37});
    if (std::abs(generic.plus) == 0.0 && std::abs(generic.minus) == 0.0) {
      row.scan_unbounded = true;
      for (const auto& e : elements) row.scanned_isotropy.push_back({e.word, 0.0});
    } else {
      for (const auto& e : elements) {
        if (auto phi = solve_phase(e.m, generic)) row.scanned_isotropy.push_back({e.word, *phi});
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace q8::hopf
