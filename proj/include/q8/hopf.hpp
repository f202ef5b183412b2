#pragma once

// Hopf bifurcation at the level of the C^2 representation: the linear group
// actions, the equivariant normal form truncated at origin coefficients, the
// nondegeneracy conditions and the branch classification.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace q8::hopf {

using cplx = std::complex<double>;

struct ComplexPair {
  cplx plus;
  cplx minus;
};

double distance(const ComplexPair& x, const ComplexPair& y);

struct Mat2 {
  cplx m00{1}, m01{0}, m10{0}, m11{1};

  ComplexPair operator()(const ComplexPair& z) const {
    return {m00 * z.plus + m01 * z.minus, m10 * z.plus + m11 * z.minus};
  }
  Mat2 operator*(const Mat2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }
};

// Generators: "a" = diag(w, conj w), w = exp(i pi/4); "b": (z+, z-) -> (-z-, z+);
// "kappa" (or "k"): swap; "rho" (or "r"): (i z+, -i z-); "Id". Tokens may be
// concatenated or space separated and carry "^n". The leftmost token acts
// last. Throws std::invalid_argument on unknown names.
Mat2 symmetry_matrix(std::string_view word);

// Applies `word` and then the phase shift R_phi.
ComplexPair act(std::string_view word, const ComplexPair& z, double phi = 0.0);

struct KernelCheck {
  std::string element;
  double phase;
  double max_residual;
  bool identity;
};

// (a^4, pi) and (rho^2, pi) act trivially; (a^2, pi) is a negative control.
std::vector<KernelCheck> kernel_check(int samples = 50, unsigned long long seed = 7);

struct HopfCoeffs {
  cplx A{0}, B{0}, C{0}, D{0};
  cplx A_N{0};
  cplx A_lambda{0};
};

// A z + B (z1^2 conj z1, z2^2 conj z2) + C (conj z1^3 z2^4, z1^4 conj z2^3)
//     + D (z1^5 conj z2^4, conj z1^4 z2^5)
ComplexPair normal_form(const ComplexPair& z, const HopfCoeffs& c);

struct EquivarianceCheck {
  std::string element;  // "kappa", "rho", "a", "b" or "R_phi"
  double max_residual;
};

// |N(g z) - g N(z)| over random z with components in the unit box, for the
// generators and random phase shifts.
std::vector<EquivarianceCheck> normal_form_equivariance(const HopfCoeffs& c, int samples = 100,
                                                        unsigned long long seed = 11);

struct Condition {
  std::string name;        // "(a)".."(e)"
  std::string expression;  // e.g. "Re(A_N + B)"
  double value;
  bool holds;              // value != 0
};

std::array<Condition, 5> nondegeneracy(const HopfCoeffs& c);

enum class Criticality { Super, Sub, Inconclusive };
enum class Stability { Stable, Unstable, Inconclusive };
std::string_view to_string(Criticality c);
std::string_view to_string(Stability s);

struct EigenSign {
  std::string expression;
  double value;
};

struct BranchReport {
  std::string orbit_type;  // "(a,0)", "(a,a)", "(a,e^{i pi/4}a)"
  std::string isotropy_q8;
  std::string isotropy_d8;
  std::string branching_equation;
  Criticality criticality = Criticality::Inconclusive;
  Stability stability = Stability::Inconclusive;
  // Stability read off the theorem's inequalities without the 2x2 block
  // trace test; differs from `stability` only when Re(B) > 0.
  Stability sign_rule = Stability::Inconclusive;
  std::vector<EigenSign> eigen_signs;
  std::string note;
};

// Always three branches: rotating wave, edge, vertex.
std::array<BranchReport, 3> classify_branches(const HopfCoeffs& c);

struct IsotropyGenerator {
  std::string element;  // D8 word
  double phase;
};

struct IsotropyRowC2 {
  std::string q8_isotropy;
  std::string d8_isotropy;
  std::string fix;
  int dim_c;
  std::string name;
  std::vector<IsotropyGenerator> generators;
  bool generators_fix_family = false;
  double max_residual = 0.0;
  // Elements (word, phase) of D8 x S1 fixing a generic sample of the family,
  // found by exhaustive scan with the phase solved per element.
  std::vector<IsotropyGenerator> scanned_isotropy;
  bool scan_unbounded = false;  // the origin is fixed by every phase
};

std::vector<IsotropyRowC2> isotropy_table_c2();

}  // namespace q8::hopf
