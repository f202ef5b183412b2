#pragma once

// The reduced three-dimensional flow: Jacobians and equilibria, invariant
// surfaces, and shooting of heteroclinic connections between the equilibria
// on the lattice {0, π}^3.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "q8/group.hpp"
#include "q8/ode.hpp"
#include "q8/torus.hpp"

namespace q8::dynamics {

using torus::Params;
using torus::Theta3;
using Mat3 = std::array<std::array<double, 3>, 3>;
using Trajectory3 = ode::Trajectory<3>;

Mat3 jacobian(const Theta3& t, const Params& prm);
// Central differences of the factored field.
Mat3 finite_difference_jacobian(const Theta3& t, const Params& prm, double step = 1e-6);

// Eigenvalues of a general real 3x3 matrix (real Schur form).
std::array<std::complex<double>, 3> eigenvalues(const Mat3& m);

// Lattice points {0, π}^3, indexed by bits (bit k set <=> θ_{k+1} = π).
inline constexpr int kVertices = 8;
inline constexpr int kOrigin = 0;
inline constexpr int kQa = 1;   // (π, 0, 0)
inline constexpr int kQb = 2;   // (0, π, 0)
inline constexpr int kQab = 4;  // (0, 0, π)

Theta3 vertex_location(int v);
std::string vertex_label(int v);
// Diagonal of the Jacobian at a lattice point.
std::array<double, 3> vertex_eigenvalues(int v, const Params& prm);

struct EigenFormulaRow {
  std::string isotropy;
  int vertex;
  std::array<std::string, 3> formulas;
};

const std::array<EigenFormulaRow, 4>& eigenvalue_formulas();
// The printed eigenvalue formulas evaluated at prm.
std::array<double, 3> formula_eigenvalues(std::size_t row, const Params& prm);

struct EquilibriumInfo {
  std::string isotropy_name;
  Theta3 location{};
  Mat3 jacobian{};
  std::array<double, 3> eigenvalues{};  // diagonal, axis order θ1, θ2, θ3
  std::array<double, 3> table_values{};
  double field_norm = 0.0;
  double max_table_deviation = 0.0;
  double max_fd_deviation = 0.0;
  double max_offdiagonal = 0.0;
};

std::array<EquilibriumInfo, 4> equilibria(const Params& prm);

struct IntegrationOptions {
  double tol = 1e-10;
};

// Adaptive integration of the factored field in the universal cover.
Trajectory3 integrate3(const Theta3& start, const Params& prm, double T,
                       const IntegrationOptions& opt = {});
Trajectory3 integrate3_reversed(const Theta3& start, const Params& prm, double T,
                                const IntegrationOptions& opt = {});

// X h - K h for h = sin θ_axis with K as in the invariance proof, evaluated
// with the trigonometric form of the field.
double cofactor_residual(int axis, const Theta3& t, const Params& prm);

struct InvariantResidual {
  int axis = 0;
  std::string surface;  // "sin(theta1)" ...
  double max_drift = 0.0;
  double max_cofactor_residual = 0.0;
};

// Requires |sin θ_axis(start)| < 1e-12; throws std::invalid_argument otherwise.
InvariantResidual invariant_surface_check(int axis, const Theta3& start, const Params& prm,
                                          double T, double tol);

enum class ConnectionVerdict { Connected, Misrouted, Timeout, Diverged, NoUnstableDirection };
std::string_view to_string(ConnectionVerdict v);

struct ConnectionOptions {
  double delta = 1e-4;
  double tol = 1e-4;
  double t_max = 500.0;
  double integrator_tol = 1e-10;
};

struct ConnectionResult {
  int from = 0;
  int to = 0;       // intended target
  int reached = -1;  // lattice point approached, -1 if none
  int axis = -1;     // departure axis (0-based)
  int sign = 0;
  double departure_eigenvalue = 0.0;
  double seed_offset = 0.0;
  Trajectory3 arc;
  double terminal_distance = 0.0;
  ConnectionVerdict verdict = ConnectionVerdict::Timeout;
  std::vector<std::string> conjugates_of_target;
};

// Lattice points equivalent to v under the plane symmetries of the table.
std::vector<int> conjugate_vertices(int v, const group::GroupTable& t);

// Integrates from vertex `from` displaced by sign*delta along `axis` until it
// enters the tol-ball of a lattice point other than the start region.
ConnectionResult shoot(const Params& prm, int from, int axis, int sign, int target,
                       const ConnectionOptions& opt, const group::GroupTable& t);

struct LegReport {
  int from = 0;
  int to = 0;
  std::vector<ConnectionResult> attempts;
  bool connected() const;
};

// The three legs Q8~a -> Q8~b -> Q8~ab -> Q8~a, each tried along every
// positive-eigenvalue axis in both directions.
std::array<LegReport, 3> find_connections(const Params& prm, const ConnectionOptions& opt,
                                          const group::GroupTable& t);

struct ConnectionGraph {
  Params prm;
  // One shot per (vertex, positive axis), positive direction.
  std::vector<ConnectionResult> edges;
};

ConnectionGraph connection_graph(const Params& prm, const ConnectionOptions& opt,
                                 const group::GroupTable& t);

struct DetectedCycle {
  std::vector<int> nodes;                // cycle order, starting at the first node
  std::vector<ConnectionResult> legs;    // legs[i]: nodes[i] -> nodes[i+1]
  bool visits_printed_order = false;     // Q8~a, Q8~b, Q8~ab appear in this cyclic order
};

// Deterministic choice among the simple cycles of the graph: cycles through
// Q8~a, Q8~b, Q8~ab in printed cyclic order first, then fewest nodes, then
// lexicographic node sequence starting at the smallest index.
std::optional<DetectedCycle> detect_cycle(const ConnectionGraph& g);

}  // namespace q8::dynamics
