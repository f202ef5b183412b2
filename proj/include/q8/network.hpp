#pragma once

// The 16-cell coupled system wired by the Cayley graph.
//
// Cell i carries a scalar state x_i and evolves as
//   x_i' = f(x_i) + eps * ( g(x_{A(i)}, x_i) + h(x_{B1(i)}, x_{B2(i)}) )
// where A, B1, B2 are right translations of the regular action: with g_i the
// group element sending cell 1 to cell i,
//   A(i) = g_i(a^-1(1)),  B1(i) = g_i(b(1)),  B2(i) = g_i(b^2(1)).
// Right translations commute with every left translation, which makes the
// field equivariant under all 16 group elements. For cell 1 this gives
// g(x12, x1) + h(x5, x9).

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "q8/group.hpp"
#include "q8/ode.hpp"

namespace q8::network {

using State = ode::Vec<group::kCells>;
using Trajectory = ode::Trajectory<group::kCells>;

using CellFn = std::function<double(double)>;
using PairFn = std::function<double(double, double)>;

struct CouplingSpec {
  CellFn f;
  PairFn g;
  PairFn h;
  std::string f_name = "custom";
  std::string g_name = "custom";
  std::string h_name = "custom";

  // Probes f, g, h on a grid over [-2, 2]^2; throws std::invalid_argument on
  // a missing callable or a non-finite value.
  void validate() const;
};

// Built-in families:
//   f: "zero", "identity" (x), "decay" (-x), "bistable" (x - x^3),
//      "phase" (omega + alpha sin x, omega = 1, alpha = 0.5)
//   g, h: "zero", "diffusive" (y - x), "sine" (sin(y - x)),
//         "mixed" (0.3 y x^2 + sin y - 0.2 x)
CellFn builtin_cell(const std::string& name);
PairFn builtin_pair(const std::string& name);
CouplingSpec builtin_coupling(const std::string& f, const std::string& g, const std::string& h);
std::vector<std::string> builtin_cell_names();
std::vector<std::string> builtin_pair_names();

struct Wiring {
  std::array<int, group::kCells> g_source{};   // 1-based
  std::array<int, group::kCells> h_first{};
  std::array<int, group::kCells> h_second{};
};

Wiring derive_wiring(const group::CayleyGraph& graph);

class EquivarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CouplingOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CellNetwork {
 public:
  CellNetwork(group::CayleyGraph graph, CouplingSpec coupling, double epsilon);

  const Wiring& wiring() const { return wiring_; }
  const group::CayleyGraph& graph() const { return graph_; }
  const CouplingSpec& coupling() const { return coupling_; }
  double epsilon() const { return epsilon_; }
  // Left translations of the regular action, one per node.
  const std::array<group::Perm16, group::kCells>& symmetries() const { return symmetries_; }

  // Throws CouplingOverflow on a non-finite component.
  State operator()(const State& x) const;

 private:
  group::CayleyGraph graph_;
  CouplingSpec coupling_;
  double epsilon_;
  Wiring wiring_;
  std::array<group::Perm16, group::kCells> symmetries_;
};

// Builds the network and rejects it with EquivarianceError when the field
// fails the equivariance check beyond 1e-9 on deterministic sample states.
CellNetwork build_network(const group::CayleyGraph& graph, CouplingSpec coupling,
                          double epsilon = 1.0);

State vector_field(const CellNetwork& net, const State& x);

// (γx)_{γ(i)} = x_i
State act(const group::Perm16& gamma, const State& x);

// max over elements and states of |F(γx) - γF(x)|_inf
double equivariance_residual(const CellNetwork& net, std::span<const group::Perm16> elements,
                             std::span<const State> states);

// Deterministic states with components uniform in [lo, hi).
std::vector<State> random_states(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                 double hi = 1.0);

struct SimulationOptions {
  double t_end = 10.0;
  double tol = 1e-8;
};

// Adaptive integration; throws ode::StepUnderflow with the failing time.
Trajectory simulate(const CellNetwork& net, const State& x0, const SimulationOptions& opt);

// Printed wiring row for one cell: g(x_p, x_q) + h(x_r, x_s).
struct PrintedWiringRow {
  int cell;
  std::array<int, 2> g_args;
  std::array<int, 2> h_args;
};

const std::vector<PrintedWiringRow>& printed_wiring_rows();

std::vector<group::AuditRow> audit_wiring(const CellNetwork& net);

}  // namespace q8::network
