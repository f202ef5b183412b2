#include "q8/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "q8/random.hpp"

namespace q8::network {

using group::kCells;
using group::Perm16;

void CouplingSpec::validate() const {
  if (!f || !g || !h) throw std::invalid_argument("CouplingSpec: f, g and h are required");
  for (int i = 0; i <= 8; ++i) {
    double x = -2.0 + 0.5 * i;
    if (!std::isfinite(f(x))) throw std::invalid_argument("CouplingSpec: f is not finite at " + std::to_string(x));
    for (int j = 0; j <= 8; ++j) {
      double y = -2.0 + 0.5 * j;
      if (!std::isfinite(g(x, y)) || !std::isfinite(h(x, y))) {
        throw std::invalid_argument("CouplingSpec: g or h is not finite on the probe grid");
      }
    }
  }
}

CellFn builtin_cell(const std::string& name) {
  if (name == "zero") return [](double) { return 0.0; };
  if (name == "identity") return [](double x) { return x; };
  if (name == "decay") return [](double x) { return -x; };
  if (name == "bistable") return [](double x) { return x - x * x * x; };
  if (name == "phase") return [](double x) { return 1.0 + 0.5 * std::sin(x); };
  throw std::invalid_argument("unknown cell dynamics '" + name + "'");
}

PairFn builtin_pair(const std::string& name) {
  if (name == "zero") return [](double, double) { return 0.0; };
  if (name == "diffusive") return [](double y, double x) { return y - x; };
  if (name == "sine") return [](double y, double x) { return std::sin(y - x); };
  if (name == "mixed") {
    return [](double y, double x) { return 0.3 * y * x * x + std::sin(y) - 0.2 * x; };
  }
  throw std::invalid_argument("unknown coupling '" + name + "'");
}

std::vector<std::string> builtin_cell_names() {
  return {"zero", "identity", "decay", "bistable", "phase"};
}

std::vector<std::string> builtin_pair_names() { return {"zero", "diffusive", "sine", "mixed"}; }

CouplingSpec builtin_coupling(const std::string& f, const std::string& g, const std::string& h) {
  CouplingSpec c{builtin_cell(f), builtin_pair(g), builtin_pair(h), f, g, h};
  c.validate();
  return c;
}

Wiring derive_wiring(const group::CayleyGraph& graph) {
  graph.validate();
  const auto elems = graph.node_elements();
  // Neighbours of node 1 along the generator edges.
  int a_pred_of_1 = 0;
  for (auto [from, to] : graph.a_edges) {
    if (to == 1) a_pred_of_1 = from;
  }
  const int b_of_1 = graph.b_successor(1);
  const int bb_of_1 = graph.b_successor(b_of_1);

  Wiring w;
  for (int i = 1; i <= kCells; ++i) {
    const Perm16& gi = elems[i - 1];
    w.g_source[i - 1] = gi(a_pred_of_1);
    w.h_first[i - 1] = gi(b_of_1);
    w.h_second[i - 1] = gi(bb_of_1);
  }
  return w;
}

CellNetwork::CellNetwork(group::CayleyGraph graph, CouplingSpec coupling, double epsilon)
    : graph_(std::move(graph)),
      coupling_(std::move(coupling)),
      epsilon_(epsilon),
      wiring_(derive_wiring(graph_)),
      symmetries_(graph_.node_elements()) {
  coupling_.validate();
  if (!std::isfinite(epsilon_)) throw std::invalid_argument("CellNetwork: epsilon must be finite");
}

State CellNetwork::operator()(const State& x) const {
  State dx{};
  for (int i = 0; i < kCells; ++i) {
    double coupling = coupling_.g(x[wiring_.g_source[i] - 1], x[i]) +
                      coupling_.h(x[wiring_.h_first[i] - 1], x[wiring_.h_second[i] - 1]);
    dx[i] = coupling_.f(x[i]) + epsilon_ * coupling;
    if (!std::isfinite(dx[i])) {
      throw CouplingOverflow("vector field is not finite at cell " + std::to_string(i + 1));
    }
  }
  return dx;
}

State vector_field(const CellNetwork& net, const State& x) { return net(x); }

State act(const Perm16& gamma, const State& x) {
  State out{};
  for (int i = 0; i < kCells; ++i) out[gamma.image0(i)] = x[i];
  return out;
}

double equivariance_residual(const CellNetwork& net, std::span<const Perm16> elements,
                             std::span<const State> states) {
  double worst = 0.0;
  for (const auto& x : states) {
    const State fx = net(x);
    for (const auto& gamma : elements) {
      const State lhs = net(act(gamma, x));
      const State rhs = act(gamma, fx);
      for (int i = 0; i < kCells; ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
    }
  }
  return worst;
}

std::vector<State> random_states(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::vector<State> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    CounterRng rng(seed, k);
    for (auto& v : out[k]) v = lo + (hi - lo) * rng.uniform();
  }
  return out;
}

CellNetwork build_network(const group::CayleyGraph& graph, CouplingSpec coupling, double epsilon) {
  CellNetwork net(graph, std::move(coupling), epsilon);
  const auto states = random_states(20, 0x5eed);
  const auto& syms = net.symmetries();
  double r = equivariance_residual(net, syms, states);
  if (!(r < 1e-9)) {
    std::ostringstream os;
    os << "network wiring is not equivariant (residual " << r << ")";
    throw EquivarianceError(os.str());
  }
  return net;
}

Trajectory simulate(const CellNetwork& net, const State& x0, const SimulationOptions& opt) {
  if (!(opt.t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be positive");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("simulate: tol must be positive");
  ode::Options o;
  o.rtol = opt.tol;
  o.atol = opt.tol;
  return ode::integrate<kCells>([&](double, const State& x) { return net(x); }, 0.0, x0,
                                opt.t_end, o);
}

const std::vector<PrintedWiringRow>& printed_wiring_rows() {
  static const std::vector<PrintedWiringRow> rows = {
      {1, {12, 1}, {5, 9}},    {2, {1, 2}, {9, 13}},    {3, {2, 3}, {13, 1}},
      {4, {3, 4}, {1, 5}},     {5, {4, 9}, {2, 6}},     {6, {9, 10}, {6, 10}},
      {7, {10, 11}, {10, 14}}, {8, {11, 12}, {14, 2}},  {9, {6, 5}, {3, 7}},
      {10, {5, 16}, {7, 11}},  {11, {16, 15}, {11, 15}}, {12, {15, 14}, {15, 3}},
      {13, {14, 13}, {4, 8}},  {14, {13, 8}, {8, 12}},  {15, {8, 7}, {12, 16}},
      {16, {7, 6}, {16, 4}},
  };
  return rows;
}

namespace {

std::string row_text(int cell, int g1, int g2, int h1, int h2) {
  std::ostringstream os;
  os << "x" << cell << "' = f(x" << cell << ") + g(x" << g1 << ", x" << g2 << ") + h(x" << h1
     << ", x" << h2 << ")";
  return os.str();
}

}  // namespace

std::vector<group::AuditRow> audit_wiring(const CellNetwork& net) {
  const auto& w = net.wiring();
  std::vector<group::AuditRow> out;
  for (const auto& row : printed_wiring_rows()) {
    const int i = row.cell - 1;
    group::AuditRow r;
    r.label = "x" + std::to_string(row.cell);
    r.printed = row_text(row.cell, row.g_args[0], row.g_args[1], row.h_args[0], row.h_args[1]);
    r.corrected = row_text(row.cell, w.g_source[i], row.cell, w.h_first[i], w.h_second[i]);
    bool g_ok = row.g_args[0] == w.g_source[i] && row.g_args[1] == row.cell;
    bool h_ok = row.h_args[0] == w.h_first[i] && row.h_args[1] == w.h_second[i];
    r.verdict = g_ok && h_ok ? group::Verdict::Match : group::Verdict::Mismatch;
    if (!g_ok && !h_ok) {
      r.note = "g and h arguments differ";
    } else if (!g_ok) {
      r.note = "g arguments differ";
    } else if (!h_ok) {
      r.note = "h arguments differ";
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace q8::network
