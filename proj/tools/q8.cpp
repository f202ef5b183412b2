// q8: command-line front end for the group, network, Hopf, torus and
// reduced-flow modules.

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <atomic>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "q8/angles.hpp"
#include "q8/dynamics.hpp"
#include "q8/group.hpp"
#include "q8/hopf.hpp"
#include "q8/ledger.hpp"
#include "q8/network.hpp"
#include "q8/stability.hpp"
#include "q8/torus.hpp"

using nlohmann::json;
using namespace q8;

namespace {

constexpr const char* kVersion = "1.0.0";

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Report {
  std::string text;
  json payload;
  std::string csv;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// JSON cannot carry non-finite numbers; they become null.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size() || !std::isfinite(v)) throw ValidationError(what + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (expected && out.size() != expected) {
    throw ValidationError(what + ": expected " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

hopf::cplx parse_complex(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, 0, what);
  if (v.empty() || v.size() > 2) throw ValidationError(what + ": expected 're' or 're,im'");
  return {v[0], v.size() == 2 ? v[1] : 0.0};
}

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw ValidationError(what + " must be finite");
}

json params_json(const torus::Params& p) { return {{"u", p.u}, {"epsilon", p.epsilon}, {"q", p.q}}; }

json theta_json(const torus::Theta3& t) { return json::array({t[0], t[1], t[2]}); }

json audit_json(const std::vector<group::AuditRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"label", r.label},
                   {"printed", r.printed},
                   {"verdict", std::string(group::to_string(r.verdict))},
                   {"corrected", r.corrected},
                   {"note", r.note}});
  }
  return out;
}

const group::GroupTable& table() {
  static const group::GroupTable t = [] {
    auto [a, b] = group::printed_generators();
    return group::generate_group(a, b, 16);
  }();
  return t;
}

// ---------------------------------------------------------------- group

Report group_verify() {
  const auto& t = table();
  Report r;
  const auto relations = group::verify_presentation(t);
  const auto audit = group::audit_element_table(t);
  const auto graph = group::build_cayley_graph(t);
  bool graph_ok = true;
  std::string graph_error;
  try {
    graph.validate();
  } catch (const std::exception& e) {
    graph_ok = false;
    graph_error = e.what();
  }

  json rel = json::array();
  bool all = true;
  for (const auto& x : relations) {
    rel.push_back({{"relation", x.name}, {"holds", x.holds}});
    all = all && x.holds;
  }
  json elements = json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto im = t.element(i).images();
    elements.push_back({{"index", i}, {"word", t.name(i)}, {"cycles", t.element(i).cycles()},
                        {"order", t.element(i).order()}, {"images", std::vector<int>(im.begin(), im.end())}});
  }
  json a_edges = json::array(), b_edges = json::array();
  for (const auto& e : graph.a_edges) a_edges.push_back({e.first, e.second});
  for (const auto& e : graph.b_edges) b_edges.push_back({e.first, e.second});
  r.payload = {{"order", t.size()},
               {"abelian", t.is_abelian()},
               {"relations", rel},
               {"all_relations_hold", all},
               {"elements", elements},
               {"element_table_audit", audit_json(audit)},
               {"cayley_graph", {{"valid", graph_ok}, {"error", graph_error}, {"a_edges", a_edges}, {"b_edges", b_edges}}}};

  std::string& s = r.text;
  s += "group order " + std::to_string(t.size()) + (t.is_abelian() ? " (abelian)\n" : " (non-abelian)\n");
  for (const auto& x : relations) s += "  " + x.name + ": " + (x.holds ? "holds" : "FAILS") + "\n";
  s += "element table audit\n";
  for (const auto& a : audit) {
    s += "  " + a.label + ": " + std::string(group::to_string(a.verdict));
    if (a.verdict != group::Verdict::Match) s += " (derived " + a.corrected + ")";
    if (!a.note.empty()) s += " - " + a.note;
    s += "\n";
  }
  s += std::string("cayley graph: ") + (graph_ok ? "valid" : "invalid: " + graph_error) + "\n";

  r.csv = csv_row({"record", "label", "printed", "verdict", "corrected", "note"});
  for (const auto& x : relations) r.csv += csv_row({"relation", x.name, "", x.holds ? "holds" : "fails", "", ""});
  for (const auto& a : audit) {
    r.csv += csv_row({"element", a.label, a.printed, std::string(group::to_string(a.verdict)), a.corrected, a.note});
  }
  return r;
}

// ---------------------------------------------------------------- network

struct NetworkArgs {
  std::string f = "decay", g = "diffusive", h = "mixed";
  double eps = 1.0;
  double t_end = 10.0;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::string x0;
};

network::CellNetwork make_network(const NetworkArgs& a) {
  require_finite(a.eps, "eps");
  network::CouplingSpec spec;
  try {
    spec = network::builtin_coupling(a.f, a.g, a.h);
  } catch (const std::exception& e) {
    throw ValidationError(e.what());
  }
  return network::build_network(group::build_cayley_graph(table()), std::move(spec), a.eps);
}

json wiring_json(const network::Wiring& w) {
  json rows = json::array();
  for (int i = 0; i < group::kCells; ++i) {
    rows.push_back({{"cell", i + 1}, {"g_source", w.g_source[i]}, {"h_first", w.h_first[i]}, {"h_second", w.h_second[i]}});
  }
  return rows;
}

Report network_simulate(const NetworkArgs& a) {
  if (!(a.t_end > 0.0) || !std::isfinite(a.t_end)) throw ValidationError("t-end must be positive");
  if (!(a.tol > 0.0)) throw ValidationError("tol must be positive");
  const auto net = make_network(a);
  network::State x0{};
  if (a.x0.empty()) {
    x0 = network::random_states(1, a.seed).front();
  } else if (a.x0.rfind("random:", 0) == 0) {
    std::uint64_t s = 0;
    try {
      std::size_t used = 0;
      s = std::stoull(a.x0.substr(7), &used);
      if (used != a.x0.size() - 7) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("x0: bad seed in '" + a.x0 + "'");
    }
    x0 = network::random_states(1, s).front();
  } else {
    std::string text = a.x0;
    if (std::ifstream in{a.x0}; in) {
      std::stringstream ss;
      ss << in.rdbuf();
      text.clear();
      std::string tok;
      while (ss >> tok) {
        for (char& ch : tok)
          if (ch == ',') ch = ' ';
        std::stringstream parts(tok);
        for (std::string item; parts >> item;) text += (text.empty() ? "" : ",") + item;
      }
    }
    const auto v = parse_list(text, group::kCells, "x0");
    std::copy(v.begin(), v.end(), x0.begin());
  }
  const network::SimulationOptions opt{a.t_end, a.tol};
  const auto traj = network::simulate(net, x0, opt);

  const auto& t = table();
  const auto states = network::random_states(20, a.seed + 1);
  const double field_res = network::equivariance_residual(net, t.elements(), states);
  double flow_res = 0.0;
  for (const auto* g : {&t.a(), &t.b()}) {
    const auto moved = network::simulate(net, network::act(*g, x0), opt);
    const auto expect = network::act(*g, traj.back());
    for (int i = 0; i < group::kCells; ++i) flow_res = std::max(flow_res, std::abs(moved.back()[i] - expect[i]));
  }

  Report r;
  r.payload = {{"coupling", {{"f", a.f}, {"g", a.g}, {"h", a.h}}},
               {"epsilon", a.eps},
               {"wiring", wiring_json(net.wiring())},
               {"x0", std::vector<double>(x0.begin(), x0.end())},
               {"t_end", traj.t.back()},
               {"steps", traj.t.size() - 1},
               {"rejected_steps", traj.rejected},
               {"final_state", std::vector<double>(traj.back().begin(), traj.back().end())},
               {"field_equivariance_residual", field_res},
               {"flow_equivariance_residual", flow_res}};
  r.text = "simulated to t = " + num(traj.t.back()) + " in " + std::to_string(traj.t.size() - 1) + " steps\n";
  r.text += "final state:";
  for (double v : traj.back()) r.text += " " + num(v);
  r.text += "\nfield equivariance residual " + num(field_res) + "\nflow equivariance residual (a, b) " +
            num(flow_res) + "\n";
  std::vector<std::string> head{"t"};
  for (int i = 1; i <= group::kCells; ++i) head.push_back("x" + std::to_string(i));
  r.csv = csv_row(head);
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    std::vector<std::string> row{num(traj.t[k])};
    for (double v : traj.x[k]) row.push_back(num(v));
    r.csv += csv_row(row);
  }
  return r;
}

Report network_audit(const NetworkArgs& a) {
  const auto net = make_network(a);
  const auto rows = network::audit_wiring(net);
  std::size_t mismatches = 0;
  for (const auto& x : rows) mismatches += x.verdict != group::Verdict::Match;
  Report r;
  r.payload = {{"rule", "x_i' = f(x_i) + eps (g(x_A(i), x_i) + h(x_B1(i), x_B2(i))), "
                        "A(i) = g_i(a^-1(1)), B1(i) = g_i(b(1)), B2(i) = g_i(b^2(1))"},
               {"wiring", wiring_json(net.wiring())},
               {"rows", audit_json(rows)},
               {"mismatches", mismatches}};
  r.text = "wiring audit: " + std::to_string(mismatches) + " of " + std::to_string(rows.size()) + " rows differ\n";
  for (const auto& x : rows) {
    r.text += "  " + x.label + ": " + std::string(group::to_string(x.verdict));
    if (x.verdict != group::Verdict::Match) r.text += " printed " + x.printed + ", derived " + x.corrected;
    r.text += "\n";
  }
  r.csv = csv_row({"label", "printed", "verdict", "derived", "note"});
  for (const auto& x : rows) {
    r.csv += csv_row({x.label, x.printed, std::string(group::to_string(x.verdict)), x.corrected, x.note});
  }
  return r;
}

// ---------------------------------------------------------------- hopf

struct HopfArgs {
  std::string a = "0", an = "0", b = "0", c = "0", d = "0", alambda = "0";
};

json cplx_json(hopf::cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Report hopf_classify(const HopfArgs& a) {
  hopf::HopfCoeffs c;
  c.A = parse_complex(a.a, "a");
  c.A_N = parse_complex(a.an, "an");
  c.B = parse_complex(a.b, "b");
  c.C = parse_complex(a.c, "c");
  c.D = parse_complex(a.d, "d");
  c.A_lambda = parse_complex(a.alambda, "alambda");

  const auto conds = hopf::nondegeneracy(c);
  const auto branches = hopf::classify_branches(c);
  const auto equiv = hopf::normal_form_equivariance(c);

  json jc = json::array();
  for (const auto& x : conds) {
    jc.push_back({{"name", x.name}, {"expression", x.expression}, {"value", x.value}, {"holds", x.holds}});
  }
  json jb = json::array();
  int stable = 0;
  for (const auto& b : branches) {
    json signs = json::array();
    for (const auto& s : b.eigen_signs) signs.push_back({{"expression", s.expression}, {"value", s.value}});
    jb.push_back({{"orbit_type", b.orbit_type},
                  {"isotropy_q8", b.isotropy_q8},
                  {"isotropy_d8", b.isotropy_d8},
                  {"branching_equation", b.branching_equation},
                  {"criticality", std::string(hopf::to_string(b.criticality))},
                  {"stability", std::string(hopf::to_string(b.stability))},
                  {"sign_rule", std::string(hopf::to_string(b.sign_rule))},
                  {"eigen_signs", signs},
                  {"note", b.note}});
    stable += b.stability == hopf::Stability::Stable;
  }
  json je = json::array();
  double worst = 0.0;
  for (const auto& e : equiv) {
    je.push_back({{"element", e.element}, {"max_residual", e.max_residual}});
    worst = std::max(worst, e.max_residual);
  }
  Report r;
  r.payload = {{"coefficients",
                {{"A", cplx_json(c.A)}, {"A_N", cplx_json(c.A_N)}, {"B", cplx_json(c.B)}, {"C", cplx_json(c.C)},
                 {"D", cplx_json(c.D)}, {"A_lambda", cplx_json(c.A_lambda)}}},
               {"nondegeneracy", jc},
               {"branches", jb},
               {"stable_branch_count", stable},
               {"normal_form_equivariance", je},
               {"max_equivariance_residual", worst}};
  for (const auto& x : conds) {
    r.text += "condition " + x.name + " " + x.expression + " = " + num(x.value) + (x.holds ? "" : "  FAILS") + "\n";
  }
  for (const auto& b : branches) {
    r.text += b.orbit_type + " [" + b.isotropy_q8 + "]: " + std::string(hopf::to_string(b.criticality)) + ", " +
              std::string(hopf::to_string(b.stability));
    if (b.sign_rule != b.stability) r.text += " (sign conditions alone: " + std::string(hopf::to_string(b.sign_rule)) + ")";
    if (!b.note.empty()) r.text += " - " + b.note;
    r.text += "\n";
  }
  r.text += "stable branches: " + std::to_string(stable) + "\nnormal form equivariance residual " + num(worst) + "\n";
  r.csv = csv_row({"orbit_type", "isotropy_q8", "isotropy_d8", "criticality", "stability", "sign_rule", "note"});
  for (const auto& b : branches) {
    r.csv += csv_row({b.orbit_type, b.isotropy_q8, b.isotropy_d8, std::string(hopf::to_string(b.criticality)),
                      std::string(hopf::to_string(b.stability)), std::string(hopf::to_string(b.sign_rule)), b.note});
  }
  return r;
}

// ---------------------------------------------------------------- torus

Report torus_catalog() {
  const auto& t = table();
  const auto rows = torus::isotropy_catalog(t);
  json jr = json::array();
  std::size_t failed = 0;
  for (const auto& x : rows) {
    json gens = json::array();
    for (const auto& g : x.entry.generators) gens.push_back({{"element", g.element}, {"phase_quarter_pi", g.quarter_pi}});
    json samples = json::array();
    for (const auto& s : x.failed_samples) {
      samples.push_back({{"params", s.params}, {"generator", s.generator}, {"distance", s.distance}});
    }
    json corrected = nullptr;
    if (x.corrected) {
      corrected = {{"exists", x.corrected->exists}, {"family", x.corrected->text}, {"dim", x.corrected->dim}};
    }
    const bool ok = x.verdict == torus::RowVerdict::Verified;
    failed += !ok;
    jr.push_back({{"row", x.row},
                  {"name", x.entry.name},
                  {"family", x.entry.family_text()},
                  {"dim", x.entry.dim},
                  {"generators", gens},
                  {"verdict", ok ? "verified" : "failed"},
                  {"samples", x.samples},
                  {"failures", x.failures},
                  {"failed_samples", samples},
                  {"corrected", corrected},
                  {"flags", x.flags}});
  }
  json syms = json::array();
  for (const auto& s : torus::plane_symmetries(t)) {
    json m = json::array();
    for (const auto& row : s.matrix) m.push_back(json::array({row[0], row[1], row[2]}));
    syms.push_back({{"element", s.element}, {"matrix", m}});
  }
  Report r;
  r.payload = {{"rows", jr}, {"failed_rows", failed}, {"plane_symmetries", syms}};
  r.text = "isotropy catalog: " + std::to_string(rows.size() - failed) + " verified, " + std::to_string(failed) + " failed\n";
  for (const auto& x : rows) {
    r.text += "  " + std::to_string(x.row) + " " + x.entry.name + " " + x.entry.family_text() + ": " +
              (x.verdict == torus::RowVerdict::Verified ? "verified" : "failed");
    if (x.corrected) r.text += "; fixed set " + (x.corrected->exists ? x.corrected->text : std::string("empty"));
    for (const auto& f : x.flags) r.text += "; " + f;
    r.text += "\n";
  }
  r.csv = csv_row({"row", "name", "family", "dim", "verdict", "failures", "samples", "corrected", "flags"});
  for (const auto& x : rows) {
    std::string flags;
    for (const auto& f : x.flags) flags += (flags.empty() ? "" : "; ") + f;
    r.csv += csv_row({std::to_string(x.row), x.entry.name, x.entry.family_text(), std::to_string(x.entry.dim),
                      x.verdict == torus::RowVerdict::Verified ? "verified" : "failed", std::to_string(x.failures),
                      std::to_string(x.samples), x.corrected ? x.corrected->text : "", flags});
  }
  return r;
}

struct ParamArgs {
  double u = 1.0, eps = 0.1, q = -0.15;
  torus::Params params() const {
    require_finite(u, "u");
    require_finite(eps, "eps");
    require_finite(q, "q");
    return {u, eps, q};
  }
};

Report torus_field(const ParamArgs& p, const std::string& theta_text, const std::string& form) {
  const auto v = parse_list(theta_text, 3, "theta");
  const torus::Theta3 th{v[0], v[1], v[2]};
  const auto prm = p.params();
  const auto d = form == "factored" ? torus::factored_field(th, prm) : torus::reduced_field(th, prm);
  Report r;
  r.payload = {{"theta", theta_json(th)}, {"params", params_json(prm)}, {"form", form}, {"derivative", theta_json(d)}};
  r.text = "d theta/dt = (" + num(d[0]) + ", " + num(d[1]) + ", " + num(d[2]) + ")\n";
  r.csv = csv_row({"theta1", "theta2", "theta3", "dtheta1", "dtheta2", "dtheta3"}) +
          csv_row({num(th[0]), num(th[1]), num(th[2]), num(d[0]), num(d[1]), num(d[2])});
  return r;
}

// ---------------------------------------------------------------- reduced

Report reduced_eigs(const ParamArgs& p) {
  const auto prm = p.params();
  const auto eq = dynamics::equilibria(prm);
  json rows = json::array();
  Report r;
  r.text = "equilibria at u = " + num(prm.u) + ", eps = " + num(prm.epsilon) + ", q = " + num(prm.q) + "\n";
  r.csv = csv_row({"isotropy", "theta1", "theta2", "theta3", "eig1", "eig2", "eig3", "table1", "table2", "table3",
                   "max_table_deviation", "max_fd_deviation"});
  for (std::size_t i = 0; i < eq.size(); ++i) {
    const auto& e = eq[i];
    const auto& f = dynamics::eigenvalue_formulas()[i].formulas;
    json general = json::array();
    for (auto z : dynamics::eigenvalues(e.jacobian)) general.push_back({{"re", z.real()}, {"im", z.imag()}});
    rows.push_back({{"isotropy", e.isotropy_name},
                    {"location", theta_json(e.location)},
                    {"eigenvalues", json::array({e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]})},
                    {"table_formulas", json::array({f[0], f[1], f[2]})},
                    {"table_values", json::array({e.table_values[0], e.table_values[1], e.table_values[2]})},
                    {"general_eigenvalues", general},
                    {"field_norm", e.field_norm},
                    {"max_table_deviation", e.max_table_deviation},
                    {"max_fd_deviation", e.max_fd_deviation},
                    {"max_offdiagonal", e.max_offdiagonal}});
    r.text += "  " + e.isotropy_name + " at (" + num(e.location[0]) + ", " + num(e.location[1]) + ", " +
              num(e.location[2]) + "): " + num(e.eigenvalues[0]) + ", " + num(e.eigenvalues[1]) + ", " +
              num(e.eigenvalues[2]) + "  [" + f[0] + " | " + f[1] + " | " + f[2] + "]  deviation " +
              num(e.max_table_deviation) + "\n";
    r.csv += csv_row({e.isotropy_name, num(e.location[0]), num(e.location[1]), num(e.location[2]), num(e.eigenvalues[0]),
                      num(e.eigenvalues[1]), num(e.eigenvalues[2]), num(e.table_values[0]), num(e.table_values[1]),
                      num(e.table_values[2]), num(e.max_table_deviation), num(e.max_fd_deviation)});
  }
  r.payload = {{"params", params_json(prm)}, {"equilibria", rows}};
  return r;
}

struct ConnectArgs {
  double delta = 1e-4, tol = 1e-4, t_max = 500.0, integrator_tol = 1e-10;
  dynamics::ConnectionOptions options() const {
    if (!(delta > 0.0 && delta <= 1e-2)) throw ValidationError("delta must lie in (0, 1e-2]");
    if (!(tol > 0.0) || !(t_max > 0.0) || !(integrator_tol > 0.0) || !std::isfinite(t_max)) {
      throw ValidationError("tol, t-max and integrator-tol must be positive");
    }
    return {delta, tol, t_max, integrator_tol};
  }
};

json connection_json(const dynamics::ConnectionResult& c) {
  return {{"from", dynamics::vertex_label(c.from)},
          {"to", dynamics::vertex_label(c.to)},
          {"reached", c.reached >= 0 ? json(dynamics::vertex_label(c.reached)) : json(nullptr)},
          {"axis", c.axis + 1},
          {"sign", c.sign},
          {"departure_eigenvalue", c.departure_eigenvalue},
          {"seed_offset", c.seed_offset},
          {"terminal_distance", c.terminal_distance},
          {"verdict", std::string(dynamics::to_string(c.verdict))},
          {"conjugates_of_target", c.conjugates_of_target},
          {"arc_points", c.arc.t.size()},
          {"t_end", c.arc.t.back()}};
}

json cycle_json(const dynamics::DetectedCycle& c) {
  json labels = json::array();
  for (int n : c.nodes) labels.push_back(dynamics::vertex_label(n));
  json legs = json::array();
  for (const auto& l : c.legs) legs.push_back(connection_json(l));
  return {{"nodes", labels}, {"visits_printed_order", c.visits_printed_order}, {"legs", legs}};
}

Report reduced_connect(const ParamArgs& p, const ConnectArgs& ca) {
  const auto prm = p.params();
  const auto opt = ca.options();
  const auto& t = table();
  const auto legs = dynamics::find_connections(prm, opt, t);
  const auto graph = dynamics::connection_graph(prm, opt, t);
  const auto cycle = dynamics::detect_cycle(graph);

  Report r;
  json jl = json::array();
  r.text = "connections at u = " + num(prm.u) + ", eps = " + num(prm.epsilon) + ", q = " + num(prm.q) + "\n";
  r.csv = csv_row({"leg", "from", "to", "axis", "sign", "t", "theta1", "theta2", "theta3"});
  for (std::size_t l = 0; l < legs.size(); ++l) {
    const auto& leg = legs[l];
    json attempts = json::array();
    for (const auto& a : leg.attempts) {
      attempts.push_back(connection_json(a));
      for (std::size_t k = 0; k < a.arc.t.size(); ++k) {
        const auto& x = a.arc.x[k];
        r.csv += csv_row({std::to_string(l + 1), dynamics::vertex_label(a.from), dynamics::vertex_label(a.to),
                          std::to_string(a.axis + 1), std::to_string(a.sign), num(a.arc.t[k]), num(wrap_pm_pi(x[0])),
                          num(wrap_pm_pi(x[1])), num(wrap_pm_pi(x[2]))});
      }
    }
    jl.push_back({{"from", dynamics::vertex_label(leg.from)},
                  {"to", dynamics::vertex_label(leg.to)},
                  {"connected", leg.connected()},
                  {"attempts", attempts}});
    r.text += "  " + dynamics::vertex_label(leg.from) + " -> " + dynamics::vertex_label(leg.to) + ": " +
              (leg.connected() ? "connected" : "not connected") + "\n";
    for (const auto& a : leg.attempts) {
      r.text += "    axis " + std::to_string(a.axis + 1) + (a.sign > 0 ? "+" : "-") + " (e = " + num(a.departure_eigenvalue) +
                "): " + std::string(dynamics::to_string(a.verdict)) +
                (a.reached >= 0 ? " at " + dynamics::vertex_label(a.reached) : std::string()) + ", distance " +
                num(a.terminal_distance) + "\n";
    }
  }
  json edges = json::array();
  for (const auto& e : graph.edges) edges.push_back(connection_json(e));
  r.payload = {{"params", params_json(prm)},
               {"options", {{"delta", opt.delta}, {"tol", opt.tol}, {"t_max", opt.t_max}, {"integrator_tol", opt.integrator_tol}}},
               {"legs", jl},
               {"graph", edges},
               {"cycle", cycle ? cycle_json(*cycle) : json(nullptr)}};
  r.text += "connection graph:\n";
  for (const auto& e : graph.edges) {
    r.text += "  " + dynamics::vertex_label(e.from) + " axis " + std::to_string(e.axis + 1) + " -> " +
              (e.reached >= 0 ? dynamics::vertex_label(e.reached) : std::string(dynamics::to_string(e.verdict))) + "\n";
  }
  if (cycle) {
    r.text += "cycle:";
    for (int n : cycle->nodes) r.text += " " + dynamics::vertex_label(n);
    r.text += "\n";
  } else {
    r.text += "no cycle among the lattice equilibria\n";
  }
  return r;
}

// ---------------------------------------------------------------- classify / sweep

json closed_form_rho_json(const std::optional<stability::ClosedFormRho>& p) {
  if (!p) return nullptr;
  return {{"lower_branch", p->lower_branch}, {"rho1", jnum(p->rho1)}, {"rho2", jnum(p->rho2)}, {"rho3", jnum(p->rho2)},
          {"rho", jnum(p->rho)}, {"rho_abs", jnum(p->rho_abs)}, {"closed_form_applies", p->closed_form_applies}};
}

json class_json(const stability::StabilityClass& c) {
  return {{"class", std::string(stability::to_string(c.kind))},
          {"trigger", c.trigger},
          {"predicates", {{"stable_region", c.stable_region}, {"essential_region", c.essential_region}, {"u_positive", c.unstable_region},
                          {"stable_bound", c.stable_bound}, {"essential_upper", c.essential_upper ? jnum(*c.essential_upper) : json(nullptr)}}},
          {"existence_condition", {{"printed", c.existence_printed}, {"abs_u", c.existence_abs}, {"note", c.domain_note}}}};
}

Report classify_cmd(const ParamArgs& p, const ConnectArgs& ca, const std::string& probe) {
  const auto prm = p.params();
  const auto opt = ca.options();
  const auto rep = stability::analyze(prm, opt, table());

  json payload = class_json(rep.cls);
  payload["params"] = params_json(prm);
  payload["rho_closed_form"] = closed_form_rho_json(rep.closed_form);
  payload["cycle"] = rep.cycle ? cycle_json(*rep.cycle) : json(nullptr);
  json splits = json::array();
  for (const auto& s : rep.splits) {
    splits.push_back({{"node", s.label}, {"out_axis", s.out_axis + 1}, {"in_axis", s.in_axis + 1},
                      {"transverse_axis", s.transverse_axis + 1}, {"e", s.e}, {"c", s.c}, {"t", s.t},
                      {"geometry_violation", s.geometry_violation}, {"transverse_expanding", s.transverse_expanding}});
  }
  payload["splits"] = splits;
  payload["geometry_error"] = rep.geometry_error;
  payload["rho_km"] = rep.rho ? json{{"rho_i", rep.rho->rho_i}, {"rho", jnum(rep.rho->rho)},
                                     {"notes", rep.rho->discrepancy_notes}}
                              : json(nullptr);
  payload["cross_check"] = {{"applicable", rep.cross_check.applicable}, {"holds", rep.cross_check.holds},
                            {"note", rep.cross_check.note}};
  payload["notes"] = rep.notes;
  payload["probe"] = nullptr;

  Report r;
  r.text = "class: " + std::string(stability::to_string(rep.cls.kind)) + " (" + rep.cls.trigger + ")\n";
  r.text += "existence condition: " + rep.cls.domain_note + "\n";
  if (rep.closed_form) {
    r.text += "closed-form rho = " + num(rep.closed_form->rho) + " (|rho| = " + num(rep.closed_form->rho_abs) + ", " +
              (rep.closed_form->lower_branch ? "lower" : "upper") + " branch)\n";
  }
  if (rep.cycle) {
    r.text += "cycle:";
    for (int n : rep.cycle->nodes) r.text += " " + dynamics::vertex_label(n);
    r.text += "\n";
  }
  for (const auto& s : rep.splits) {
    r.text += "  " + s.label + ": e = " + num(s.e) + ", c = " + num(s.c) + ", t = " + num(s.t) + "\n";
  }
  if (!rep.geometry_error.empty()) r.text += "geometry: " + rep.geometry_error + "\n";
  if (rep.rho) r.text += "rho_km = " + num(rep.rho->rho) + "\n";
  if (rep.rho) for (const auto& n : rep.rho->discrepancy_notes) r.text += "note: " + n + "\n";
  if (!rep.cross_check.note.empty()) r.text += "cross-check: " + rep.cross_check.note + "\n";
  for (const auto& n : rep.notes) r.text += "note: " + n + "\n";

  std::string probe_csv;
  if (!probe.empty()) {
    const auto v = parse_list(probe, 3, "probe");
    if (!(v[0] > 0.0) || v[1] < 100 || v[1] != std::floor(v[1]) || v[2] < 0 || v[2] != std::floor(v[2])) {
      throw ValidationError("probe: expected r > 0, integer n >= 100, integer seed >= 0");
    }
    if (!rep.cycle) throw ValidationError("probe: no heteroclinic cycle detected at these parameters");
    const auto b = stability::basin_probe(prm, *rep.cycle, v[0], static_cast<std::size_t>(v[1]),
                                          static_cast<std::uint64_t>(v[2]));
    payload["probe"] = {{"r", b.r}, {"n", b.n}, {"returned", b.returned}, {"returned_fraction", b.returned_fraction},
                        {"seed", b.seed}, {"horizon", b.horizon}, {"failures", b.failures}};
    r.text += "basin probe r = " + num(b.r) + ": " + std::to_string(b.returned) + "/" + std::to_string(b.n) +
              " returned (" + num(b.returned_fraction) + ")\n";
    probe_csv = num(b.returned_fraction);
  }
  r.payload = payload;
  r.csv = csv_row({"u", "epsilon", "q", "class", "rho_km", "rho_closed_form", "rho_closed_form_abs", "connected", "returned_fraction"}) +
          csv_row({num(prm.u), num(prm.epsilon), num(prm.q), std::string(stability::to_string(rep.cls.kind)),
                   rep.rho ? num(rep.rho->rho) : "", rep.closed_form ? num(rep.closed_form->rho) : "",
                   rep.closed_form ? num(rep.closed_form->rho_abs) : "", rep.cycle ? "true" : "false", probe_csv});
  return r;
}

struct Range {
  double lo, hi;
  std::size_t n;
  double at(std::size_t i) const { return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1); }
};

Range parse_range(const std::string& text, const std::string& what) {
  const auto first = text.find(':');
  const auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
  if (second == std::string::npos) throw ValidationError(what + ": expected a:b:n");
  const auto lo = parse_list(text.substr(0, first), 1, what);
  const auto hi = parse_list(text.substr(first + 1, second - first - 1), 1, what);
  const auto n = parse_list(text.substr(second + 1), 1, what);
  if (n[0] < 0 || n[0] != std::floor(n[0])) throw ValidationError(what + ": n must be a non-negative integer");
  if (n[0] == 0) throw ValidationError(what + ": empty range");
  return {lo[0], hi[0], static_cast<std::size_t>(n[0])};
}

struct SweepRow {
  torus::Params prm;
  std::string cls;
  std::string rho_km, rho_printed, rho_abs, connected, notes;
};

Report sweep_cmd(const std::string& u_range, const std::string& q_range, double eps, bool connect,
                 const ConnectArgs& ca) {
  require_finite(eps, "eps");
  const auto ur = parse_range(u_range, "u-range");
  const auto qr = parse_range(q_range, "q-range");
  if (ur.n * qr.n > 1000000) throw ValidationError("grid exceeds 10^6 points");
  const auto opt = ca.options();
  const auto& t = table();

  std::vector<SweepRow> rows(ur.n * qr.n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      SweepRow& row = rows[k];
      row.prm = {ur.at(k / qr.n), eps, qr.at(k % qr.n)};
      try {
        std::vector<std::string> notes;
        if (connect) {
          const auto rep = stability::analyze(row.prm, opt, t);
          row.cls = std::string(stability::to_string(rep.cls.kind));
          if (rep.rho) row.rho_km = num(rep.rho->rho);
          if (rep.closed_form) {
            row.rho_printed = num(rep.closed_form->rho);
            row.rho_abs = num(rep.closed_form->rho_abs);
          }
          row.connected = rep.cycle ? "true" : "false";
          notes = rep.notes;
          if (!rep.geometry_error.empty()) notes.push_back(rep.geometry_error);
          if (!rep.cross_check.note.empty()) notes.push_back(rep.cross_check.note);
        } else {
          row.cls = std::string(stability::to_string(stability::classify(row.prm).kind));
          try {
            const auto p = stability::rho_closed_form(row.prm);
            row.rho_printed = num(p.rho);
            row.rho_abs = num(p.rho_abs);
          } catch (const std::domain_error& e) {
            notes.emplace_back(e.what());
          }
        }
        for (const auto& n : notes) row.notes += (row.notes.empty() ? "" : "; ") + n;
      } catch (const std::exception& e) {
        row.cls = "Error";
        row.notes = e.what();
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(stability::worker_count(), rows.size());
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  Report r;
  r.csv = csv_row({"u", "epsilon", "q", "class", "rho_km", "rho_closed_form", "rho_closed_form_abs", "connected", "notes"});
  json jr = json::array();
  std::map<std::string, std::size_t> counts;
  const auto number_or_null = [](const std::string& v) { return v.empty() ? json(nullptr) : json(std::stod(v)); };
  const auto bool_or_null = [](const std::string& v) { return v.empty() ? json(nullptr) : json(v == "true"); };
  for (const auto& row : rows) {
    r.csv += csv_row({num(row.prm.u), num(row.prm.epsilon), num(row.prm.q), row.cls, row.rho_km, row.rho_printed,
                      row.rho_abs, row.connected, row.notes});
    jr.push_back({{"u", row.prm.u}, {"epsilon", row.prm.epsilon}, {"q", row.prm.q}, {"class", row.cls},
                  {"rho_km", number_or_null(row.rho_km)}, {"rho_closed_form", number_or_null(row.rho_printed)},
                  {"rho_closed_form_abs", number_or_null(row.rho_abs)}, {"connected", bool_or_null(row.connected)},
                  {"notes", row.notes}});
    ++counts[row.cls];
  }
  json jc = json::object();
  for (const auto& [k, v] : counts) jc[k] = v;
  r.payload = {{"rows", jr}, {"counts", jc}};
  r.text = r.csv;
  return r;
}

Report discrepancies_cmd() {
  Report r;
  r.payload = ledger::discrepancy_ledger(table());
  r.text = std::to_string(r.payload["total"].get<std::size_t>()) + " discrepancies\n";
  r.csv = csv_row({"category", "item", "printed", "derived", "note"});
  for (const auto& e : r.payload["entries"]) {
    const auto get = [&](const char* k) { return e[k].get<std::string>(); };
    r.text += "[" + get("category") + "] " + get("item") + ": printed " + get("printed") +
              (get("derived").empty() ? "" : ", derived " + get("derived")) + " - " + get("note") + "\n";
    r.csv += csv_row({get("category"), get("item"), get("printed"), get("derived"), get("note")});
  }
  return r;
}

// ---------------------------------------------------------------- plumbing

struct Common {
  std::string format = "text";
  std::string config;
  std::string out;
  bool stamp = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
  sub->add_option("--config", c.config, "JSON file with option values; flags override it");
  sub->add_option("--out", c.out, "Write the report to this file");
  sub->add_flag("--stamp", c.stamp, "Add a UTC timestamp to JSON output");
}

std::string config_value(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) {
      if (!s.empty()) s += ",";
      s += config_value(x, key);
    }
    return s;
  }
  throw ValidationError("config key '" + key + "': unsupported value");
}

void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config file: ") + e.what());
  }
  if (!cfg.is_object()) throw ValidationError("config file must hold a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    std::string name = key;
    for (auto& ch : name) ch = ch == '_' ? '-' : ch;
    if (name == "config" || name == "help") throw ValidationError("config key '" + key + "' is not allowed");
    CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (!opt) throw ValidationError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    try {
      if (opt->get_items_expected_min() == 0) {
        if (!value.is_boolean()) throw ValidationError("config key '" + key + "' must be a boolean");
        if (!value.get<bool>()) continue;
        opt->add_result("true");
      } else {
        opt->add_result(config_value(value, key));
      }
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ValidationError("config key '" + key + "': " + e.what());
    }
  }
}

json config_echo(CLI::App* sub) {
  json echo = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "out") continue;
    std::string value;
    if (opt->get_items_expected_min() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      for (const auto& s : opt->results()) value += (value.empty() ? "" : ",") + s;
    } else {
      value = opt->get_default_str();
    }
    echo[name] = value;
  }
  return echo;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quaternion-group oscillator network toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kVersion);

  Common common;
  NetworkArgs net;
  HopfArgs hopf_args;
  ParamArgs prm;
  ConnectArgs conn;
  std::string theta, form = "trig", probe, u_range, q_range;
  bool no_connect = false;

  auto* group_cmd = app.add_subcommand("group", "Group tables and presentation")->require_subcommand(1);
  auto* group_verify_cmd = group_cmd->add_subcommand("verify", "Generate the group and audit the element table");

  auto* network_cmd = app.add_subcommand("network", "The 16-cell network")->require_subcommand(1);
  auto* simulate_cmd = network_cmd->add_subcommand("simulate", "Integrate the network");
  auto* audit_cmd = network_cmd->add_subcommand("audit", "Compare derived wiring with the printed rows");
  for (auto* s : {simulate_cmd, audit_cmd}) {
    s->set_help_flag("--help", "Print this help message and exit");
    s->add_option("--f", net.f, "Internal dynamics")->check(CLI::IsMember(network::builtin_cell_names()));
    s->add_option("--g", net.g, "a-edge coupling")->check(CLI::IsMember(network::builtin_pair_names()));
    s->add_option("--h", net.h, "b-edge coupling")->check(CLI::IsMember(network::builtin_pair_names()));
    s->add_option("--eps", net.eps, "Coupling strength");
  }
  simulate_cmd->add_option("--t-end", net.t_end, "Final time");
  simulate_cmd->add_option("--tol", net.tol, "Integrator tolerance");
  simulate_cmd->add_option("--seed", net.seed, "Seed for the random initial state");
  simulate_cmd->add_option("--x0", net.x0, "Initial state: random:SEED, a file of 16 values, or 16 comma-separated values");

  auto* hopf_cmd = app.add_subcommand("hopf", "Hopf normal form")->require_subcommand(1);
  auto* hopf_classify_cmd = hopf_cmd->add_subcommand("classify", "Classify the three periodic branches");
  hopf_classify_cmd->add_option("--a", hopf_args.a, "A at the origin, re[,im]");
  hopf_classify_cmd->add_option("--an", hopf_args.an, "A_N, re[,im]");
  hopf_classify_cmd->add_option("--b", hopf_args.b, "B, re[,im]");
  hopf_classify_cmd->add_option("--c", hopf_args.c, "C, re[,im]");
  hopf_classify_cmd->add_option("--d", hopf_args.d, "D, re[,im]");
  hopf_classify_cmd->add_option("--alambda", hopf_args.alambda, "A_lambda, re[,im]");

  auto* torus_cmd = app.add_subcommand("torus", "Phase model on the 16-torus")->require_subcommand(1);
  auto* catalog_cmd = torus_cmd->add_subcommand("catalog", "Verify the isotropy catalog");
  auto* field_cmd = torus_cmd->add_subcommand("field", "Evaluate the reduced field");
  field_cmd->add_option("--theta", theta, "theta1,theta2,theta3")->required();
  field_cmd->add_option("--form", form, "trig or factored form of the field")->check(CLI::IsMember({"trig", "factored"}));

  auto* reduced_cmd = app.add_subcommand("reduced", "Reduced three-dimensional flow")->require_subcommand(1);
  auto* eigs_cmd = reduced_cmd->add_subcommand("eigs", "Equilibria and eigenvalues");
  auto* connect_cmd = reduced_cmd->add_subcommand("connect", "Shoot heteroclinic connections");
  auto* classify_sub = app.add_subcommand("classify", "Stability class and indices");
  auto* sweep_sub = app.add_subcommand("sweep", "Classify a (u, q) grid");
  auto* disc_sub = app.add_subcommand("discrepancies", "Inconsistencies found in the printed data");

  for (auto* s : {field_cmd, eigs_cmd, connect_cmd, classify_sub}) {
    s->add_option("--u", prm.u, "u");
    s->add_option("--eps", prm.eps, "epsilon");
    s->add_option("--q", prm.q, "q");
  }
  for (auto* s : {connect_cmd, classify_sub, sweep_sub}) {
    s->add_option("--delta", conn.delta, "Initial displacement");
    s->add_option("--tol", conn.tol, "Arrival distance");
    s->add_option("--t-max", conn.t_max, "Integration time limit");
    s->add_option("--integrator-tol", conn.integrator_tol, "Integrator tolerance");
  }
  classify_sub->add_option("--probe", probe, "Basin probe r,n,seed");
  sweep_sub->add_option("--u-range", u_range, "a:b:n")->required();
  sweep_sub->add_option("--q-range", q_range, "a:b:n")->required();
  sweep_sub->add_option("--eps", prm.eps, "epsilon");
  sweep_sub->add_flag("--no-connect", no_connect, "Skip cycle detection");

  std::vector<CLI::App*> leaves{group_verify_cmd, simulate_cmd, audit_cmd, hopf_classify_cmd, catalog_cmd, field_cmd,
                                eigs_cmd,         connect_cmd,  classify_sub, sweep_sub,       disc_sub};
  for (auto* s : leaves) add_common(s, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  CLI::App* leaf = nullptr;
  std::string command;
  for (auto* s : leaves) {
    if (s->parsed()) {
      leaf = s;
      const auto* parent = s->get_parent();
      command = (parent != &app ? parent->get_name() + " " : std::string()) + s->get_name();
    }
  }
  if (!leaf) {
    std::cerr << "error: no command given\n\n" << app.help();
    return 1;
  }

  try {
    if (!common.config.empty()) apply_config(leaf, common.config);
    Report report;
    if (leaf == group_verify_cmd) report = group_verify();
    else if (leaf == simulate_cmd) report = network_simulate(net);
    else if (leaf == audit_cmd) report = network_audit(net);
    else if (leaf == hopf_classify_cmd) report = hopf_classify(hopf_args);
    else if (leaf == catalog_cmd) report = torus_catalog();
    else if (leaf == field_cmd) report = torus_field(prm, theta, form);
    else if (leaf == eigs_cmd) report = reduced_eigs(prm);
    else if (leaf == connect_cmd) report = reduced_connect(prm, conn);
    else if (leaf == classify_sub) report = classify_cmd(prm, conn, probe);
    else if (leaf == sweep_sub) report = sweep_cmd(u_range, q_range, prm.eps, !no_connect, conn);
    else report = discrepancies_cmd();

    std::string body;
    if (common.format == "json") {
      json env = {{"tool", "q8"}, {"version", kVersion}, {"command", command}, {"config", config_echo(leaf)},
                  {"payload", report.payload}};
      if (common.stamp) env["timestamp"] = utc_now();
      body = env.dump(2) + "\n";
    } else if (common.format == "csv") {
      body = report.csv;
    } else {
      body = report.text;
    }
    if (common.out.empty()) {
      std::cout << body;
    } else {
      std::ofstream out(common.out, std::ios::binary);
      if (!out) throw ValidationError("cannot write " + common.out);
      out << body;
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ode::StepUnderflow& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
