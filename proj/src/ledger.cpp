#include "q8/ledger.hpp"

#include <cstdio>
#include <map>

#include "q8/dynamics.hpp"
#include "q8/hopf.hpp"
#include "q8/network.hpp"
#include "q8/stability.hpp"
#include "q8/torus.hpp"

namespace q8::ledger {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string prm_text(const torus::Params& p) {
  return "(u, eps, q) = (" + fmt(p.u) + ", " + fmt(p.epsilon) + ", " + fmt(p.q) + ")";
}

json entry(std::string category, std::string item, std::string printed, std::string derived,
           std::string note) {
  return json{{"category", std::move(category)},
              {"item", std::move(item)},
              {"printed", std::move(printed)},
              {"derived", std::move(derived)},
              {"note", std::move(note)}};
}

void element_rows(const group::GroupTable& t, json& out) {
  for (const auto& r : group::audit_element_table(t)) {
    if (r.verdict == group::Verdict::Match) continue;
    out.push_back(entry("element_table", r.label, r.printed, r.corrected,
                        std::string(group::to_string(r.verdict)) + (r.note.empty() ? "" : ": " + r.note)));
  }
}

void wiring_rows(const group::GroupTable& t, json& out) {
  const auto net = network::build_network(group::build_cayley_graph(t),
                                          network::builtin_coupling("decay", "diffusive", "mixed"));
  for (const auto& r : network::audit_wiring(net)) {
    if (r.verdict == group::Verdict::Match) continue;
    out.push_back(entry("wiring", r.label, r.printed, r.corrected, r.note));
  }
}

void isotropy_rows(const group::GroupTable& t, json& out) {
  for (const auto& r : torus::isotropy_catalog(t)) {
    std::string note;
    if (r.verdict == torus::RowVerdict::Failed) {
      note = "fixed-point family fails at " + std::to_string(r.failures) + " of " +
             std::to_string(r.samples) + " samples";
    }
    for (const auto& f : r.flags) note += (note.empty() ? "" : "; ") + f;
    if (note.empty()) continue;
    std::string derived;
    if (r.corrected) derived = r.corrected->exists ? r.corrected->text : "no fixed point";
    out.push_back(entry("isotropy_table", "row " + std::to_string(r.row) + " " + r.entry.name,
                        r.entry.family_text(), derived, note));
  }
}

void hopf_rows(json& out) {
  hopf::HopfCoeffs c;
  c.A_N = 1.0;
  c.B = 1.0;
  c.C = -1.0;
  for (const auto& b : hopf::classify_branches(c)) {
    if (b.stability == b.sign_rule) continue;
    out.push_back(entry("hopf_branch_stability", b.orbit_type + " at A_N = 1, B = 1, C = -1",
                        std::string(hopf::to_string(b.sign_rule)),
                        std::string(hopf::to_string(b.stability)),
                        "sign conditions of the branch-stability theorem omit the trace Re B of the "
                        "transverse block; with Re B > 0 the block has an unstable eigenvalue"));
  }
  for (const auto& row : hopf::isotropy_table_c2()) {
    if (row.generators_fix_family) continue;
    out.push_back(entry("hopf_isotropy_table", row.q8_isotropy + " " + row.fix, row.d8_isotropy, "",
                        "listed generators do not fix the family, residual " + fmt(row.max_residual)));
  }
}

void existence_rows(json& out) {
  for (const torus::Params& p : {torus::Params{-1, 0.1, -1.0}, torus::Params{-1, 0.1, -0.5}}) {
    const auto c = stability::classify(p);
    out.push_back(entry("existence_condition", prm_text(p), c.existence_printed ? "satisfied" : "not satisfied",
                        std::string("with |u|/2: ") + (c.existence_abs ? "satisfied" : "not satisfied"),
                        "|eps| < u/2 is unsatisfiable for u < 0 while the stable regions require u < 0"));
  }
}

void rho_rows(json& out) {
  for (const torus::Params& p : {torus::Params{-1, 0.1, -0.5}, torus::Params{-1, 0.1, -1.0}}) {
    const auto r = stability::rho_closed_form(p);
    out.push_back(entry("closed_form_rho", prm_text(p), fmt(r.rho), fmt(r.rho_abs),
                        "closed form is negative for u < 0 because u + 2 eps < 0 appears in every "
                        "denominator; the index definition uses positive magnitudes"));
  }
}

void cycle_rows(const group::GroupTable& t, json& out) {
  const dynamics::ConnectionOptions opt;
  for (const torus::Params& p : {torus::Params{-1, 0.1, -1.0}, torus::Params{-1, 0.1, -0.5}}) {
    const auto graph = dynamics::connection_graph(p, opt, t);
    if (dynamics::detect_cycle(graph)) continue;
    std::string derived;
    for (const auto& leg : dynamics::find_connections(p, opt, t)) {
      for (const auto& a : leg.attempts) {
        if (!derived.empty()) derived += "; ";
        derived += dynamics::vertex_label(a.from) + " axis " + std::to_string(a.axis + 1) +
                   (a.sign > 0 ? "+" : "-") + " -> " +
                   (a.reached >= 0 ? dynamics::vertex_label(a.reached) : std::string(to_string(a.verdict)));
      }
    }
    out.push_back(entry("heteroclinic_cycle", prm_text(p), "cycle Q8~a -> Q8~b -> Q8~ab -> Q8~a", derived,
                        "no cycle among the lattice equilibria; the origin is a sink attracting the "
                        "unstable manifolds"));
  }
  const torus::Params p{1, 0.1, -0.25};
  const auto rep = stability::analyze(p, opt, t);
  if (rep.rho && rep.rho->rho > 1.0) {
    out.push_back(entry("unstable_region_index", prm_text(p), "completely unstable (u > 0)",
                        "rho_km = " + fmt(rep.rho->rho),
                        "every transverse eigenvalue is negative and the index product exceeds 1"));
  }
}

}  // namespace

json discrepancy_ledger(const group::GroupTable& t) {
  json entries = json::array();
  element_rows(t, entries);
  wiring_rows(t, entries);
  isotropy_rows(t, entries);
  hopf_rows(entries);
  existence_rows(entries);
  rho_rows(entries);
  cycle_rows(t, entries);

  std::map<std::string, int> counts;
  for (const auto& e : entries) ++counts[e["category"].get<std::string>()];
  json summary = json::object();
  for (const auto& [k, v] : counts) summary[k] = v;
  return json{{"entries", entries}, {"counts", summary}, {"total", entries.size()}};
}

}  // namespace q8::ledger
