#include "q8/torus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "q8/angles.hpp"

namespace q8::torus {

using group::kCells;

Phase16 phase_shift(const Phase16& p, double theta) {
  Phase16 out{};
  for (int i = 0; i < kCells; ++i) out[i] = wrap_2pi(p[i] + theta);
  return out;
}

Phase16 group_phase_action(const group::Perm16& g, double theta, const Phase16& p) {
  Phase16 moved{};
  for (int i = 0; i < kCells; ++i) moved[g.image0(i)] = p[i];
  return phase_shift(moved, theta);
}

double circular_distance(const Phase16& x, const Phase16& y) {
  double d = 0.0;
  for (int i = 0; i < kCells; ++i) d = std::max(d, q8::circular_distance(x[i], y[i]));
  return d;
}

namespace {

std::string quarter_pi_text(int k) {
  k = ((k % 8) + 8) % 8;
  if (k == 0) return "0";
  int g = std::gcd(k, 4);
  int num = k / g, den = 4 / g;
  std::string s = num == 1 ? "pi" : std::to_string(num) + "pi";
  if (den != 1) s += "/" + std::to_string(den);
  return s;
}

std::string param_name(int idx, int dim) {
  return dim <= 1 ? "phi" : "phi" + std::to_string(idx + 1);
}

// "7/4" -> 7, "1" -> 4, "0" -> 0 (units of π/4).
int parse_pi_multiple(const std::string& s) {
  auto slash = s.find('/');
  int num = std::stoi(s.substr(0, slash));
  int den = slash == std::string::npos ? 1 : std::stoi(s.substr(slash + 1));
  if (4 % den != 0) throw std::logic_error("table constant is not a multiple of pi/4");
  return num * (4 / den);
}

// Compact family notation: whitespace separated components, each "c", "p",
// "pK" or "pK+c" with c a multiple of π ("3/4" means 3π/4).
std::array<AffineAngle, kCells> parse_family(const std::string& text) {
  std::istringstream is(text);
  std::array<AffineAngle, kCells> out{};
  std::string tok;
  int i = 0;
  while (is >> tok) {
    if (i >= kCells) throw std::logic_error("family has more than 16 components");
    AffineAngle a;
    if (tok[0] == 'p') {
      std::size_t pos = 1;
      int idx = 0;
      if (pos < tok.size() && std::isdigit(static_cast<unsigned char>(tok[pos]))) {
        idx = tok[pos] - '1';
        ++pos;
      }
      a.param = idx;
      if (pos < tok.size()) {
        if (tok[pos] != '+') throw std::logic_error("bad family token " + tok);
        a.quarter_pi = parse_pi_multiple(tok.substr(pos + 1));
      }
    } else {
      a.quarter_pi = parse_pi_multiple(tok);
    }
    out[i++] = a;
  }
  if (i != kCells) throw std::logic_error("family has fewer than 16 components");
  return out;
}

IsotropyEntry row(std::string name, const std::string& family,
                  std::vector<CatalogGenerator> gens, int dim) {
  return {std::move(name), parse_family(family), std::move(gens), dim};
}

}  // namespace

double AffineAngle::evaluate(const std::vector<double>& params) const {
  double v = quarter_pi * (kPi / 4.0);
  if (param >= 0) v += params.at(static_cast<std::size_t>(param));
  return wrap_2pi(v);
}

std::string AffineAngle::text(int dim) const {
  if (param < 0) return quarter_pi_text(quarter_pi);
  std::string s = param_name(param, dim);
  if (((quarter_pi % 8) + 8) % 8 != 0) s += "+" + quarter_pi_text(quarter_pi);
  return s;
}

double CatalogGenerator::phase() const { return quarter_pi * (kPi / 4.0); }

Phase16 IsotropyEntry::point(const std::vector<double>& params) const {
  Phase16 p{};
  for (int i = 0; i < kCells; ++i) p[i] = family[i].evaluate(params);
  return p;
}

std::string IsotropyEntry::family_text() const {
  std::string s = "(";
  for (int i = 0; i < kCells; ++i) {
    if (i) s += ", ";
    s += family[i].text(dim);
  }
  return s + ")";
}

const std::vector<IsotropyEntry>& printed_isotropy_table() {
  static const std::vector<IsotropyEntry> rows = {
      row("Q8", "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0", {{"a", 0}, {"b", 0}}, 0),
      row("Q8^a", "0 0 0 0 0 0 0 0 1 1 1 1 1 1 1 1", {{"b", 4}, {"ab", 4}}, 0),
      row("Q8^b", "0 1 0 1 0 1 0 1 0 1 0 1 0 1 0 1", {{"a", 4}, {"ab", 4}}, 0),
      row("Q8^ab", "0 1 0 1 0 1 0 1 0 1 0 1 0 1 0 1", {{"a", 4}, {"b", 4}}, 0),
      row("Z8^a", "0 0 0 0 0 0 0 0 p p p p p p p p", {{"a", 0}}, 1),
      row("Z8^b", "0 p 0 p 0 p 0 p 0 p 0 p 0 p 0 p", {{"b", 0}}, 1),
      row("Z8^ab", "0 p 0 p 0 p 0 p p p 0 p 0 p 0 p", {{"ab", 0}}, 1),
      row("Z8^a", "0 1 0 1 0 1 0 1 p p+1 p p+1 p p+1 p p+1", {{"a", 4}}, 1),
      row("Z8^b", "0 p 0 p 0 p 0 p p p+1 p p+1 p p+1 p p+1", {{"b", 4}}, 1),
      row("Z8^ab", "0 p 0 p 0 p 0 p p p+1 p p+1 p p+1 p p+1", {{"ab", 4}}, 1),
      row("Z8~^{a/4}",
          "0 7/4 3/2 5/4 1 3/4 1/2 1/4 p p+1/4 p+1/2 p+3/4 p+1 p+5/4 p+3/2 p+7/4",
          {{"a", 1}}, 1),
      row("Z8~^{b/4}",
          "0 p 1 p+1 p+7/4 7/4 p+3/2 3/2 p+5/4 p p+3/4 p p+1/2 p p+1/4 1/4",
          {{"b", 1}}, 1),
      row("Z8~^{ab/4}",
          "0 p 1 p+1 1/4 p+1/4 1/2 p+1/2 3/4 p+3/4 3/4 p+3/4 5/4 p+5/4 7/4 p+7/4",
          {{"ab", 1}}, 1),
      row("Z2", "0 p1 0 p1 0 p1 0 p1 p2 p3 p2 p3 p2 p3 p2 p3", {{"b^2", 0}}, 3),
      row("Z2", "0 p1 1 p1+1 0 p1 1 p1+1 p2 p3 p2+1 p3+1 p2 p3 p2+1 p3+1", {{"b^2", 4}}, 3),
  };
  return rows;
}

CorrectedFamily solve_fixed_family(const group::GroupTable& t,
                                   const std::vector<CatalogGenerator>& generators) {
  // Each generator (g, s) requires p[g(i)] = p[i] + s; propagate offsets
  // (units of π/4, mod 8) through the orbits of the generated group.
  std::vector<std::pair<group::Perm16, int>> gens;
  for (const auto& g : generators) gens.emplace_back(t.evaluate(g.element), g.quarter_pi);

  std::array<int, kCells> component{};
  component.fill(-1);
  std::array<int, kCells> offset{};
  int n_components = 0;
  CorrectedFamily out;
  out.exists = true;
  for (int start = 0; start < kCells; ++start) {
    if (component[start] >= 0) continue;
    const int comp = n_components++;
    component[start] = comp;
    offset[start] = 0;
    std::vector<int> stack{start};
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      for (const auto& [g, s] : gens) {
        // forward and backward edges
        for (int dir : {+1, -1}) {
          int j = dir > 0 ? g.image0(i) : g.inverse().image0(i);
          int off = ((offset[i] + dir * s) % 8 + 8) % 8;
          if (component[j] < 0) {
            component[j] = comp;
            offset[j] = off;
            stack.push_back(j);
          } else if (offset[j] != off) {
            out.exists = false;
          }
        }
      }
    }
  }
  if (!out.exists) {
    out.text = "no fixed point";
    return out;
  }
  // Component of cell 1 is anchored at 0; the others carry a parameter each.
  out.dim = n_components - 1;
  for (int i = 0; i < kCells; ++i) {
    out.family[i].quarter_pi = offset[i];
    out.family[i].param = component[i] == 0 ? -1 : component[i] - 1;
  }
  std::string s = "(";
  for (int i = 0; i < kCells; ++i) {
    if (i) s += ", ";
    s += out.family[i].text(out.dim);
  }
  out.text = s + ")";
  return out;
}

std::vector<CatalogRowReport> isotropy_catalog(const group::GroupTable& t) {
  const auto& rows = printed_isotropy_table();
  std::vector<double> grid;
  for (int k = 0; k < 8; ++k) grid.push_back(k * kPi / 4.0 + 0.1);

  std::vector<CatalogRowReport> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    CatalogRowReport rep;
    rep.row = r + 1;
    rep.entry = rows[r];
    const auto& e = rep.entry;

    std::vector<std::vector<double>> samples;
    const int dim = e.dim;
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= grid.size();
    for (std::size_t k = 0; k < total; ++k) {
      std::vector<double> prm(static_cast<std::size_t>(dim));
      std::size_t rem = k;
      for (int d = dim - 1; d >= 0; --d) {
        prm[static_cast<std::size_t>(d)] = grid[rem % grid.size()];
        rem /= grid.size();
      }
      samples.push_back(std::move(prm));
    }

    for (const auto& prm : samples) {
      const Phase16 p = e.point(prm);
      for (const auto& g : e.generators) {
        const Phase16 q = group_phase_action(t.evaluate(g.element), g.phase(), p);
        double d = circular_distance(p, q);
        ++rep.samples;
        if (d > 1e-9) {
          ++rep.failures;
          if (rep.failed_samples.size() < 4) {
            rep.failed_samples.push_back({prm, "(" + g.element + ", " + quarter_pi_text(g.quarter_pi) + ")", d});
          }
        }
      }
    }
    rep.verdict = rep.failures == 0 ? RowVerdict::Verified : RowVerdict::Failed;
    if (rep.verdict == RowVerdict::Failed) rep.corrected = solve_fixed_family(t, e.generators);

    int max_param = -1;
    for (const auto& a : e.family) max_param = std::max(max_param, a.param);
    if (max_param + 1 != e.dim) {
      rep.flags.push_back("printed dim " + std::to_string(e.dim) + " but family has " +
                          std::to_string(max_param + 1) + " parameters");
    }
    for (std::size_t o = 0; o < rows.size(); ++o) {
      if (o == r) continue;
      if (rows[o].family == e.family) {
        rep.flags.push_back("fixed-point string identical to row " + std::to_string(o + 1) +
                            " (" + rows[o].name + ")");
      }
      if (rows[o].name == e.name) {
        rep.flags.push_back("name shared with row " + std::to_string(o + 1));
      }
    }
    out.push_back(std::move(rep));
  }
  return out;
}

const std::array<Phase16, 3>& plane_basis() {
  static const std::array<Phase16, 3> basis = [] {
    std::array<Phase16, 3> b{};
    for (int i = 0; i < kCells; ++i) {
      const bool first_half = i < 8;
      const bool odd_cell = i % 2 == 0;  // cells 1, 3, 5, ...
      b[0][i] = -(first_half ? 1.0 : -1.0) / 8.0;
      b[1][i] = -(odd_cell ? 1.0 : -1.0) / 8.0;
      b[2][i] = -((odd_cell == first_half) ? 1.0 : -1.0) / 8.0;
    }
    return b;
  }();
  return basis;
}

Phase16 embed_unreduced(const Theta3& t) {
  const auto& e = plane_basis();
  Phase16 p{};
  for (int i = 0; i < kCells; ++i) p[i] = t[0] * e[0][i] + t[1] * e[1][i] + t[2] * e[2][i];
  return p;
}

Phase16 embed(const Theta3& t) {
  Phase16 p = embed_unreduced(t);
  for (auto& v : p) v = wrap_2pi(v);
  return p;
}

Projection project(const Phase16& p, const Theta3& reference) {
  const auto& e = plane_basis();
  const Phase16 ref = embed_unreduced(reference);
  Phase16 lifted{};
  for (int i = 0; i < kCells; ++i) lifted[i] = ref[i] + wrap_pm_pi(p[i] - ref[i]);

  // The basis vectors are mutually orthogonal with squared norm 1/4.
  Projection out{};
  for (int n = 0; n < 3; ++n) {
    double dot = 0.0;
    for (int i = 0; i < kCells; ++i) dot += e[n][i] * lifted[i];
    out.theta[n] = 4.0 * dot;
  }
  const Phase16 back = embed_unreduced(out.theta);
  double r2 = 0.0;
  for (int i = 0; i < kCells; ++i) r2 += (lifted[i] - back[i]) * (lifted[i] - back[i]);
  out.residual = std::sqrt(r2);
  return out;
}

std::vector<PlaneSymmetry> plane_symmetries(const group::GroupTable& t) {
  const auto& e = plane_basis();
  std::vector<PlaneSymmetry> out;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& g = t.element(k);
    PlaneSymmetry sym;
    sym.element = t.name(k);
    bool preserves = true;
    for (int n = 0; n < 3 && preserves; ++n) {
      Phase16 moved{};
      for (int i = 0; i < kCells; ++i) moved[g.image0(i)] = e[n][i];
      Phase16 back{};
      for (int m = 0; m < 3; ++m) {
        double dot = 0.0;
        for (int i = 0; i < kCells; ++i) dot += e[m][i] * moved[i];
        sym.matrix[m][n] = 4.0 * dot;
        for (int i = 0; i < kCells; ++i) back[i] += sym.matrix[m][n] * e[m][i];
      }
      for (int i = 0; i < kCells; ++i) preserves = preserves && std::abs(back[i] - moved[i]) < 1e-12;
    }
    if (preserves) out.push_back(std::move(sym));
  }
  return out;
}

Theta3 reduced_field(const Theta3& t, const Params& prm) {
  const double u = prm.u, eps = prm.epsilon, q = prm.q;
  const double s1 = std::sin(t[0]), s2 = std::sin(t[1]), s3 = std::sin(t[2]);
  const double c1 = std::cos(t[0]), c2 = std::cos(t[1]), c3 = std::cos(t[2]);
  return {u * s1 * c2 + eps * std::sin(2 * t[0]) * std::cos(2 * t[1]),
          u * s2 * c3 + eps * std::sin(2 * t[1]) * std::cos(2 * t[2]),
          u * s3 * c1 + eps * std::sin(2 * t[2]) * std::cos(2 * t[0]) +
              q * (1 - c1) * std::sin(2 * t[2])};
}

Theta3 factored_field(const Theta3& t, const Params& prm) {
  const double u = prm.u, eps = prm.epsilon, q = prm.q;
  const double s1 = std::sin(t[0]), s2 = std::sin(t[1]), s3 = std::sin(t[2]);
  const double c1 = std::cos(t[0]), c2 = std::cos(t[1]), c3 = std::cos(t[2]);
  return {s1 * (u * c2 + 2 * eps * c1 * std::cos(2 * t[1])),
          s2 * (u * c3 + 2 * eps * c2 * std::cos(2 * t[2])),
          s3 * (u * c1 + 2 * eps * std::cos(2 * t[0]) * c3 + 2 * q * (1 - c1) * c3)};
}

}  // namespace q8::torus
