#include "q8/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "q8/angles.hpp"

namespace q8::dynamics {

Mat3 jacobian(const Theta3& t, const Params& prm) {
  const double u = prm.u, e = prm.epsilon, q = prm.q;
  const double s1 = std::sin(t[0]), s2 = std::sin(t[1]), s3 = std::sin(t[2]);
  const double c1 = std::cos(t[0]), c2 = std::cos(t[1]), c3 = std::cos(t[2]);
  const double S1 = std::sin(2 * t[0]), S2 = std::sin(2 * t[1]), S3 = std::sin(2 * t[2]);
  const double C1 = std::cos(2 * t[0]), C2 = std::cos(2 * t[1]), C3 = std::cos(2 * t[2]);
  Mat3 j{};
  j[0][0] = u * c1 * c2 + 2 * e * C1 * C2;
  j[0][1] = -u * s1 * s2 - 2 * e * S1 * S2;
  j[1][1] = u * c2 * c3 + 2 * e * C2 * C3;
  j[1][2] = -u * s2 * s3 - 2 * e * S2 * S3;
  j[2][0] = -u * s3 * s1 - 2 * e * S3 * S1 + q * s1 * S3;
  j[2][2] = u * c3 * c1 + 2 * e * C3 * C1 + 2 * q * (1 - c1) * C3;
  return j;
}

Mat3 finite_difference_jacobian(const Theta3& t, const Params& prm, double step) {
  Mat3 j{};
  for (int k = 0; k < 3; ++k) {
    Theta3 hi = t, lo = t;
    hi[k] += step;
    lo[k] -= step;
    const Theta3 fh = torus::factored_field(hi, prm);
    const Theta3 fl = torus::factored_field(lo, prm);
    for (int i = 0; i < 3; ++i) j[i][k] = (fh[i] - fl[i]) / (2 * step);
  }
  return j;
}

std::array<std::complex<double>, 3> eigenvalues(const Mat3& m) {
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) a(i, k) = m[i][k];
  Eigen::EigenSolver<Eigen::Matrix3d> solver(a, false);
  const auto ev = solver.eigenvalues();
  std::array<std::complex<double>, 3> out{ev(0), ev(1), ev(2)};
  std::sort(out.begin(), out.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return out;
}

Theta3 vertex_location(int v) {
  return {(v & 1) ? kPi : 0.0, (v & 2) ? kPi : 0.0, (v & 4) ? kPi : 0.0};
}

std::string vertex_label(int v) {
  switch (v) {
    case kOrigin: return "Q8";
    case kQa: return "Q8~a";
    case kQb: return "Q8~b";
    case kQab: return "Q8~ab";
    default: break;
  }
  std::string s = "(";
  for (int k = 0; k < 3; ++k) {
    if (k) s += ",";
    s += (v >> k) & 1 ? "pi" : "0";
  }
  return s + ")";
}

std::array<double, 3> vertex_eigenvalues(int v, const Params& prm) {
  const Mat3 j = jacobian(vertex_location(v), prm);
  return {j[0][0], j[1][1], j[2][2]};
}

const std::array<EigenFormulaRow, 4>& eigenvalue_formulas() {
  static const std::array<EigenFormulaRow, 4> rows = {{
      {"Q8", kOrigin, {"u + 2eps", "u + 2eps", "u + 2eps"}},
      {"Q8~a", kQa, {"-u + 2eps", "u + 2eps", "-u + 2eps + 4q"}},
      {"Q8~b", kQb, {"-u + 2eps", "-u + 2eps", "u + 2eps"}},
      {"Q8~ab", kQab, {"u + 2eps", "-u + 2eps", "-u + 2eps"}},
  }};
  return rows;
}

std::array<double, 3> formula_eigenvalues(std::size_t row, const Params& prm) {
  const double plus = prm.u + 2 * prm.epsilon;
  const double minus = -prm.u + 2 * prm.epsilon;
  switch (row) {
    case 0: return {plus, plus, plus};
    case 1: return {minus, plus, minus + 4 * prm.q};
    case 2: return {minus, minus, plus};
    case 3: return {plus, minus, minus};
    default: throw std::out_of_range("formula_eigenvalues: row");
  }
}

std::array<EquilibriumInfo, 4> equilibria(const Params& prm) {
  std::array<EquilibriumInfo, 4> out;
  for (std::size_t r = 0; r < 4; ++r) {
    auto& info = out[r];
    const auto& row = eigenvalue_formulas()[r];
    info.isotropy_name = row.isotropy;
    info.location = vertex_location(row.vertex);
    info.jacobian = jacobian(info.location, prm);
    info.table_values = formula_eigenvalues(r, prm);
    const Theta3 f = torus::factored_field(info.location, prm);
    info.field_norm = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
    const Mat3 fd = finite_difference_jacobian(info.location, prm);
    for (int i = 0; i < 3; ++i) {
      info.eigenvalues[i] = info.jacobian[i][i];
      info.max_table_deviation =
          std::max(info.max_table_deviation, std::abs(info.eigenvalues[i] - info.table_values[i]));
      for (int k = 0; k < 3; ++k) {
        info.max_fd_deviation = std::max(info.max_fd_deviation, std::abs(fd[i][k] - info.jacobian[i][k]));
        if (i != k) info.max_offdiagonal = std::max(info.max_offdiagonal, std::abs(info.jacobian[i][k]));
      }
    }
  }
  return out;
}

namespace {

ode::Options options_for(double tol) {
  ode::Options o;
  o.rtol = tol;
  o.atol = tol;
  return o;
}

double lattice_distance(const Theta3& x, int v) {
  const Theta3 p = vertex_location(v);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = wrap_pm_pi(x[k] - p[k]);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

Trajectory3 integrate3(const Theta3& start, const Params& prm, double T,
                       const IntegrationOptions& opt) {
  if (!(T > 0.0)) throw std::invalid_argument("integrate3: T must be positive");
  return ode::integrate<3>([&](double, const Theta3& x) { return torus::factored_field(x, prm); },
                           0.0, start, T, options_for(opt.tol));
}

Trajectory3 integrate3_reversed(const Theta3& start, const Params& prm, double T,
                                const IntegrationOptions& opt) {
  if (!(T > 0.0)) throw std::invalid_argument("integrate3_reversed: T must be positive");
  return ode::integrate<3>(
      [&](double, const Theta3& x) {
        Theta3 f = torus::factored_field(x, prm);
        for (auto& v : f) v = -v;
        return f;
      },
      0.0, start, T, options_for(opt.tol));
}

double cofactor_residual(int axis, const Theta3& t, const Params& prm) {
  const double u = prm.u, e = prm.epsilon, q = prm.q;
  const Theta3 f = torus::reduced_field(t, prm);
  const double c1 = std::cos(t[0]), c2 = std::cos(t[1]), c3 = std::cos(t[2]);
  double k = 0.0;
  switch (axis) {
    case 0: k = c1 * (u * c2 + 2 * e * c1 * std::cos(2 * t[1])); break;
    case 1: k = c2 * (u * c3 + 2 * e * c2 * std::cos(2 * t[2])); break;
    case 2: k = c3 * (u * c1 + 2 * e * std::cos(2 * t[0]) * c3 + 2 * q * (1 - c1) * c3); break;
    default: throw std::out_of_range("cofactor_residual: axis");
  }
  const double xh = std::cos(t[axis]) * f[axis];
  return std::abs(xh - k * std::sin(t[axis]));
}

InvariantResidual invariant_surface_check(int axis, const Theta3& start, const Params& prm,
                                          double T, double tol) {
  if (axis < 0 || axis > 2) throw std::out_of_range("invariant_surface_check: axis");
  if (!(std::abs(std::sin(start[axis])) < 1e-12)) {
    throw std::invalid_argument("invariant_surface_check: start is not on the surface");
  }
  InvariantResidual r;
  r.axis = axis;
  r.surface = "sin(theta" + std::to_string(axis + 1) + ")";
  const Trajectory3 traj = integrate3(start, prm, T, {tol});
  for (const auto& x : traj.x) {
    r.max_drift = std::max(r.max_drift, std::abs(std::sin(x[axis])));
    r.max_cofactor_residual = std::max(r.max_cofactor_residual, cofactor_residual(axis, x, prm));
  }
  return r;
}

std::string_view to_string(ConnectionVerdict v) {
  switch (v) {
    case ConnectionVerdict::Connected: return "connected";
    case ConnectionVerdict::Misrouted: return "misrouted";
    case ConnectionVerdict::Timeout: return "timeout";
    case ConnectionVerdict::Diverged: return "diverged";
    case ConnectionVerdict::NoUnstableDirection: return "no_unstable_direction";
  }
  return "?";
}

std::vector<int> conjugate_vertices(int v, const group::GroupTable& t) {
  std::vector<int> out;
  const Theta3 p = vertex_location(v);
  for (const auto& sym : torus::plane_symmetries(t)) {
    Theta3 img{};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) img[i] += sym.matrix[i][k] * p[k];
    for (int w = 0; w < kVertices; ++w) {
      if (lattice_distance(img, w) < 1e-9 && std::find(out.begin(), out.end(), w) == out.end()) {
        out.push_back(w);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ConnectionResult shoot(const Params& prm, int from, int axis, int sign, int target,
                       const ConnectionOptions& opt, const group::GroupTable& t) {
  ConnectionResult r;
  r.from = from;
  r.to = target;
  r.axis = axis;
  r.sign = sign;
  r.seed_offset = opt.delta;
  r.departure_eigenvalue = vertex_eigenvalues(from, prm)[static_cast<std::size_t>(axis)];
  for (int w : conjugate_vertices(target, t)) r.conjugates_of_target.push_back(vertex_label(w));

  Theta3 start = vertex_location(from);
  start[static_cast<std::size_t>(axis)] += sign * opt.delta;
  if (!(r.departure_eigenvalue > 0.0)) {
    r.verdict = ConnectionVerdict::NoUnstableDirection;
    r.arc.t = {0.0};
    r.arc.x = {start};
    r.arc.dx = {torus::factored_field(start, prm)};
    r.terminal_distance = lattice_distance(start, target);
    return r;
  }

  const double leave_radius = 10.0 * std::max(opt.delta, opt.tol);
  bool left = false;
  bool diverged = false;
  int reached = -1;
  auto stop = [&](double, const Theta3& x) {
    for (double v : x) {
      if (!(std::abs(v) < 1e6)) {
        diverged = true;
        return true;
      }
    }
    if (!left) {
      left = lattice_distance(x, from) > leave_radius;
      if (!left) return false;
    }
    for (int w = 0; w < kVertices; ++w) {
      if (lattice_distance(x, w) < opt.tol) {
        reached = w;
        return true;
      }
    }
    return false;
  };
  r.arc = ode::integrate<3>(
      [&](double, const Theta3& x) { return torus::factored_field(x, prm); }, 0.0, start,
      opt.t_max, options_for(opt.integrator_tol), stop);

  r.reached = reached;
  if (diverged) {
    r.verdict = ConnectionVerdict::Diverged;
  } else if (reached < 0) {
    r.verdict = ConnectionVerdict::Timeout;
  } else {
    const auto conj = conjugate_vertices(target, t);
    const bool hit = std::find(conj.begin(), conj.end(), reached) != conj.end();
    r.verdict = hit ? ConnectionVerdict::Connected : ConnectionVerdict::Misrouted;
  }
  r.terminal_distance = lattice_distance(r.arc.back(), reached >= 0 ? reached : target);
  return r;
}

bool LegReport::connected() const {
  return std::any_of(attempts.begin(), attempts.end(), [](const ConnectionResult& c) {
    return c.verdict == ConnectionVerdict::Connected;
  });
}

std::array<LegReport, 3> find_connections(const Params& prm, const ConnectionOptions& opt,
                                          const group::GroupTable& t) {
  if (!(opt.delta > 0.0 && opt.delta <= 1e-2)) {
    throw std::invalid_argument("find_connections: delta must lie in (0, 1e-2]");
  }
  const std::array<std::pair<int, int>, 3> legs = {{{kQa, kQb}, {kQb, kQab}, {kQab, kQa}}};
  std::array<LegReport, 3> out;
  for (std::size_t l = 0; l < legs.size(); ++l) {
    auto [from, to] = legs[l];
    out[l].from = from;
    out[l].to = to;
    const auto eig = vertex_eigenvalues(from, prm);
    bool any = false;
    for (int axis = 0; axis < 3; ++axis) {
      if (!(eig[static_cast<std::size_t>(axis)] > 0.0)) continue;
      any = true;
      for (int sign : {+1, -1}) out[l].attempts.push_back(shoot(prm, from, axis, sign, to, opt, t));
    }
    if (!any) {
      // Precondition violation: the source has no unstable direction.
      out[l].attempts.push_back(shoot(prm, from, 0, +1, to, opt, t));
    }
  }
  return out;
}

ConnectionGraph connection_graph(const Params& prm, const ConnectionOptions& opt,
                                 const group::GroupTable& t) {
  ConnectionGraph g;
  g.prm = prm;
  for (int v = 0; v < kVertices; ++v) {
    const auto eig = vertex_eigenvalues(v, prm);
    for (int axis = 0; axis < 3; ++axis) {
      if (!(eig[static_cast<std::size_t>(axis)] > 0.0)) continue;
      // Target is the lattice point across the axis; the verdict records
      // where the arc actually ends.
      g.edges.push_back(shoot(prm, v, axis, +1, v ^ (1 << axis), opt, t));
    }
  }
  return g;
}

std::optional<DetectedCycle> detect_cycle(const ConnectionGraph& g) {
  // adjacency from arcs that reached a lattice point
  std::array<std::vector<std::pair<int, std::size_t>>, kVertices> adj;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    if (e.reached < 0 || e.reached == e.from) continue;
    if (e.verdict != ConnectionVerdict::Connected && e.verdict != ConnectionVerdict::Misrouted) continue;
    auto& list = adj[static_cast<std::size_t>(e.from)];
    if (std::none_of(list.begin(), list.end(), [&](auto& p) { return p.first == e.reached; })) {
      list.emplace_back(e.reached, k);
    }
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());

  std::vector<std::vector<int>> cycles;
  std::vector<int> path;
  std::array<bool, kVertices> on_path{};
  std::function<void(int, int)> dfs = [&](int start, int v) {
    for (auto [w, idx] : adj[static_cast<std::size_t>(v)]) {
      (void)idx;
      if (w == start) {
        cycles.push_back(path);
      } else if (w > start && !on_path[static_cast<std::size_t>(w)]) {
        on_path[static_cast<std::size_t>(w)] = true;
        path.push_back(w);
        dfs(start, w);
        path.pop_back();
        on_path[static_cast<std::size_t>(w)] = false;
      }
    }
  };
  for (int s = 0; s < kVertices; ++s) {
    path = {s};
    on_path.fill(false);
    on_path[static_cast<std::size_t>(s)] = true;
    dfs(s, s);
  }
  if (cycles.empty()) return std::nullopt;

  auto printed_order = [](const std::vector<int>& c) {
    auto pos = [&](int v) {
      auto it = std::find(c.begin(), c.end(), v);
      return it == c.end() ? -1 : static_cast<int>(it - c.begin());
    };
    int pa = pos(kQa), pb = pos(kQb), pab = pos(kQab);
    if (pa < 0 || pb < 0 || pab < 0) return false;
    const int n = static_cast<int>(c.size());
    auto rel = [&](int p) { return (p - pa + n) % n; };
    return rel(pb) < rel(pab);
  };
  std::stable_sort(cycles.begin(), cycles.end(), [&](const auto& x, const auto& y) {
    const bool ox = printed_order(x), oy = printed_order(y);
    if (ox != oy) return ox;
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  });

  DetectedCycle out;
  out.nodes = cycles.front();
  out.visits_printed_order = printed_order(out.nodes);
  if (out.visits_printed_order) {
    auto it = std::find(out.nodes.begin(), out.nodes.end(), kQa);
    std::rotate(out.nodes.begin(), it, out.nodes.end());
  }
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    const int v = out.nodes[i];
    const int w = out.nodes[(i + 1) % out.nodes.size()];
    for (auto [to, idx] : adj[static_cast<std::size_t>(v)]) {
      if (to == w) {
        out.legs.push_back(g.edges[idx]);
        break;
      }
    }
  }
  return out;
}

}  // namespace q8::dynamics
