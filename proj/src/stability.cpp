#include "q8/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

#include "q8/angles.hpp"
#include "q8/random.hpp"

namespace q8::stability {

using dynamics::Theta3;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Theta3 wrapped_diff(const Theta3& x, const Theta3& y) {
  return {wrap_pm_pi(x[0] - y[0]), wrap_pm_pi(x[1] - y[1]), wrap_pm_pi(x[2] - y[2])};
}

double norm(const Theta3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

NodeEigenSplit split_node(int node, const std::array<double, 3>& eigs, int out_axis, int in_axis) {
  if (out_axis < 0 || out_axis > 2 || in_axis < 0 || in_axis > 2 || out_axis == in_axis) {
    throw std::invalid_argument("split_node: outgoing and incoming axes must be distinct axes");
  }
  NodeEigenSplit s;
  s.node = node;
  s.label = dynamics::vertex_label(node);
  s.out_axis = out_axis;
  s.in_axis = in_axis;
  s.transverse_axis = 3 - out_axis - in_axis;
  s.e = eigs[static_cast<std::size_t>(out_axis)];
  s.incoming_eigenvalue = eigs[static_cast<std::size_t>(in_axis)];
  s.c = std::abs(s.incoming_eigenvalue);
  s.t = eigs[static_cast<std::size_t>(s.transverse_axis)];
  s.geometry_violation = !(s.e > 0.0) || !(s.incoming_eigenvalue < 0.0);
  s.transverse_expanding = s.t > 0.0;
  return s;
}

int approach_axis(const dynamics::ConnectionResult& leg, int vertex) {
  const Theta3 d = wrapped_diff(leg.arc.back(), dynamics::vertex_location(vertex));
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(d[static_cast<std::size_t>(k)]) > std::abs(d[static_cast<std::size_t>(best)])) best = k;
  return best;
}

std::vector<NodeEigenSplit> split_eigenvalues(const dynamics::DetectedCycle& cycle,
                                              const Params& prm) {
  const std::size_t n = cycle.nodes.size();
  if (n < 2 || cycle.legs.size() != n) throw std::invalid_argument("split_eigenvalues: incomplete cycle");
  std::vector<NodeEigenSplit> out;
  bool violated = false;
  for (std::size_t i = 0; i < n; ++i) {
    const int node = cycle.nodes[i];
    const auto& outgoing = cycle.legs[i];
    const auto& incoming = cycle.legs[(i + n - 1) % n];
    const int in_axis = approach_axis(incoming, node);
    if (in_axis == outgoing.axis) {
      throw GeometryViolation("node " + dynamics::vertex_label(node) +
                                  ": incoming and outgoing connections share an axis",
                              out);
    }
    out.push_back(split_node(node, dynamics::vertex_eigenvalues(node, prm), outgoing.axis, in_axis));
    violated = violated || out.back().geometry_violation;
  }
  if (violated) {
    std::string msg = "geometry violation at";
    for (const auto& s : out)
      if (s.geometry_violation) msg += " " + s.label;
    throw GeometryViolation(msg, out);
  }
  return out;
}

ClosedFormRho rho_closed_form(const Params& prm) {
  const double u = prm.u, eps = prm.epsilon, q = prm.q;
  const double den = u + 2 * eps;
  if (den == 0.0) throw std::domain_error("rho_closed_form: u + 2 eps = 0");
  ClosedFormRho r;
  r.lower_branch = q < 0.75 * u - 0.5 * eps;
  r.rho2 = (-u + 2 * eps) / den;
  r.rho1 = r.lower_branch ? (2 * u - 4 * q) / den : r.rho2;
  r.rho = r.rho1 * r.rho2 * r.rho2;
  r.rho_abs = std::abs(r.rho);
  r.closed_form_applies = u < 0;
  return r;
}

RhoReport rho_km(const std::vector<NodeEigenSplit>& splits) {
  RhoReport r;
  for (const auto& s : splits) {
    if (!(s.e > 0.0)) throw std::invalid_argument("rho_km: expanding eigenvalue must be positive");
    double ri = std::min(s.c / s.e, 1.0 - s.t / s.e);
    if (ri == 0.0) ri = 0.0;  // no negative zero in reports
    r.rho_i.push_back(ri);
    r.rho *= ri;
    if (r.rho == 0.0) r.rho = 0.0;
    if (s.transverse_expanding) {
      r.discrepancy_notes.push_back(s.label + " has an expanding transverse eigenvalue t = " + fmt(s.t) +
                                    ", rho_i = " + fmt(ri));
    }
  }
  return r;
}

std::string_view to_string(StabilityKind k) {
  switch (k) {
    case StabilityKind::AsymptoticallyStable: return "AsymptoticallyStable";
    case StabilityKind::EssentiallyAsymptoticallyStable: return "EssentiallyAsymptoticallyStable";
    case StabilityKind::CompletelyUnstable: return "CompletelyUnstable";
    case StabilityKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

StabilityClass classify(const Params& prm) {
  const double u = prm.u, eps = prm.epsilon, q = prm.q;
  StabilityClass c;
  c.stable_bound = 0.75 * u - 0.5 * eps;
  const double sq = (-u + 2 * eps) * (-u + 2 * eps);
  if (sq != 0.0) c.essential_upper = u / 2 - std::pow(u + 2 * eps, 3) / sq;
  c.stable_region = u < 0 && q < c.stable_bound;
  c.essential_region = u < 0 && c.essential_upper && c.stable_bound < q && q < *c.essential_upper;
  c.unstable_region = u > 0;
  if (c.stable_region) {
    c.kind = StabilityKind::AsymptoticallyStable;
    c.trigger = "stable-region";
  } else if (c.essential_region) {
    c.kind = StabilityKind::EssentiallyAsymptoticallyStable;
    c.trigger = "essential-region";
  } else if (c.unstable_region) {
    c.kind = StabilityKind::CompletelyUnstable;
    c.trigger = "u>0";
  } else {
    c.trigger = "none";
  }
  c.existence_printed = std::abs(eps) < u / 2 && std::abs(eps + 2 * q) < u / 2;
  c.existence_abs = std::abs(eps) < std::abs(u) / 2 && std::abs(eps + 2 * q) < std::abs(u) / 2;
  if (u < 0) {
    c.domain_note = std::string("existence condition |eps| < u/2 cannot hold for u < 0; with |u|/2 it is ") +
                    (c.existence_abs ? "satisfied" : "not satisfied");
  } else {
    c.domain_note = std::string("existence condition as printed is ") +
                    (c.existence_printed ? "satisfied" : "not satisfied");
  }
  return c;
}

StabilityReport analyze(const Params& prm, const dynamics::ConnectionOptions& opt,
                        const group::GroupTable& t) {
  StabilityReport rep;
  rep.prm = prm;
  rep.cls = classify(prm);
  try {
    rep.closed_form = rho_closed_form(prm);
  } catch (const std::domain_error& e) {
    rep.notes.emplace_back(e.what());
  }
  if (rep.closed_form && rep.closed_form->closed_form_applies && rep.closed_form->rho < 0) {
    rep.notes.push_back("closed-form rho is negative (" + fmt(rep.closed_form->rho) +
                        ") although every Krupa-Melbourne factor uses magnitudes");
  }

  const auto graph = dynamics::connection_graph(prm, opt, t);
  rep.cycle = dynamics::detect_cycle(graph);
  if (!rep.cycle) {
    rep.notes.push_back("no heteroclinic cycle among the lattice equilibria");
    return rep;
  }
  if (!rep.cycle->visits_printed_order) {
    rep.notes.push_back("detected cycle does not visit Q8~a, Q8~b, Q8~ab in the printed order");
  }
  try {
    rep.splits = split_eigenvalues(*rep.cycle, prm);
  } catch (const GeometryViolation& e) {
    rep.geometry_error = e.what();
    rep.splits = e.splits();
    return rep;
  }
  rep.rho = rho_km(rep.splits);
  rep.rho->closed_form = rep.closed_form;
  if (rep.closed_form) {
    if (rep.cycle->nodes.size() != 3) {
      rep.rho->discrepancy_notes.push_back("closed form assumes three nodes, detected cycle has " +
                                           std::to_string(rep.cycle->nodes.size()));
    }
    if (std::abs(rep.closed_form->rho - rep.rho->rho) > 1e-9 * std::max(1.0, std::abs(rep.rho->rho))) {
      rep.rho->discrepancy_notes.push_back("closed-form rho " + fmt(rep.closed_form->rho) + " differs from rho_km " +
                                           fmt(rep.rho->rho));
    }
  }
  const bool all_t_negative = std::all_of(rep.splits.begin(), rep.splits.end(),
                                          [](const NodeEigenSplit& s) { return s.t < 0.0; });
  rep.cross_check.applicable = rep.cls.kind == StabilityKind::AsymptoticallyStable && all_t_negative;
  if (rep.cross_check.applicable) {
    rep.cross_check.holds = rep.rho->rho > 1.0;
    if (!rep.cross_check.holds) {
      rep.cross_check.note = "counterexample: classified AsymptoticallyStable but rho_km = " + fmt(rep.rho->rho);
    }
  } else if (rep.cls.kind != StabilityKind::AsymptoticallyStable && all_t_negative && rep.rho->rho > 1.0) {
    rep.cross_check.note = "rho_km = " + fmt(rep.rho->rho) + " > 1 with every t_i < 0, class " +
                           std::string(to_string(rep.cls.kind));
  }
  return rep;
}

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("Q8_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min(v, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Theta3> cycle_polyline(const dynamics::DetectedCycle& cycle, std::size_t points) {
  // Lift every leg to a contiguous path starting exactly at its source vertex.
  std::vector<std::vector<Theta3>> legs;
  std::vector<double> lengths;
  for (std::size_t i = 0; i < cycle.legs.size(); ++i) {
    std::vector<Theta3> path{dynamics::vertex_location(cycle.nodes[i])};
    for (const auto& x : cycle.legs[i].arc.x) {
      const Theta3 d = wrapped_diff(x, path.back());
      path.push_back({path.back()[0] + d[0], path.back()[1] + d[1], path.back()[2] + d[2]});
    }
    const Theta3 end = dynamics::vertex_location(cycle.nodes[(i + 1) % cycle.nodes.size()]);
    const Theta3 d = wrapped_diff(end, path.back());
    path.push_back({path.back()[0] + d[0], path.back()[1] + d[1], path.back()[2] + d[2]});
    double len = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) len += norm(wrapped_diff(path[k], path[k - 1]));
    legs.push_back(std::move(path));
    lengths.push_back(len);
  }
  double total = 0.0;
  for (double l : lengths) total += l;
  if (legs.empty() || !(total > 0.0) || points < 2 * legs.size()) {
    throw std::invalid_argument("cycle_polyline: degenerate cycle");
  }

  std::vector<Theta3> out;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    std::size_t m = i + 1 == legs.size()
                        ? points - assigned
                        : std::max<std::size_t>(2, static_cast<std::size_t>(std::round(points * lengths[i] / total)));
    m = std::min(m, points - assigned - 2 * (legs.size() - i - 1));
    assigned += m;
    const auto& path = legs[i];
    // m samples at arc lengths k * L / m, k = 0..m-1; the vertex is k = 0.
    std::size_t seg = 1;
    double walked = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double target = lengths[i] * static_cast<double>(k) / static_cast<double>(m);
      double seg_len = norm(wrapped_diff(path[seg], path[seg - 1]));
      while (seg + 1 < path.size() && walked + seg_len < target) {
        walked += seg_len;
        ++seg;
        seg_len = norm(wrapped_diff(path[seg], path[seg - 1]));
      }
      const double s = seg_len > 0.0 ? std::clamp((target - walked) / seg_len, 0.0, 1.0) : 0.0;
      const Theta3& a = path[seg - 1];
      const Theta3& b = path[seg];
      out.push_back({a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])});
    }
  }
  return out;
}

double distance_to_polyline(const Theta3& x, const std::vector<Theta3>& line) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = line.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Theta3& a = line[k];
    const Theta3 d = wrapped_diff(line[(k + 1) % n], a);
    const Theta3 w = wrapped_diff(x, a);
    const double dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    const double s = dd > 0.0 ? std::clamp((w[0] * d[0] + w[1] * d[1] + w[2] * d[2]) / dd, 0.0, 1.0) : 0.0;
    const Theta3 r{w[0] - s * d[0], w[1] - s * d[1], w[2] - s * d[2]};
    best = std::min(best, norm(r));
  }
  return best;
}

BasinProbeResult basin_probe(const Params& prm, const dynamics::DetectedCycle& cycle, double r,
                             std::size_t n, std::uint64_t seed, const ProbeOptions& opt) {
  if (!(r > 0.0)) throw std::invalid_argument("basin_probe: r must be positive");
  if (n < 100) throw std::invalid_argument("basin_probe: n must be at least 100");
  const auto line = cycle_polyline(cycle, 1000);

  double min_eig = std::numeric_limits<double>::infinity();
  for (int node : cycle.nodes)
    for (double ev : dynamics::vertex_eigenvalues(node, prm))
      if (ev != 0.0) min_eig = std::min(min_eig, std::abs(ev));
  BasinProbeResult res;
  res.r = r;
  res.n = n;
  res.seed = seed;
  res.horizon = std::isfinite(min_eig) ? std::min(1000.0, 20.0 / min_eig) : 1000.0;

  std::vector<char> returned(n, 0);
  std::vector<char> failed(n, 0);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      CounterRng rng(seed, i);
      const std::size_t base = std::min(line.size() - 1, static_cast<std::size_t>(rng.uniform() * line.size()));
      Theta3 dir{rng.normal(), rng.normal(), rng.normal()};
      const double len = norm(dir);
      Theta3 start = line[base];
      for (int k = 0; k < 3; ++k) start[k] += r * dir[k] / len;
      try {
        const auto traj = dynamics::integrate3(start, prm, res.horizon, {opt.tol});
        returned[i] = distance_to_polyline(traj.back(), line) < r / 10.0;
      } catch (const std::exception&) {
        failed[i] = 1;
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(worker_count(opt.threads), n);
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < n; ++i) {
    res.returned += returned[i] ? 1 : 0;
    res.failures += failed[i] ? 1 : 0;
  }
  res.returned_fraction = static_cast<double>(res.returned) / static_cast<double>(n);
  return res;
}

}  // namespace q8::stability
