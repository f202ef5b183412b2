#pragma once

// Embedded Dormand–Prince 5(4) integrator with cubic Hermite dense output.
//
// Error control uses the max norm of the scaled local error estimate
//   err = max_i |y5_i - y4_i| / (atol + rtol * max(|y_i|, |y_new_i|))
// and a step is accepted iff err <= 1. The max norm is invariant under
// permutations of the state components, so permuted initial data produce
// the same step sequence.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace q8::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

class StepUnderflow : public std::runtime_error {
 public:
  StepUnderflow(double time, double step)
      : std::runtime_error(message(time, step)), time_(time), step_(step) {}
  double time() const { return time_; }
  double step() const { return step_; }

 private:
  static std::string message(double time, double step) {
    std::ostringstream os;
    os << "step size underflow at t = " << time << " (h = " << step << ")";
    return os.str();
  }
  double time_;
  double step_;
};

class NonFiniteState : public std::runtime_error {
 public:
  explicit NonFiniteState(double time)
      : std::runtime_error("non-finite state at t = " + std::to_string(time)),
        time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct Options {
  double rtol = 1e-8;
  double atol = 1e-8;
  double h0 = 0.0;  // 0 selects the automatic initial step
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 10'000'000;
};

template <std::size_t N>
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec<N>> x;
  std::vector<Vec<N>> dx;
  std::size_t rejected = 0;

  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }
  const Vec<N>& back() const { return x.back(); }

  // Cubic Hermite interpolation on the accepted step containing `time`.
  Vec<N> at(double time) const {
    if (t.size() == 1 || time <= t.front()) return x.front();
    if (time >= t.back()) return x.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
    double h = t[k + 1] - t[k];
    double s = (time - t[k]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    Vec<N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = h00 * x[k][i] + h10 * h * dx[k][i] + h01 * x[k + 1][i] +
               h11 * h * dx[k + 1][i];
    }
    return out;
  }

  std::vector<Vec<N>> sample(std::span<const double> times) const {
    std::vector<Vec<N>> out;
    out.reserve(times.size());
    for (double s : times) out.push_back(at(s));
    return out;
  }
};

namespace detail {

template <std::size_t N>
double scaled_max(const Vec<N>& v, const Vec<N>& y, const Options& o) {
  double m = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    m = std::max(m, std::abs(v[i]) / (o.atol + o.rtol * std::abs(y[i])));
  }
  return m;
}

template <std::size_t N>
bool all_finite(const Vec<N>& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

}  // namespace detail

// Integrates x' = field(t, x) from t0 to t1 > t0. `stop` is consulted after
// every accepted step; returning true ends the integration at that step.
template <std::size_t N, class Field>
Trajectory<N> integrate(Field&& field, double t0, const Vec<N>& x0, double t1,
                        const Options& opt,
                        const std::function<bool(double, const Vec<N>&)>& stop = {}) {
  if (!(t1 > t0)) throw std::invalid_argument("integrate: t_end must exceed t_start");
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) {
    throw std::invalid_argument("integrate: tolerances must be positive");
  }

  // Dormand–Prince tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Trajectory<N> traj;
  double t = t0;
  Vec<N> y = x0;
  if (!detail::all_finite(y)) throw NonFiniteState(t);
  Vec<N> k1 = field(t, y);
  if (!detail::all_finite(k1)) throw NonFiniteState(t);
  traj.t.push_back(t);
  traj.x.push_back(y);
  traj.dx.push_back(k1);

  double h = opt.h0;
  if (h <= 0.0) {
    double d0 = detail::scaled_max(y, y, opt);
    double d1 = detail::scaled_max(k1, y, opt);
    double h_trial = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h_trial = std::min(h_trial, t1 - t0);
    Vec<N> y1{};
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h_trial * k1[i];
    Vec<N> f1 = field(t + h_trial, y1);
    Vec<N> diff{};
    for (std::size_t i = 0; i < N; ++i) diff[i] = f1[i] - k1[i];
    double d2 = detail::scaled_max(diff, y, opt) / h_trial;
    double big = std::max(d1, d2);
    double h_alt = big <= 1e-15 ? std::max(1e-6, h_trial * 1e-3) : std::pow(0.01 / big, 0.2);
    h = std::min(100.0 * h_trial, h_alt);
  }
  h = std::min({h, opt.h_max, t1 - t0});

  Vec<N> k2, k3, k4, k5, k6, k7, ytmp, ynew;
  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps) throw StepUnderflow(t, h);
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw StepUnderflow(t, h);
    }

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    k2 = field(t + c2 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = field(t + c3 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = field(t + c4 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = field(t + c5 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                            a65 * k5[i]);
    k6 = field(t + h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = field(t + h, ynew);

    double err = 0.0;
    bool finite = detail::all_finite(ynew) && detail::all_finite(k7);
    if (finite) {
      for (std::size_t i = 0; i < N; ++i) {
        double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                        e7 * k7[i]);
        double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err = std::max(err, std::abs(e) / sc);
      }
    }

    if (finite && err <= 1.0) {
      t = last ? t1 : t + h;
      y = ynew;
      k1 = k7;
      traj.t.push_back(t);
      traj.x.push_back(y);
      traj.dx.push_back(k1);
      if (stop && stop(t, y)) break;
      double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::min(h * fac, opt.h_max);
    } else {
      ++traj.rejected;
      double fac = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.25;
      h *= fac;
    }
  }
  return traj;
}

}  // namespace q8::ode
