/* Copyright 2026 The SpinForge Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Fixed-duration pulse optimization (GRAPE) with amplitude-bounded controls.
//
// Fidelity Phi = 2^-N Re Tr[U_f^dagger U_M ... U_1] is maximized over
// piecewise-constant (wx, wy). Controls are optimized in polar form
// (w_r / Omega, theta) so the bound w_r <= Omega becomes a box, handled by
// BoundedBfgs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spinforge/bounded_bfgs.hpp"
#include "spinforge/matrix_kernel.hpp"
#include "spinforge/parallel.hpp"
#include "spinforge/propagation.hpp"
#include "spinforge/spin_model.hpp"

namespace spinforge {

enum class GradientMode {
  first_order,  // dU_j ~ -i dt (dH/dw) U_j
  exact,        // derivative of exp through the eigendecomposition
};

struct OptimizerConfig {
  double phi0 = 0.9999;
  int max_iters = 2000;
  double grad_tol = 1e-10;
  int restarts = 5;
  std::uint64_t seed = 1;
  GradientMode gradient_mode = GradientMode::first_order;
  int smoothing_window = 3;
  int smoothing_rounds = 10;
  double smoothness_threshold = 0.15;  // max |w_r(j+1) - w_r(j)| / Omega
  unsigned threads = 0;                // 0: SPINFORGE_THREADS or hardware
  int stall_window = 0;                // 0: run every restart to max_iters

  void validate() const {
    if (!(phi0 > 0.0 && phi0 <= 1.0)) throw ModelError("OptimizerConfig: phi0 must be in (0, 1]");
    if (max_iters < 0 || restarts < 1 || stall_window < 0) {
      throw ModelError("OptimizerConfig: bad iteration counts");
    }
    if (smoothing_window < 1 || smoothing_window % 2 == 0) {
      throw ModelError("OptimizerConfig: smoothing window must be odd and >= 1");
    }
    if (smoothing_rounds < 1 || !(smoothness_threshold > 0.0)) {
      throw ModelError("OptimizerConfig: bad smoothing settings");
    }
  }
};

struct WeightedPoint {
  double value = 0.0;
  double weight = 0.0;
};

// Inhomogeneity ensemble: multiplicative RF scale x additive offset (Hz)
// applied to every delta_k omega0. Members are the Cartesian product.
struct EnsembleSpec {
  std::vector<WeightedPoint> rf_scale_points{{0.95, 1.0 / 3}, {1.0, 1.0 / 3}, {1.05, 1.0 / 3}};
  std::vector<WeightedPoint> shift_offset_points_hz{{-25.0, 1.0 / 3}, {0.0, 1.0 / 3}, {25.0, 1.0 / 3}};

  void validate() const {
    for (const auto* pts : {&rf_scale_points, &shift_offset_points_hz}) {
      if (pts->empty()) throw ModelError("EnsembleSpec: empty point list");
      double sum = 0.0;
      for (const auto& p : *pts) {
        if (!(p.weight > 0.0) || !std::isfinite(p.value)) {
          throw ModelError("EnsembleSpec: weights must be positive");
        }
        sum += p.weight;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ModelError("EnsembleSpec: weights must sum to 1");
    }
  }
};

struct GradientSample {
  double wx = 0.0;  // dPhi/dwx(j), per rad/s
  double wy = 0.0;
};

// Ensemble-weighted fidelity and its gradient with respect to the nominal
// controls. Without an ensemble there is a single member of weight 1.
class FidelityObjective {
 public:
  FidelityObjective(const SpinSystem& sys, const TargetTransformation& target,
                    const EnsembleSpec* ensemble = nullptr)
      : n_spins_(sys.n_spins()), target_adj_(target.composite().adjoint()) {
    if (target.n_spins() != sys.n_spins()) throw ModelError("FidelityObjective: spin count mismatch");
    if (!ensemble) {
      members_.push_back({ControlModel(sys), 1.0});
      return;
    }
    ensemble->validate();
    for (const auto& off : ensemble->shift_offset_points_hz) {
      const SpinSystem shifted = sys.with_shift_offset(kTwoPi * off.value);
      for (const auto& rf : ensemble->rf_scale_points) {
        ControlModel m(shifted);
        m.ctrl_x *= rf.value;
        m.ctrl_y *= rf.value;
        members_.push_back({std::move(m), off.weight * rf.weight});
      }
    }
  }

  std::size_t members() const { return members_.size(); }
  double member_weight(std::size_t i) const { return members_[i].weight; }

  double member_value(std::size_t i, const PulseSequence& pulse) const {
    return trace_of(target_adj_ * propagate(members_[i].model, pulse));
  }

  double value(const PulseSequence& pulse) const {
    double phi = 0.0;
    for (std::size_t i = 0; i < members_.size(); ++i) phi += members_[i].weight * member_value(i, pulse);
    return phi;
  }

  double value_and_gradient(const PulseSequence& pulse, GradientMode mode,
                            std::vector<GradientSample>& grad) const {
    grad.assign(pulse.size(), GradientSample{});
    double phi = 0.0;
    for (const auto& m : members_) phi += member_gradient(m, pulse, mode, grad);
    return phi;
  }

 private:
  struct Member {
    ControlModel model;
    double weight;
  };

  double trace_of(const ComplexMatrix& m) const {
    return m.trace().real() / static_cast<double>(m.rows());
  }

  // Adds weight * dPhi/dw into grad, returns weight * Phi.
  double member_gradient(const Member& mem, const PulseSequence& pulse, GradientMode mode,
                         std::vector<GradientSample>& grad) const {
    const ControlModel& model = mem.model;
    const std::size_t steps = pulse.size();
    const double dt = pulse.dt();
    const Eigen::Index dim = model.drift.rows();
    const double scale = mem.weight / static_cast<double>(dim);

    std::vector<HermitianEigen> eig;
    std::vector<ComplexMatrix> step(steps);
    std::vector<ComplexMatrix> fwd(steps + 1);
    eig.reserve(steps);
    fwd[0] = identity(dim);
    for (std::size_t j = 0; j < steps; ++j) {
      eig.emplace_back(model.hamiltonian(pulse[j].wx, pulse[j].wy));
      step[j] = eig[j].exp_minus_i(dt);
      fwd[j + 1] = step[j] * fwd[j];
    }
    ComplexMatrix back = target_adj_;  // U_f^dagger U_M ... U_{j+1}
    const double phi = mem.weight * trace_of(target_adj_ * fwd[steps]);

    ComplexMatrix gamma(dim, dim);
    for (std::size_t jj = steps; jj-- > 0;) {
      // Phi_j = Re Tr[U_j P] / dim with P = U_{j-1} ... U_1 U_f^dagger U_M ... U_{j+1}
      const ComplexMatrix p = fwd[jj] * back;
      double gx = 0.0, gy = 0.0;
      if (mode == GradientMode::first_order) {
        // dU_j ~ -i dt A U_j, A = dH/dw, so dPhi = dt Im Tr[A U_j P] / dim.
        const ComplexMatrix up = step[jj] * p;
        gx = dt * model.ctrl_x.cwiseProduct(up.transpose()).sum().imag();
        gy = dt * model.ctrl_y.cwiseProduct(up.transpose()).sum().imag();
      } else {
        // dU_j = V (Gamma o V^dagger A V) V^dagger with divided differences
        // Gamma_ab = (e_a - e_b) / (l_a - l_b) of e = exp(-i dt l).
        const auto& e = eig[jj];
        for (Eigen::Index a = 0; a < dim; ++a) {
          for (Eigen::Index b = 0; b < dim; ++b) {
            const double half = 0.5 * dt * (e.values(a) - e.values(b));
            const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
            gamma(a, b) = -kI * dt * sinc * std::polar(1.0, -0.5 * dt * (e.values(a) + e.values(b)));
          }
        }
        const ComplexMatrix q = e.vectors.adjoint() * p * e.vectors;
        const ComplexMatrix dx = e.vectors.adjoint() * model.ctrl_x * e.vectors;
        const ComplexMatrix dy = e.vectors.adjoint() * model.ctrl_y * e.vectors;
        gx = gamma.cwiseProduct(dx).cwiseProduct(q.transpose()).sum().real();
        gy = gamma.cwiseProduct(dy).cwiseProduct(q.transpose()).sum().real();
      }
      grad[jj].wx += scale * gx;
      grad[jj].wy += scale * gy;
      back = back * step[jj];
    }
    return phi;
  }

  int n_spins_;
  ComplexMatrix target_adj_;
  std::vector<Member> members_;
};

inline std::vector<GradientSample> fidelity_gradient(const SpinSystem& sys, const PulseSequence& pulse,
                                                     const TargetTransformation& target,
                                                     GradientMode mode) {
  check_bound(pulse, sys.control_bound());
  std::vector<GradientSample> grad;
  FidelityObjective(sys, target).value_and_gradient(pulse, mode, grad);
  return grad;
}

struct PolarSample {
  double amplitude = 0.0;  // w_r, rad/s
  double phase = 0.0;      // theta in [0, 2 pi)
};

inline double wrap_phase(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

inline std::vector<PolarSample> to_polar(const PulseSequence& pulse) {
  std::vector<PolarSample> out;
  out.reserve(pulse.size());
  for (const auto& s : pulse.samples()) {
    const double r = std::hypot(s.wx, s.wy);
    out.push_back({r, r == 0.0 ? 0.0 : wrap_phase(std::atan2(s.wy, s.wx))});
  }
  return out;
}

// Cartesian sample whose amplitude never exceeds r, even after rounding of
// the cosine and sine, so a clamped polar amplitude stays feasible exactly.
inline ControlSample to_cartesian(double r, double theta) {
  return clamp_amplitude({r * std::cos(theta), r * std::sin(theta)}, r);
}

inline PulseSequence from_polar(double dt, const std::vector<PolarSample>& polar) {
  std::vector<ControlSample> s;
  s.reserve(polar.size());
  for (const auto& p : polar) s.push_back(to_cartesian(p.amplitude, p.phase));
  return PulseSequence(dt, std::move(s));
}

struct OptimizationResult {
  PulseSequence pulse;
  double fidelity = 0.0;                    // nominal system
  std::optional<double> ensemble_fidelity;  // when an ensemble was optimized
  int iterations = 0;
  std::vector<double> fidelity_history;     // objective fidelity per accepted iterate
  bool converged = false;
  int restart = 0;

  // The quantity compared against phi0.
  double objective_fidelity() const { return ensemble_fidelity.value_or(fidelity); }
};

namespace detail {

// Layout: x = [u_0 .. u_{M-1}, theta_0 .. theta_{M-1}], u = w_r / Omega.
inline Eigen::VectorXd pack(const PulseSequence& pulse, double bound) {
  const auto m = static_cast<Eigen::Index>(pulse.size());
  Eigen::VectorXd x(2 * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& s = pulse[static_cast<std::size_t>(j)];
    const double r = std::hypot(s.wx, s.wy);
    x(j) = std::min(r / bound, 1.0);
    x(m + j) = r == 0.0 ? 0.0 : std::atan2(s.wy, s.wx);
  }
  return x;
}

inline PulseSequence unpack(const Eigen::VectorXd& x, double dt, double bound) {
  const Eigen::Index m = x.size() / 2;
  std::vector<ControlSample> s(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    s[static_cast<std::size_t>(j)] = to_cartesian(std::min(bound * x(j), bound), x(m + j));
  }
  return PulseSequence(dt, std::move(s));
}

inline std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace detail

// Amplitudes uniform in [0.8, 1] Omega, phases uniform in [0, 2 pi).
inline PulseSequence random_pulse(std::size_t steps, double dt, double bound, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.8, 1.0), phase(0.0, kTwoPi);
  std::vector<PolarSample> p(steps);
  for (auto& s : p) {
    s.amplitude = bound * amp(rng);
    s.phase = phase(rng);
  }
  return from_polar(dt, p);
}

// One bounded-BFGS run from `initial`. `observer`, if set, sees every
// accepted iterate as a pulse.
inline OptimizationResult optimize_from(const SpinSystem& sys, const TargetTransformation& target,
                                        const PulseSequence& initial, const OptimizerConfig& config,
                                        const EnsembleSpec* ensemble = nullptr,
                                        const std::function<void(const PulseSequence&)>& observer = {}) {
  config.validate();
  const FidelityObjective objective(sys, target, ensemble);
  const double bound = sys.control_bound();
  const double dt = initial.dt();
  const auto m = static_cast<Eigen::Index>(initial.size());

  Eigen::VectorXd lower(2 * m), upper(2 * m);
  lower.head(m).setZero();
  upper.head(m).setOnes();
  lower.tail(m).setConstant(-std::numeric_limits<double>::infinity());
  upper.tail(m).setConstant(std::numeric_limits<double>::infinity());

  BfgsOptions opts;
  opts.max_iters = config.max_iters;
  opts.grad_tol = config.grad_tol;
  opts.stall_window = config.stall_window;
  opts.stall_target = 1.0 - config.phi0;
  const BoundedBfgs bfgs(lower, upper, opts);

  std::vector<GradientSample> g;
  auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const PulseSequence p = detail::unpack(x, dt, bound);
    const double phi = objective.value_and_gradient(p, config.gradient_mode, g);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double c = std::cos(x(m + j)), s = std::sin(x(m + j));
      const auto& gj = g[static_cast<std::size_t>(j)];
      grad(j) = -bound * (c * gj.wx + s * gj.wy);
      grad(m + j) = -bound * x(j) * (-s * gj.wx + c * gj.wy);
    }
    return 1.0 - phi;
  };
  const double target_loss = 1.0 - config.phi0;
  auto done = [&](double loss) { return loss <= target_loss; };
  std::function<void(const Eigen::VectorXd&)> on_iterate;
  if (observer) on_iterate = [&](const Eigen::VectorXd& x) { observer(detail::unpack(x, dt, bound)); };

  const BfgsResult r = bfgs.minimize(f, detail::pack(initial, bound), done, on_iterate);

  OptimizationResult out;
  out.pulse = detail::unpack(r.x, dt, bound);
  out.iterations = r.iterations;
  out.fidelity_history.reserve(r.history.size());
  for (double loss : r.history) out.fidelity_history.push_back(1.0 - loss);
  out.fidelity = fidelity(sys, out.pulse, target);
  if (ensemble) out.ensemble_fidelity = 1.0 - r.value;
  out.converged = out.objective_fidelity() >= config.phi0;
  return out;
}

// Best of config.restarts runs at a fixed duration of `steps` x `dt`.
// Restart 0 starts from `warm_start` when given; the others (and restart 0
// otherwise) start from seeded random pulses. The lowest-index converged
// restart wins, else the highest fidelity; the choice does not depend on
// the thread count.
inline OptimizationResult optimize_fixed_time(const SpinSystem& sys, const TargetTransformation& target,
                                              std::size_t steps, double dt, const OptimizerConfig& config,
                                              const EnsembleSpec* ensemble = nullptr,
                                              const PulseSequence* warm_start = nullptr) {
  config.validate();
  if (warm_start && (warm_start->size() != steps || warm_start->dt() != dt)) {
    throw ModelError("optimize_fixed_time: warm start does not match the grid");
  }
  const unsigned threads = resolve_threads(config.threads);
  const auto restarts = static_cast<std::size_t>(config.restarts);
  std::vector<std::optional<OptimizationResult>> results(restarts);

  for (std::size_t begin = 0; begin < restarts; begin += threads) {
    const std::size_t count = std::min<std::size_t>(threads, restarts - begin);
    parallel_for(count, threads, [&](std::size_t i) {
      const std::size_t r = begin + i;
      const PulseSequence init =
          (r == 0 && warm_start)
              ? *warm_start
              : random_pulse(steps, dt, sys.control_bound(), detail::restart_seed(config.seed, static_cast<int>(r)));
      results[r] = optimize_from(sys, target, init, config, ensemble);
      results[r]->restart = static_cast<int>(r);
    });
    for (std::size_t r = begin; r < begin + count; ++r) {
      if (results[r]->converged) return *results[r];
    }
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (results[r]->objective_fidelity() > results[best]->objective_fidelity()) best = r;
  }
  return *results[best];
}

// Largest |w_r(j+1) - w_r(j)| as a fraction of the bound.
inline double max_amplitude_jump(const PulseSequence& pulse, double bound) {
  double m = 0.0;
  for (std::size_t j = 1; j < pulse.size(); ++j) {
    m = std::max(m, std::abs(pulse[j].amplitude() - pulse[j - 1].amplitude()));
  }
  return m / bound;
}

// Centered moving average of wx and wy; the window is truncated at the
// ends. Samples are then pulled back inside the bound.
inline PulseSequence moving_average(const PulseSequence& pulse, int window, double bound) {
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  const auto n = static_cast<std::ptrdiff_t>(pulse.size());
  std::vector<ControlSample> out(pulse.size());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, j - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, j + half);
    ControlSample acc;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      acc.wx += pulse[static_cast<std::size_t>(i)].wx;
      acc.wy += pulse[static_cast<std::size_t>(i)].wy;
    }
    const double count = static_cast<double>(hi - lo + 1);
    acc.wx /= count;
    acc.wy /= count;
    out[static_cast<std::size_t>(j)] = clamp_amplitude(acc, bound);
  }
  return PulseSequence(pulse.dt(), std::move(out));
}

struct SmoothingResult {
  OptimizationResult result;
  bool success = false;
  int rounds = 0;
  double max_jump = 0.0;  // fraction of the bound
};

// Alternates smoothing and warm-started re-optimization until the pulse is
// both above phi0 and within the smoothness threshold. On failure the
// returned result is the last pulse that met phi0 (the input if none did).
inline SmoothingResult smooth_and_reoptimize(const SpinSystem& sys, const TargetTransformation& target,
                                             const OptimizationResult& input, const OptimizerConfig& config,
                                             const EnsembleSpec* ensemble = nullptr) {
  config.validate();
  const double bound = sys.control_bound();
  SmoothingResult out;
  out.result = input;
  out.max_jump = max_amplitude_jump(input.pulse, bound);

  OptimizationResult current = input;
  for (int round = 1; round <= config.smoothing_rounds; ++round) {
    const PulseSequence smoothed = moving_average(current.pulse, config.smoothing_window, bound);
    current = optimize_from(sys, target, smoothed, config, ensemble);
    out.rounds = round;
    if (!current.converged) continue;
    const double jump = max_amplitude_jump(current.pulse, bound);
    out.result = current;
    out.max_jump = jump;
    if (jump <= config.smoothness_threshold) {
      out.success = true;
      break;
    }
  }
  return out;
}

}  // namespace spinforge
