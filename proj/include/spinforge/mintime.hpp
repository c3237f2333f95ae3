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

// Minimum-time search: geodesic seed, ramp increment from single-spin
// times, upper-bound ramp, bisection on the step grid, final smoothing.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spinforge/error.hpp"
#include "spinforge/geodesic.hpp"
#include "spinforge/grape.hpp"
#include "spinforge/propagation.hpp"
#include "spinforge/spin_model.hpp"

namespace spinforge {

struct SearchConfig {
  double dt = 1e-6;                       // s
  std::optional<double> delta_t_override; // s, replaces the single-spin ramp increment
  double phi0 = 0.9999;
  int max_ramp_steps = 50;
  int max_single_spin_steps = 1000;       // search limit for single-spin times
  double warm_perturbation = 0.01;        // relative, per control component
  bool smooth = true;
  OptimizerConfig optimizer;              // its phi0 is replaced by SearchConfig::phi0

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ModelError("SearchConfig: dt must be positive");
    if (delta_t_override && !(*delta_t_override > 0.0)) {
      throw ModelError("SearchConfig: delta_t_override must be positive");
    }
    if (!(phi0 > 0.0 && phi0 <= 1.0)) throw ModelError("SearchConfig: phi0 must be in (0, 1]");
    if (max_ramp_steps < 1 || max_single_spin_steps < 1) {
      throw ModelError("SearchConfig: step limits must be positive");
    }
    if (!(warm_perturbation >= 0.0)) throw ModelError("SearchConfig: negative perturbation");
    optimizer_config().validate();
  }

  OptimizerConfig optimizer_config() const {
    OptimizerConfig c = optimizer;
    c.phi0 = phi0;
    return c;
  }
};

struct SearchAttempt {
  std::size_t steps = 0;
  double duration = 0.0;  // s
  double fidelity = 0.0;  // objective fidelity (ensemble mean when an ensemble is used)
  bool converged = false;
  int iterations = 0;
  std::string stage;      // "ramp", "bisect", "retry"
};

using SearchObserver = std::function<void(const SearchAttempt&)>;

struct SearchTrace {
  GeodesicEstimate estimate;
  double delta_t = 0.0;                 // s
  std::vector<SearchAttempt> attempts;  // every duration optimized, in order
  bool found = false;
  std::size_t steps = 0;                // M at the minimum
  double t_minimum = 0.0;               // s
  OptimizationResult result;            // final (smoothed when possible) pulse
  bool smoothed = false;
  double max_jump = 0.0;                // fraction of the bound
  std::vector<std::string> warnings;

  const PulseSequence& pulse() const { return result.pulse; }
};

namespace detail {

inline std::size_t grid_steps(double duration, double dt, const char* what) {
  const double m = duration / dt;
  const double r = std::round(m);
  if (!(r >= 0.0) || std::abs(m - r) > 1e-6) {
    throw ModelError(std::string(what) + ": duration is not on the time grid");
  }
  return static_cast<std::size_t>(r);
}

inline std::uint64_t attempt_seed(std::uint64_t seed, std::size_t steps, int salt) {
  return restart_seed(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(salt + 1)),
                      static_cast<int>(steps));
}

// Resizes `pulse` to `steps` samples (truncating, or padding with copies of
// the final sample) and scales each control component by 1 + U(-p, p).
inline PulseSequence warm_start(const PulseSequence& pulse, std::size_t steps, double bound,
                                double perturbation, std::uint64_t seed) {
  if (pulse.empty()) return random_pulse(steps, pulse.dt(), bound, seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-perturbation, perturbation);
  std::vector<ControlSample> s(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    ControlSample c = pulse[std::min(j, pulse.size() - 1)];
    c.wx *= 1.0 + u(rng);
    c.wy *= 1.0 + u(rng);
    s[j] = clamp_amplitude(c, bound);
  }
  return PulseSequence(pulse.dt(), std::move(s));
}

// One feasibility test at `steps` x dt; zero steps is evaluated directly.
inline OptimizationResult attempt(const SpinSystem& sys, const TargetTransformation& target,
                                  std::size_t steps, const SearchConfig& config,
                                  const EnsembleSpec* ensemble, const PulseSequence* warm, int salt) {
  OptimizerConfig oc = config.optimizer_config();
  oc.seed = attempt_seed(oc.seed, steps, salt);
  if (steps == 0) {
    OptimizationResult r;
    r.pulse = PulseSequence(config.dt, {});
    r.fidelity = fidelity(sys, r.pulse, target);
    if (ensemble) r.ensemble_fidelity = FidelityObjective(sys, target, ensemble).value(r.pulse);
    r.fidelity_history = {r.objective_fidelity()};
    r.converged = r.objective_fidelity() >= oc.phi0;
    return r;
  }
  std::optional<PulseSequence> init;
  if (warm) {
    init = warm_start(*warm, steps, sys.control_bound(), config.warm_perturbation,
                      attempt_seed(oc.seed, steps, salt + 7));
  }
  return optimize_fixed_time(sys, target, steps, config.dt, oc, ensemble, init ? &*init : nullptr);
}

inline SearchAttempt record(std::size_t steps, double dt, const OptimizationResult& r, const char* stage) {
  return {steps, dt * static_cast<double>(steps), r.objective_fidelity(), r.converged, r.iterations, stage};
}

}  // namespace detail

// Smallest m * dt at which spin k alone (generator H_c - delta_k H_d) can
// be steered to `factor` with fidelity phi0; 0 for the identity.
inline double single_spin_min_time(const SpinSystem& sys, const ComplexMatrix& factor, int k,
                                   const SearchConfig& config = {}) {
  config.validate();
  const SpinSystem spin = isolated_spin(sys, k);
  const TargetTransformation target({factor});
  if (trace_fidelity(factor, identity(2), 1) >= config.phi0) return 0.0;
  for (int m = 1; m <= config.max_single_spin_steps; ++m) {
    const auto r = detail::attempt(spin, target, static_cast<std::size_t>(m), config, nullptr, nullptr, 1);
    if (r.converged) return config.dt * m;
  }
  throw SearchFailure("single_spin_min_time: no duration up to max_single_spin_steps reached phi0");
}

// Ramp increment: the longest single-spin time, at least one grid step.
inline double delta_t(const SpinSystem& sys, const TargetTransformation& target,
                      const SearchConfig& config = {}) {
  if (target.n_spins() != sys.n_spins()) throw ModelError("delta_t: spin count mismatch");
  if (config.delta_t_override) return *config.delta_t_override;
  double t = 0.0;
  for (int k = 1; k <= sys.n_spins(); ++k) {
    t = std::max(t, single_spin_min_time(sys, target.factor(k), k, config));
  }
  return std::max(t, config.dt);
}

struct UpperBound {
  bool found = false;
  std::size_t steps = 0;        // first converged M
  std::size_t start_steps = 0;  // ceil(T_geodesic / dt)
  std::size_t increment = 1;    // Delta T in steps
  OptimizationResult result;    // converged result, or the last attempt
  std::vector<SearchAttempt> attempts;
};

// Ramps M over {M_0, M_0 + dM, ...} from the geodesic seed until an
// optimization converges or max_ramp_steps durations have been tried.
inline UpperBound find_upper_bound(const SpinSystem& sys, const TargetTransformation& target,
                                   const SearchConfig& config, double t_geodesic, double ramp,
                                   const EnsembleSpec* ensemble = nullptr,
                                   const SearchObserver& observer = {}) {
  config.validate();
  UpperBound ub;
  ub.start_steps = static_cast<std::size_t>(std::ceil(t_geodesic / config.dt - 1e-9));
  ub.increment = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ramp / config.dt)));
  std::optional<PulseSequence> previous;
  for (int n = 0; n < config.max_ramp_steps; ++n) {
    const std::size_t m = ub.start_steps + static_cast<std::size_t>(n) * ub.increment;
    ub.result = detail::attempt(sys, target, m, config, ensemble, previous ? &*previous : nullptr, 0);
    ub.attempts.push_back(detail::record(m, config.dt, ub.result, "ramp"));
    if (observer) observer(ub.attempts.back());
    if (ub.result.converged) {
      ub.found = true;
      ub.steps = m;
      return ub;
    }
    previous = ub.result.pulse;
  }
  return ub;
}

inline UpperBound find_upper_bound(const SpinSystem& sys, const TargetTransformation& target,
                                   const SearchConfig& config, const EnsembleSpec* ensemble = nullptr,
                                   const SearchObserver& observer = {}) {
  const GeodesicEstimate est = estimate_min_time(sys, target);
  return find_upper_bound(sys, target, config, est.t_geodesic, delta_t(sys, target, config), ensemble,
                          observer);
}

struct BisectionResult {
  std::size_t steps = 0;
  OptimizationResult result;
  std::vector<SearchAttempt> attempts;
};

// Bisection over integer step counts in (lo, hi]. `hi_result` is the
// converged result at hi when already known. Unless `lo_known_infeasible`,
// lo is tested first; if it converges the bracket is widened downward by
// `widen` steps once.
inline BisectionResult bisect_min_time(const SpinSystem& sys, const TargetTransformation& target,
                                       std::size_t lo, std::size_t hi, const SearchConfig& config,
                                       const OptimizationResult* hi_result = nullptr,
                                       bool lo_known_infeasible = false, std::size_t widen = 0,
                                       const EnsembleSpec* ensemble = nullptr,
                                       const SearchObserver& observer = {}) {
  config.validate();
  if (lo >= hi) throw ModelError("bisect_min_time: need T_lb < T_ub");
  BisectionResult out;
  auto run = [&](std::size_t m, const PulseSequence* warm) {
    OptimizationResult r = detail::attempt(sys, target, m, config, ensemble, warm, 2);
    out.attempts.push_back(detail::record(m, config.dt, r, "bisect"));
    if (observer) observer(out.attempts.back());
    return r;
  };

  OptimizationResult best = hi_result ? *hi_result : run(hi, nullptr);
  if (!best.converged) throw SearchFailure("bisect_min_time: no convergence at T_ub");

  if (!lo_known_infeasible) {
    OptimizationResult at_lo = run(lo, &best.pulse);
    if (at_lo.converged) {
      const std::size_t step = std::max<std::size_t>(widen, 1);
      if (lo < step) throw SearchFailure("bisect_min_time: inconsistent bracket at zero duration");
      hi = lo;
      best = std::move(at_lo);
      lo -= step;
      if (run(lo, &best.pulse).converged) {
        throw SearchFailure("bisect_min_time: inconsistent bracket after widening");
      }
    }
  }

  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    OptimizationResult r = run(mid, &best.pulse);
    if (r.converged) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  out.steps = hi;
  out.result = std::move(best);
  return out;
}

// Seconds overload; both ends must lie on the dt grid.
inline BisectionResult bisect_min_time(const SpinSystem& sys, const TargetTransformation& target,
                                       double t_lb, double t_ub, const SearchConfig& config) {
  const std::size_t lo = detail::grid_steps(t_lb, config.dt, "bisect_min_time");
  const std::size_t hi = detail::grid_steps(t_ub, config.dt, "bisect_min_time");
  const std::size_t widen =
      config.delta_t_override ? detail::grid_steps(*config.delta_t_override, config.dt, "bisect_min_time") : 1;
  return bisect_min_time(sys, target, lo, hi, config, nullptr, false, widen);
}

// Pairs (converged a, failed b) with a < b - 1 in step count.
inline std::vector<std::pair<std::size_t, std::size_t>> feasibility_violations(
    const std::vector<SearchAttempt>& attempts) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& a : attempts) {
    if (!a.converged) continue;
    for (const auto& b : attempts) {
      if (!b.converged && a.steps + 1 < b.steps) out.emplace_back(a.steps, b.steps);
    }
  }
  return out;
}

// Full search: estimate, ramp increment, upper-bound ramp, bisection and
// smoothing. `found` is false when the ramp never converged; the trace
// still lists every attempt.
inline SearchTrace run_pipeline(const SpinSystem& sys, const TargetTransformation& target,
                                const SearchConfig& config, const EnsembleSpec* ensemble = nullptr,
                                const SearchObserver& observer = {}) {
  config.validate();
  SearchTrace trace;
  trace.estimate = estimate_min_time(sys, target);
  trace.delta_t = delta_t(sys, target, config);

  UpperBound ub = find_upper_bound(sys, target, config, trace.estimate.t_geodesic, trace.delta_t,
                                   ensemble, observer);
  trace.attempts = ub.attempts;
  if (!ub.found) {
    trace.result = std::move(ub.result);
    trace.warnings.push_back("no duration on the ramp reached phi0");
    return trace;
  }

  // Durations below the geodesic seed are treated as infeasible.
  std::size_t steps = ub.steps;
  OptimizationResult best = std::move(ub.result);
  if (steps > 0) {
    const std::size_t lo = steps == ub.start_steps ? steps - 1 : steps - ub.increment;
    BisectionResult b = bisect_min_time(sys, target, lo, steps, config, &best, true, ub.increment,
                                        ensemble, observer);
    trace.attempts.insert(trace.attempts.end(), b.attempts.begin(), b.attempts.end());
    steps = b.steps;
    best = std::move(b.result);
  }

  // A failed duration above a converged one is a warm-start artifact; retry
  // it once from fresh random restarts.
  std::vector<std::size_t> retried;
  for (const auto& [ok, failed] : feasibility_violations(trace.attempts)) {
    if (std::find(retried.begin(), retried.end(), failed) != retried.end()) continue;
    retried.push_back(failed);
    const auto r = detail::attempt(sys, target, failed, config, ensemble, nullptr, 3);
    trace.attempts.push_back(detail::record(failed, config.dt, r, "retry"));
    if (observer) observer(trace.attempts.back());
    trace.warnings.push_back("feasibility frontier violated at " + std::to_string(failed) + " steps (converged at " +
                             std::to_string(ok) + ")");
  }

  trace.found = true;
  trace.steps = steps;
  trace.t_minimum = config.dt * static_cast<double>(steps);
  trace.max_jump = max_amplitude_jump(best.pulse, sys.control_bound());
  if (config.smooth && steps > 0) {
    SmoothingResult s = smooth_and_reoptimize(sys, target, best, config.optimizer_config(), ensemble);
    trace.smoothed = s.success;
    trace.max_jump = s.max_jump;
    best = std::move(s.result);
    if (!s.success) trace.warnings.push_back("smoothness threshold not met; kept the last converged pulse");
  }
  trace.result = std::move(best);
  return trace;
}

}  // namespace spinforge
