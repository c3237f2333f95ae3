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

// Command-line front end: estimate, optimize, mintime, simulate, qpt,
// version. cli_dispatch returns 0 on success, 1 on domain errors and 2 on
// usage errors. The resolved configuration of every run, defaults included,
// is written to the log stream.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinforge/error.hpp"
#include "spinforge/geodesic.hpp"
#include "spinforge/grape.hpp"
#include "spinforge/mintime.hpp"
#include "spinforge/propagation.hpp"
#include "spinforge/pulse_io.hpp"
#include "spinforge/qpt.hpp"
#include "spinforge/spin_model.hpp"
#include "spinforge/version.hpp"

namespace spinforge {


namespace cli_detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

struct Common {
  std::string config_path;
  std::string target_text;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  SystemConfig config() const {
    return config_path.empty() ? SystemConfig::trichloroethylene() : load_system_config(config_path);
  }
  TargetTransformation target(const SystemConfig& c) const {
    if (!target_text.empty()) return parse_target(target_text);
    if (auto t = c.target()) return *t;
    return parse_target("I,Rz(90)");
  }
};

inline void add_common(CLI::App* app, Common& c, bool with_target = true) {
  app->add_option("--config", c.config_path, "System configuration (JSON); default: trichloroethylene")
      ->check(CLI::ExistingFile);
  if (with_target) app->add_option("--target", c.target_text, "Target, e.g. \"I,Rz(90)\" (degrees)");
}

struct OptimizerFlags {
  std::string gradient = "first_order";
  std::string ensemble = "off";
  std::string smooth = "on";
  OptimizerConfig config;
};

inline void add_optimizer(CLI::App* app, Common& c, OptimizerFlags& f, double& phi0) {
  app->add_option("--phi0", phi0, "Fidelity threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads (0: SPINFORGE_THREADS or hardware)")->capture_default_str();
  app->add_option("--restarts", f.config.restarts, "Restarts per duration")->capture_default_str()->check(
      CLI::PositiveNumber);
  app->add_option("--max-iters", f.config.max_iters, "BFGS iterations per restart")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  app->add_option("--grad-tol", f.config.grad_tol, "Projected-gradient tolerance")->capture_default_str();
  app->add_option("--gradient", f.gradient, "Gradient: first_order or exact")
      ->capture_default_str()
      ->check(CLI::IsMember({"first_order", "exact"}));
  app->add_option("--stall-window", f.config.stall_window,
                  "Give up on a restart when progress over this many iterations cannot reach phi0 (0: off)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app->add_option("--ensemble", f.ensemble, "Optimize over the RF/shift inhomogeneity ensemble")
      ->capture_default_str()
      ->check(CLI::IsMember({"on", "off"}));
  app->add_option("--smooth", f.smooth, "Smooth and re-optimize the final pulse")
      ->capture_default_str()
      ->check(CLI::IsMember({"on", "off"}));
  app->add_option("--smooth-threshold", f.config.smoothness_threshold,
                  "Largest allowed step-to-step amplitude change, fraction of the bound")
      ->capture_default_str();
}

inline OptimizerConfig resolve(const OptimizerFlags& f, const Common& c, double phi0) {
  OptimizerConfig o = f.config;
  o.phi0 = phi0;
  o.seed = c.seed;
  o.threads = c.threads;
  o.gradient_mode = f.gradient == "exact" ? GradientMode::exact : GradientMode::first_order;
  return o;
}

inline void log_config(std::ostream& log, const CLI::App& app, const SystemConfig& sys,
                       const TargetTransformation& target) {
  log << "# spinforge " << kVersion << " " << app.get_name() << "\n";
  std::istringstream opts(app.config_to_str(true, false));
  for (std::string line; std::getline(opts, line);) {
    if (!line.empty()) log << "# " << line << "\n";
  }
  log << "# system = " << sys.to_json().dump() << "\n";
  log << "# target = " << target.label() << "\n";
  log << "# threads_resolved = " << resolve_threads(0) << "\n";
}

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  auto out = io_detail::open_out(path);
  fn(out);
  if (!out) throw FormatError("write to '" + path + "' failed");
}

inline ComplexVector product_state(const std::string& name, int n_spins) {
  ComplexVector one(2);
  const double h = 1.0 / std::sqrt(2.0);
  if (name == "z+") one << 1.0, 0.0;
  else if (name == "z-") one << 0.0, 1.0;
  else if (name == "x+") one << h, h;
  else if (name == "x-") one << h, -h;
  else if (name == "y+") one << h, kI * h;
  else if (name == "y-") one << h, -kI * h;
  else throw FormatError("unknown initial state '" + name + "' (use x+, x-, y+, y-, z+, z-)");
  ComplexVector psi = ComplexVector::Ones(1);
  for (int k = 0; k < n_spins; ++k) {
    ComplexVector next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) next.segment(2 * i, 2) = psi(i) * one;
    psi = next;
  }
  return psi;
}

}  // namespace cli_detail

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  using namespace cli_detail;
  CLI::App app{"spinforge: minimum-time RF pulses for homonuclear spin pairs", "spinforge"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  Common common;
  double phi0 = 0.9999;

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Geodesic lower estimate of the control time");
  add_common(estimate, common);

  // optimize
  OptimizerFlags opt_flags;
  double duration_us = 0.0, dt_us = 1.0;
  std::size_t steps = 0;
  std::string pulse_out = "pulse.csv", history_out, init_path;
  auto* optimize = app.add_subcommand("optimize", "Optimize a pulse of fixed duration");
  add_common(optimize, common);
  add_optimizer(optimize, common, opt_flags, phi0);
  auto* dur_opt = optimize->add_option("--duration-us", duration_us, "Pulse duration in microseconds");
  auto* steps_opt = optimize->add_option("--steps", steps, "Number of time steps");
  dur_opt->excludes(steps_opt);
  optimize->add_option("--dt-us", dt_us, "Time step in microseconds")->capture_default_str()->check(
      CLI::PositiveNumber);
  optimize->add_option("--out", pulse_out, "Output pulse file")->capture_default_str();
  optimize->add_option("--history", history_out, "Convergence history CSV (iteration,phi)");
  optimize->add_option("--init", init_path, "Warm-start pulse file")->check(CLI::ExistingFile);

  // mintime
  OptimizerFlags mt_flags;
  SearchConfig search;
  double mt_dt_us = 1.0, delta_t_us = 0.0;
  std::string mt_out = "pulse.csv", trace_out;
  auto* mintime = app.add_subcommand("mintime", "Minimum-time search");
  add_common(mintime, common);
  add_optimizer(mintime, common, mt_flags, phi0);
  mintime->add_option("--dt-us", mt_dt_us, "Time step in microseconds")->capture_default_str()->check(
      CLI::PositiveNumber);
  mintime->add_option("--delta-t-us", delta_t_us, "Ramp increment in microseconds (0: from single-spin times)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  mintime->add_option("--max-ramp-steps", search.max_ramp_steps, "Durations tried while ramping up")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mintime->add_option("--out", mt_out, "Output pulse file")->capture_default_str();
  mintime->add_option("--trace", trace_out, "Search trace CSV (duration_us,phi,converged)");

  // simulate
  std::string sim_pulse, traj_prefix, initial = "y-";
  std::size_t decimate = 1;
  auto* simulate = app.add_subcommand("simulate", "Propagate a pulse and report fidelity and trajectories");
  add_common(simulate, common);
  simulate->add_option("--pulse", sim_pulse, "Pulse file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--trajectory-prefix", traj_prefix, "Write <prefix>_spin<k>.csv Bloch trajectories");
  simulate->add_option("--decimate", decimate, "Write every n-th trajectory sample")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--initial", initial, "Initial state of every spin: x+, x-, y+, y-, z+, z-")
      ->capture_default_str();

  // qpt
  std::string qpt_pulse, chi_prefix, images_in, images_out;
  auto* qpt = app.add_subcommand("qpt", "Simulated process tomography of a pulse against its target");
  add_common(qpt, common);
  qpt->add_option("--pulse", qpt_pulse, "Pulse file")->check(CLI::ExistingFile);
  qpt->add_option("--images", images_in, "Measured action images (unit,row,col,re,im) instead of simulation")
      ->check(CLI::ExistingFile);
  qpt->add_option("--chi-prefix", chi_prefix, "Write <prefix>_{exp,th}_{re,im}.csv");
  qpt->add_option("--write-images", images_out, "Write the simulated action images");

  app.add_subcommand("version", "Print the version");

  if (argc <= 1) {
    log << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    log << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (app.got_subcommand("version")) {
      out << "spinforge " << kVersion << "\n";
      return 0;
    }

    const SystemConfig sys_cfg = common.config();
    const SpinSystem sys = sys_cfg.system();
    const TargetTransformation target = common.target(sys_cfg);
    CLI::App* active = app.get_subcommands().front();
    log_config(log, *active, sys_cfg, target);

    if (active == estimate) {
      const GeodesicEstimate e = estimate_min_time(sys, target);
      out << "T_geodesic = " << std::llround(e.t_geodesic * 1e6) << " us\n";
      out << "T_geodesic_exact_us = " << fixed(e.t_geodesic * 1e6, 4) << "\n";
      out << "geodesic_length = " << fixed(e.geodesic_length, 6) << "\n";
      out << "control_ratio = " << fixed(e.control_ratio, 3) << "\n";
      out << "coupling_ratio = " << fixed(e.coupling_ratio, 3) << "\n";
      out << "assumption_ok = " << (e.assumption_ok ? "true" : "false") << "\n";
      if (!e.assumption_ok) log << "warning: two-timescale assumption only loosely satisfied\n";
      return 0;
    }

    if (active == optimize) {
      const OptimizerConfig oc = resolve(opt_flags, common, phi0);
      const double dt = dt_us * 1e-6;
      std::size_t m = steps;
      if (dur_opt->count() > 0) m = detail::grid_steps(duration_us * 1e-6, dt, "optimize");
      if (m == 0) throw ModelError("optimize: give a positive --duration-us or --steps");
      EnsembleSpec ens;
      const EnsembleSpec* ensemble = opt_flags.ensemble == "on" ? &ens : nullptr;
      std::optional<PulseSequence> init;
      if (!init_path.empty()) {
        init = load_pulse(init_path);
        if (init->size() != m || init->dt() != dt) throw ModelError("optimize: --init pulse does not match the grid");
        check_bound(*init, sys.control_bound());
      }
      OptimizationResult r = optimize_fixed_time(sys, target, m, dt, oc, ensemble, init ? &*init : nullptr);
      double jump = max_amplitude_jump(r.pulse, sys.control_bound());
      bool smoothed = false;
      // The history file records the fixed-duration run; smoothing rounds
      // only report their outcome.
      const std::vector<double> history = r.fidelity_history;
      if (opt_flags.smooth == "on" && r.converged) {
        SmoothingResult s = smooth_and_reoptimize(sys, target, r, oc, ensemble);
        r = std::move(s.result);
        jump = s.max_jump;
        smoothed = s.success;
        if (!s.success) log << "warning: smoothness threshold not met\n";
      }
      save_pulse(r.pulse, sys, pulse_out,
                 "spinforge " + std::string(kVersion) + " optimize seed=" + std::to_string(common.seed));
      if (!history_out.empty()) {
        write_file(history_out, [&](std::ostream& o) { write_history_csv(o, history); });
      }
      out << "duration_us = " << fixed(r.pulse.duration() * 1e6, 3) << "\n";
      out << "Phi = " << fixed(r.fidelity, 8) << "\n";
      if (r.ensemble_fidelity) out << "Phi_ensemble = " << fixed(*r.ensemble_fidelity, 8) << "\n";
      out << "converged = " << (r.converged ? "true" : "false") << "\n";
      out << "smoothed = " << (smoothed ? "true" : "false") << " max_jump = " << fixed(jump, 4) << "\n";
      if (!r.converged) {
        log << "error: no restart reached phi0 = " << phi0 << "\n";
        return 1;
      }
      return 0;
    }

    if (active == mintime) {
      search.dt = mt_dt_us * 1e-6;
      search.phi0 = phi0;
      if (delta_t_us > 0.0) search.delta_t_override = delta_t_us * 1e-6;
      search.smooth = mt_flags.smooth == "on";
      search.optimizer = resolve(mt_flags, common, phi0);
      EnsembleSpec ens;
      const EnsembleSpec* ensemble = mt_flags.ensemble == "on" ? &ens : nullptr;
      const SearchTrace trace = run_pipeline(sys, target, search, ensemble, [&](const SearchAttempt& a) {
        log << "# attempt " << a.stage << " T=" << fixed(a.duration * 1e6, 1) << " us Phi=" << fixed(a.fidelity, 8)
            << (a.converged ? " converged" : " failed") << "\n";
      });
      for (const auto& w : trace.warnings) log << "warning: " << w << "\n";
      if (!trace_out.empty()) write_file(trace_out, [&](std::ostream& o) { write_trace_csv(o, trace.attempts); });
      out << "Delta_T_us = " << fixed(trace.delta_t * 1e6, 1) << "\n";
      if (!trace.found) {
        out << "T_geodesic=" << fixed(trace.estimate.t_geodesic * 1e6, 2) << " us T_minimum=none Phi="
            << fixed(trace.result.objective_fidelity(), 8) << "\n";
        log << "error: no duration within " << search.max_ramp_steps << " ramp steps reached phi0\n";
        return 1;
      }
      save_pulse(trace.pulse(), sys, mt_out,
                 "spinforge " + std::string(kVersion) + " mintime seed=" + std::to_string(common.seed));
      out << "T_geodesic=" << fixed(trace.estimate.t_geodesic * 1e6, 2) << " us T_minimum="
          << fixed(trace.t_minimum * 1e6, 1) << " us Phi=" << fixed(trace.result.objective_fidelity(), 8) << "\n";
      out << "smoothed = " << (trace.smoothed ? "true" : "false") << " max_jump = " << fixed(trace.max_jump, 4)
          << "\n";
      return 0;
    }

    if (active == simulate) {
      const PulseFile file = load_pulse_file(sim_pulse);
      if (!file.header.fingerprint.empty() && file.header.fingerprint != system_fingerprint(sys)) {
        log << "warning: pulse was generated for a different system (fingerprint mismatch)\n";
      }
      check_bound(file.pulse, sys.control_bound());
      const ComplexMatrix u = propagate(sys, file.pulse);
      out << "duration_us = " << fixed(file.pulse.duration() * 1e6, 3) << "\n";
      out << "Phi = " << fixed(trace_fidelity(target.composite(), u, sys.n_spins()), 8) << "\n";
      const ComplexVector psi0 = product_state(initial, sys.n_spins());
      for (int k = 1; k <= sys.n_spins(); ++k) {
        const BlochTrajectory traj = bloch_trajectory(sys, file.pulse, psi0, k, initial);
        const Eigen::Vector3d& v = traj.vectors.back();
        out << "spin" << k << "_final = (" << fixed(v.x(), 6) << ", " << fixed(v.y(), 6) << ", " << fixed(v.z(), 6)
            << ")\n";
        if (!traj_prefix.empty()) {
          write_file(traj_prefix + "_spin" + std::to_string(k) + ".csv",
                     [&](std::ostream& o) { write_trajectory_csv(o, traj, decimate); });
        }
      }
      if (sys.n_spins() == 2) out << "path_length = " << fixed(path_length(sys, file.pulse), 6) << "\n";
      return 0;
    }

    if (active == qpt) {
      if (target.n_spins() != 2 || sys.n_spins() != 2) throw UnsupportedError("qpt: two spins only");
      if (qpt_pulse.empty() == images_in.empty()) throw ModelError("qpt: give exactly one of --pulse or --images");
      ActionImages images;
      if (!images_in.empty()) {
        auto in = io_detail::open_in(images_in);
        images = read_action_images(in);
      } else {
        const PulseSequence pulse = load_pulse(qpt_pulse);
        check_bound(pulse, sys.control_bound());
        images = unitary_action(propagate(sys, pulse));
      }
      if (!images_out.empty()) write_file(images_out, [&](std::ostream& o) { write_action_images(o, images); });
      const ProcessMatrix chi_exp = chi_from_map(images);
      const ProcessMatrix chi_th = chi_from_unitary(target.composite());
      out << "F_attenuated = " << fixed(attenuated_fidelity(chi_exp, chi_th), 8) << "\n";
      out << "F_unattenuated = " << fixed(unattenuated_fidelity(chi_exp, chi_th), 8) << "\n";
      if (!chi_prefix.empty()) {
        for (const auto& [name, p] : {std::pair<const char*, const ProcessMatrix*>{"exp", &chi_exp}, {"th", &chi_th}}) {
          for (bool imag : {false, true}) {
            write_file(chi_prefix + "_" + name + (imag ? "_im" : "_re") + ".csv",
                       [&](std::ostream& o) { write_chi_csv(o, *p, imag); });
          }
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

inline int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& log) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("spinforge");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, log);
}

}  // namespace spinforge
