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

// Quasi-Newton minimization over a box, used by the pulse optimizer.
//
// Dense inverse-Hessian BFGS with projected backtracking: trial points are
// clamped into the box, and coordinates sitting on a bound whose gradient
// points outward are frozen for the next search direction.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace spinforge {

struct BfgsOptions {
  int max_iters = 2000;
  double grad_tol = 1e-10;   // on the projected gradient, infinity norm
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 30;
  double curvature_eps = 1e-12;
  double bound_eps = 1e-12;
  // Optional give-up rule, disabled when stall_window == 0: stop once the
  // decrease over the last stall_window iterations, extrapolated linearly
  // over the remaining budget and multiplied by stall_margin, cannot bring
  // the objective down to stall_target.
  int stall_window = 0;
  double stall_target = -std::numeric_limits<double>::infinity();
  double stall_margin = 4.0;
};

enum class BfgsStatus { target_reached, stationary, line_search_failed, stalled, max_iters };

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  BfgsStatus status = BfgsStatus::max_iters;
  std::vector<double> history;  // objective after each accepted iterate, starting point first
};

// objective(x, grad) -> f, writing grad.
// done(f) -> true stops the run early (target reached).
// on_iterate(x) is called for every accepted iterate, including the start.
class BoundedBfgs {
 public:
  using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

  BoundedBfgs(Eigen::VectorXd lower, Eigen::VectorXd upper, BfgsOptions options = {})
      : lower_(std::move(lower)), upper_(std::move(upper)), opt_(options) {}

  Eigen::VectorXd project(Eigen::VectorXd x) const {
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

  BfgsResult minimize(const Objective& objective, Eigen::VectorXd x0,
                      const std::function<bool(double)>& done = {},
                      const std::function<void(const Eigen::VectorXd&)>& on_iterate = {}) const {
    const Eigen::Index n = x0.size();
    BfgsResult res;
    Eigen::VectorXd x = project(std::move(x0));
    Eigen::VectorXd g(n), g_trial(n);
    double f = objective(x, g);
    ++res.evaluations;
    res.history.push_back(f);
    if (on_iterate) on_iterate(x);

    auto finish = [&](BfgsStatus status) {
      res.x = x;
      res.value = f;
      res.status = status;
      return res;
    };
    if (done && done(f)) return finish(BfgsStatus::target_reached);
    if (n == 0) return finish(BfgsStatus::stationary);

    Eigen::MatrixXd h;
    auto reset = [&](const Eigen::VectorXd& grad) {
      const double gn = grad.norm();
      h = Eigen::MatrixXd::Identity(n, n) * (gn > 0.0 ? 1.0 / gn : 1.0);
    };
    reset(g);
    bool fresh = true;

    for (int it = 0; it < opt_.max_iters; ++it) {
      Eigen::VectorXd gp = g;
      std::vector<Eigen::Index> active;
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool at_lower = x(i) <= lower_(i) + opt_.bound_eps && g(i) > 0.0;
        const bool at_upper = x(i) >= upper_(i) - opt_.bound_eps && g(i) < 0.0;
        if (at_lower || at_upper) {
          gp(i) = 0.0;
          active.push_back(i);
        }
      }
      if (gp.lpNorm<Eigen::Infinity>() <= opt_.grad_tol) return finish(BfgsStatus::stationary);

      Eigen::VectorXd d = -(h * gp);
      for (Eigen::Index i : active) d(i) = 0.0;
      if (gp.dot(d) >= 0.0) {
        reset(gp);
        fresh = true;
        d = -(h * gp);
        for (Eigen::Index i : active) d(i) = 0.0;
      }

      double alpha = 1.0;
      bool accepted = false;
      Eigen::VectorXd x_trial;
      double f_trial = f;
      for (int bt = 0; bt <= opt_.max_backtracks; ++bt) {
        x_trial = project(x + alpha * d);
        f_trial = objective(x_trial, g_trial);
        ++res.evaluations;
        const double decrease = g.dot(x_trial - x);
        if (std::isfinite(f_trial) && f_trial < f && f_trial <= f + opt_.armijo * decrease) {
          accepted = true;
          break;
        }
        alpha *= opt_.shrink;
      }
      if (!accepted) {
        if (fresh) return finish(BfgsStatus::line_search_failed);
        reset(gp);
        fresh = true;
        continue;
      }

      const Eigen::VectorXd s = x_trial - x;
      const Eigen::VectorXd y = g_trial - g;
      const double sy = s.dot(y);
      if (sy > opt_.curvature_eps) {
        const double rho = 1.0 / sy;
        const Eigen::VectorXd hy = h * y;
        const double yhy = y.dot(hy);
        h.noalias() -= (rho * s) * hy.transpose();
        h.noalias() -= (rho * hy) * s.transpose();
        h.noalias() += ((rho * rho * yhy + rho) * s) * s.transpose();
      }
      fresh = false;
      x = x_trial;
      f = f_trial;
      g = g_trial;
      res.iterations = it + 1;
      res.history.push_back(f);
      if (on_iterate) on_iterate(x);
      if (done && done(f)) return finish(BfgsStatus::target_reached);
      if (hopeless(res.history, it + 1)) return finish(BfgsStatus::stalled);
    }
    return finish(BfgsStatus::max_iters);
  }

 private:
  bool hopeless(const std::vector<double>& history, int iterations) const {
    const auto w = static_cast<std::size_t>(opt_.stall_window);
    if (w == 0 || history.size() <= w) return false;
    const double f = history.back();
    const double needed = f - opt_.stall_target;
    if (!(needed > 0.0)) return false;
    const double rate = (history[history.size() - 1 - w] - f) / static_cast<double>(w);
    const double remaining = static_cast<double>(opt_.max_iters - iterations);
    return rate * remaining * opt_.stall_margin < needed;
  }

  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  BfgsOptions opt_;
};

}  // namespace spinforge
