/*
specstab
Copyright 2026 specstab contributors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

   http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>

#include "errors.hpp"

namespace specstab {

struct LMOptions {
    int max_iterations = 100;
    double tol = 1e-12;   // on the residual norm
    double fd_step = 1e-7;
};

struct LMResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    int iterations = 0;
};

/// Levenberg-Marquardt on a square or overdetermined residual with a
/// forward-difference Jacobian.
inline LMResult levenberg_marquardt(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
    Eigen::VectorXd x0, const LMOptions& options = {})
{
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd r = residual(x);
    double rn = r.norm();
    double damping = 1e-3;
    int it = 0;
    const int n = static_cast<int>(x.size());
    for (; it < options.max_iterations && rn > options.tol; ++it) {
        Eigen::MatrixXd jac(r.size(), n);
        for (int k = 0; k < n; ++k) {
            Eigen::VectorXd xp = x;
            xp[k] += options.fd_step;
            jac.col(k) = (residual(xp) - r) / options.fd_step;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        bool accepted = false;
        for (int trial = 0; trial < 12; ++trial) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal().array() += damping * (jtj.diagonal().array().abs() + 1e-30);
            const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);
            const Eigen::VectorXd xc = x + step;
            const Eigen::VectorXd rc = residual(xc);
            if (rc.norm() < rn) {
                x = xc;
                r = rc;
                rn = rc.norm();
                damping = std::max(damping * 0.3, 1e-12);
                accepted = true;
                break;
            }
            damping *= 8.0;
        }
        if (!accepted) break;
    }
    return {x, rn, it};
}

/// Root of a continuous strictly-decreasing function f on [lo, hi] with
/// f(lo) >= target >= f(hi); the bracket is grown geometrically if it
/// does not straddle the target. Returns the abscissa with relative
/// tolerance rel_tol.
inline double bisect_decreasing(const std::function<double(double)>& f, double target,
                                double lo, double hi, double rel_tol = 1e-10,
                                int max_iter = 200)
{
    for (int grow = 0; f(lo) < target && grow < 200; ++grow) lo *= 0.5;
    for (int grow = 0; f(hi) > target && grow < 200; ++grow) hi *= 2.0;
    if (f(lo) < target || f(hi) > target)
        fail(ErrorCode::Numeric, "bisection bracket could not be established");
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((hi - lo) <= rel_tol * mid) return mid;
        if (f(mid) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Neville polynomial extrapolation of (x_i, y_i) samples to x = 0.
inline double neville_extrapolate_to_zero(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys)
{
    const int n = static_cast<int>(xs.size());
    Eigen::VectorXd p = ys;
    for (int level = 1; level < n; ++level)
        for (int i = 0; i < n - level; ++i)
            p[i] = (xs[i + level] * p[i] - xs[i] * p[i + 1]) / (xs[i + level] - xs[i]);
    return p[0];
}

/// Least-squares slope of y against x.
inline double fit_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    const double mx = x.mean();
    const double my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    if (sxx <= 0.0) fail(ErrorCode::Numeric, "slope fit needs spread in the abscissa");
    return (x.array() - mx).matrix().dot((y.array() - my).matrix()) / sxx;
}

}  // namespace specstab
