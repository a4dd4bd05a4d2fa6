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
#include "sphere_harmonics.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "errors.hpp"

namespace specstab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSupSafety = 1.0005;

// P_l^m(z) / (1-z²)^{m/2}: polynomial part of the associated Legendre
// function (Condon-Shortley phase omitted), with its z-derivative.
void legendre_poly_part(int l, int m, double z, double& q, double& dq)
{
    double qmm = 1.0, dqmm = 0.0;
    for (int k = 1; k <= m; ++k) qmm *= (2.0 * k - 1.0);
    if (l == m) {
        q = qmm;
        dq = 0.0;
        return;
    }
    double qprev = qmm, dqprev = dqmm;
    double qcur = (2.0 * m + 1.0) * z * qmm;
    double dqcur = (2.0 * m + 1.0) * qmm;
    for (int ll = m + 2; ll <= l; ++ll) {
        const double a = (2.0 * ll - 1.0) / (ll - m);
        const double b = (ll + m - 1.0) / (ll - m);
        const double qnext = a * z * qcur - b * qprev;
        const double dqnext = a * (qcur + z * dqcur) - b * dqprev;
        qprev = qcur;
        dqprev = dqcur;
        qcur = qnext;
        dqcur = dqnext;
    }
    q = qcur;
    dq = dqcur;
}

double normalization(int l, int m)
{
    const double logn = 0.5 * (std::log(2.0 * l + 1.0) - std::log(4.0 * kPi) +
                               std::lgamma(l - m + 1.0) - std::lgamma(l + m + 1.0));
    return (m > 0 ? std::sqrt(2.0) : 1.0) * std::exp(logn);
}

// c_m, s_m: Re and Im of (x + iy)^m with their partials.
void azimuthal(int m, double x, double y, double& c, double& s, double& dcx, double& dcy,
               double& dsx, double& dsy)
{
    double cc = 1.0, ss = 0.0;
    double cp = 0.0, sp = 0.0;  // c_{m-1}, s_{m-1}
    for (int k = 1; k <= m; ++k) {
        cp = cc;
        sp = ss;
        const double cn = x * cc - y * ss;
        const double sn = x * ss + y * cc;
        cc = cn;
        ss = sn;
    }
    c = cc;
    s = ss;
    dcx = m * cp;
    dcy = -m * sp;
    dsx = m * sp;
    dsy = m * cp;
}

struct EvalResult {
    double value;
    Eigen::Vector3d ambient_gradient;
};

EvalResult evaluate(int l, int m_signed, const Eigen::Vector3d& x)
{
    const int m = std::abs(m_signed);
    double q, dq;
    legendre_poly_part(l, m, x[2], q, dq);
    double c, s, dcx, dcy, dsx, dsy;
    azimuthal(m, x[0], x[1], c, s, dcx, dcy, dsx, dsy);
    const double n = normalization(l, m);

    EvalResult out;
    if (m_signed >= 0) {
        out.value = n * q * c;
        out.ambient_gradient = n * Eigen::Vector3d(q * dcx, q * dcy, dq * c);
    } else {
        out.value = n * q * s;
        out.ambient_gradient = n * Eigen::Vector3d(q * dsx, q * dsy, dq * s);
    }
    return out;
}

}  // namespace

SphericalHarmonicBasis::SphericalHarmonicBasis(int max_degree) : max_degree_(max_degree)
{
    if (max_degree < 0 || max_degree > 16)
        fail(ErrorCode::InvalidInput, "spherical harmonic degree must lie in [0, 16]");
    for (int l = 0; l <= max_degree; ++l)
        for (int m = -l; m <= l; ++m) index_.push_back({l, m});
    sup_value_cache_.assign(index_.size(), -1.0);
    sup_gradient_cache_.assign(index_.size(), -1.0);
}

double SphericalHarmonicBasis::value(int k, const Eigen::Vector3d& x) const
{
    const auto& e = index_.at(k);
    return evaluate(e.l, e.m, x).value;
}

Eigen::Vector3d SphericalHarmonicBasis::tangent_gradient(int k, const Eigen::Vector3d& x) const
{
    const auto& e = index_.at(k);
    const Eigen::Vector3d g = evaluate(e.l, e.m, x).ambient_gradient;
    return g - g.dot(x) * x;
}

namespace {

// Fibonacci sphere samples plus projected-ascent polishing.
double sup_over_sphere(const std::function<double(const Eigen::Vector3d&)>& f, int samples)
{
    double best = 0.0;
    Eigen::Vector3d best_x(0, 0, 1);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < samples; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / samples;
        const double r = std::sqrt(std::max(1.0 - z * z, 0.0));
        const double phi = golden * i;
        const Eigen::Vector3d x(r * std::cos(phi), r * std::sin(phi), z);
        const double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    // local ascent with tangent finite differences
    Eigen::Vector3d x = best_x;
    double step = 2.0 / std::sqrt(static_cast<double>(samples));
    for (int it = 0; it < 60; ++it) {
        const Eigen::Vector3d t1 = x.unitOrthogonal();
        const Eigen::Vector3d t2 = x.cross(t1);
        const double h = 1e-6;
        const double gx = (f((x + h * t1).normalized()) - f((x - h * t1).normalized())) / (2 * h);
        const double gy = (f((x + h * t2).normalized()) - f((x - h * t2).normalized())) / (2 * h);
        Eigen::Vector3d dir = gx * t1 + gy * t2;
        if (dir.norm() < 1e-14) break;
        dir.normalize();
        bool moved = false;
        while (step > 1e-12) {
            const Eigen::Vector3d cand = (x + step * dir).normalized();
            const double v = f(cand);
            if (v > best) {
                best = v;
                x = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return best;
}

}  // namespace

double SphericalHarmonicBasis::sup_value(int k) const
{
    if (sup_value_cache_[k] < 0.0) {
        const auto& e = index_[k];
        const int samples = 4000 + 2000 * e.l * e.l;
        sup_value_cache_[k] = kSupSafety * sup_over_sphere(
            [&](const Eigen::Vector3d& x) { return std::abs(evaluate(e.l, e.m, x).value); },
            samples);
    }
    return sup_value_cache_[k];
}

double SphericalHarmonicBasis::sup_gradient(int k) const
{
    if (sup_gradient_cache_[k] < 0.0) {
        const auto& e = index_[k];
        const int samples = 4000 + 2000 * e.l * e.l;
        sup_gradient_cache_[k] = kSupSafety * sup_over_sphere(
            [&](const Eigen::Vector3d& x) {
                const Eigen::Vector3d g = evaluate(e.l, e.m, x).ambient_gradient;
                return (g - g.dot(x) * x).norm();
            },
            samples);
    }
    return sup_gradient_cache_[k];
}

}  // namespace specstab
