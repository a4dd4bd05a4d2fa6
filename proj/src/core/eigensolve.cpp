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
#include "eigensolve.hpp"

#include <Eigen/SparseCholesky>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <vector>

namespace specstab {

double SpectralResult::normalized(int k) const
{
    if (k < 0 || k >= count())
        fail(ErrorCode::InvalidInput, "eigenvalue index out of computed range");
    return lambdas[k] * mass;
}

void SpectralResult::save(const std::string& path) const
{
    nlohmann::json doc;
    doc["lambdas"] = std::vector<double>(lambdas.data(), lambdas.data() + lambdas.size());
    std::vector<double> normalized_values(count());
    for (int i = 0; i < count(); ++i) normalized_values[i] = normalized(i);
    doc["normalized"] = normalized_values;
    doc["mass"] = mass;
    doc["residuals"] = std::vector<double>(residuals.data(), residuals.data() + residuals.size());
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write spectrum file: " + path);
    out << doc.dump(1) << "\n";
}

namespace {

struct PencilWorkspace {
    const SparseOperator& K;
    const SparseOperator& M;
    Eigen::SimplicialLDLT<SparseOperator> factor;
    Eigen::VectorXd ones;
    Eigen::VectorXd m_ones;
    double mass = 0.0;
    double shift = 0.0;
};

double relative_residual(const PencilWorkspace& ws, const Eigen::VectorXd& phi, double lambda)
{
    const Eigen::VectorXd kphi = ws.K * phi;
    const Eigen::VectorXd mphi = ws.M * phi;
    if (lambda == 0.0) {
        // Constant mode: K·1 vanishes to assembly roundoff, so measure it
        // against the operator scale instead of its own norm.
        const double scale = ws.K.diagonal().cwiseAbs().maxCoeff() * phi.norm();
        return scale > 0.0 ? kphi.norm() / scale : 0.0;
    }
    const double denom = kphi.norm() + std::abs(lambda) * mphi.norm();
    if (denom == 0.0) return 0.0;
    return (kphi - lambda * mphi).norm() / denom;
}

}  // namespace

SpectralResult solve_generalized(const SparseOperator& stiffness, const SparseOperator& mass,
                                 int k, const EigOptions& options)
{
    const int n = static_cast<int>(stiffness.rows());
    if (mass.rows() != n || k < 0)
        fail(ErrorCode::InvalidInput, "eigensolver inputs are inconsistent");

    // Discrete stand-in for the requirement that test subspaces stay
    // (k+1)-dimensional in L²(μ): the mass must touch more than k vertices.
    const Eigen::VectorXd mdiag = mass.diagonal();
    const double dmax = mdiag.maxCoeff();
    int rank_proxy = 0;
    for (int i = 0; i < n; ++i)
        if (mdiag[i] > 1e-14 * dmax) ++rank_proxy;
    if (rank_proxy <= k)
        fail(ErrorCode::RankDeficient,
             "measure mass matrix supports at most " + std::to_string(rank_proxy) +
                 " eigenvalues; need k+1 = " + std::to_string(k + 1));

    PencilWorkspace ws{stiffness, mass, {}, Eigen::VectorXd::Ones(n), {}, 0.0, 0.0};
    ws.m_ones = mass * ws.ones;
    ws.mass = ws.ones.dot(ws.m_ones);
    if (!(ws.mass > 0.0)) fail(ErrorCode::InvalidInput, "mass matrix has nonpositive total mass");

    double scale = stiffness.diagonal().sum() / mass.diagonal().sum();
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    ws.shift = 1e-6 * scale;
    for (int attempt = 0; attempt < 4; ++attempt) {
        SparseOperator shifted = stiffness + ws.shift * mass;
        ws.factor.compute(shifted);
        if (ws.factor.info() == Eigen::Success) break;
        ws.shift *= 100.0;
        if (attempt == 3) fail(ErrorCode::Numeric, "factorization of the shifted pencil failed");
    }

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Eigen::VectorXd> locked;        // M-orthonormal converged eigenvectors
    std::vector<Eigen::VectorXd> locked_m;      // M * locked
    std::vector<double> locked_lambda;

    auto project_out = [&](Eigen::VectorXd& v) {
        v -= (ws.m_ones.dot(v) / ws.mass) * ws.ones;
        for (size_t i = 0; i < locked.size(); ++i) v -= locked_m[i].dot(v) * locked[i];
    };

    const int want = k;
    int restart = 0;
    for (; restart < options.max_restarts && static_cast<int>(locked.size()) < want; ++restart) {
        Eigen::VectorXd q(n);
        for (int i = 0; i < n; ++i) q[i] = gauss(rng);
        project_out(q);
        double qn = std::sqrt(std::max(q.dot(mass * q), 0.0));
        if (qn < 1e-200) continue;
        q /= qn;

        const int m_max = std::min(options.block_size, std::max(8, n - 1));
        std::vector<Eigen::VectorXd> basis;     // Lanczos vectors
        std::vector<Eigen::VectorXd> basis_m;   // M * basis
        std::vector<double> alpha, beta;
        basis.push_back(q);
        basis_m.push_back(mass * q);

        for (int j = 0; j < m_max; ++j) {
            Eigen::VectorXd w = ws.factor.solve(basis_m[j]);
            project_out(w);
            const double a = basis_m[j].dot(w);
            alpha.push_back(a);
            w -= a * basis[j];
            if (j > 0) w -= beta[j - 1] * basis[j - 1];
            // full reorthogonalization, twice
            for (int pass = 0; pass < 2; ++pass)
                for (size_t i = 0; i < basis.size(); ++i) w -= basis_m[i].dot(w) * basis[i];
            Eigen::VectorXd mw = mass * w;
            const double b = std::sqrt(std::max(w.dot(mw), 0.0));
            if (b < 1e-13 * std::abs(a) || b < 1e-200) break;
            beta.push_back(b);
            basis.push_back(w / b);
            basis_m.push_back(mw / b);
        }

        const int m = static_cast<int>(alpha.size());
        if (m == 0) continue;
        Eigen::MatrixXd tridiag = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tridiag(i, i) = alpha[i];
            if (i + 1 < m && i < static_cast<int>(beta.size())) {
                tridiag(i, i + 1) = beta[i];
                tridiag(i + 1, i) = beta[i];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiag);
        // Largest θ of the shift-inverted operator ↔ smallest λ.
        for (int idx = m - 1; idx >= 0 && static_cast<int>(locked.size()) < want; --idx) {
            const double theta = es.eigenvalues()[idx];
            if (theta <= 0.0) break;
            const double lambda = 1.0 / theta - ws.shift;
            Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < m; ++i) phi += es.eigenvectors()(i, idx) * basis[i];
            project_out(phi);
            const double norm = std::sqrt(std::max(phi.dot(mass * phi), 0.0));
            if (norm < 1e-200) continue;
            phi /= norm;
            if (relative_residual(ws, phi, lambda) <= options.tol) {
                locked.push_back(phi);
                locked_m.push_back(mass * phi);
                locked_lambda.push_back(lambda);
            }
        }
    }

    if (static_cast<int>(locked.size()) < want)
        fail(ErrorCode::Numeric,
             "eigensolver did not converge: " + std::to_string(locked.size()) + " of " +
                 std::to_string(want) + " pairs after " + std::to_string(restart) + " restarts");

    // Sort by eigenvalue and prepend the exact constant mode.
    std::vector<int> order(locked.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return locked_lambda[a] < locked_lambda[b]; });

    SpectralResult result;
    result.lambdas.resize(k + 1);
    result.eigenvectors.resize(n, k + 1);
    result.residuals.resize(k + 1);
    result.mass = ws.mass;

    result.lambdas[0] = 0.0;
    result.eigenvectors.col(0) = ws.ones / std::sqrt(ws.mass);
    result.residuals[0] = relative_residual(ws, result.eigenvectors.col(0), 0.0);
    for (int i = 0; i < k; ++i) {
        const int src = order[i];
        result.lambdas[i + 1] = locked_lambda[src];
        result.eigenvectors.col(i + 1) = locked[src];
        result.residuals[i + 1] = relative_residual(ws, locked[src], locked_lambda[src]);
    }
    return result;
}

SpectralResult solve_measure_spectrum(const SurfaceMesh& mesh, const MeasureOnMesh& measure,
                                      int k, const EigOptions& options)
{
    const SparseOperator stiffness = assemble_stiffness(mesh);
    const SparseOperator mass = assemble_mass(mesh, measure);
    SpectralResult result = solve_generalized(stiffness, mass, k, options);
    result.normalization = measure.normalization();
    return result;
}

}  // namespace specstab
