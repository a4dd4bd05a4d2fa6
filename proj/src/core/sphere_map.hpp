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

#include <functional>
#include <string>

#include "errors.hpp"

namespace specstab {

/// Map into Sⁿ ⊂ ℝⁿ⁺¹: per-vertex values on a SurfaceMesh, optionally
/// with a closed-form evaluator (in mesh reference coordinates) for
/// refinement studies and high-order quadrature.
struct SphereValuedMap {
    Eigen::MatrixXd values;  // V×(n+1), unit rows
    std::function<Eigen::VectorXd(const Eigen::Vector3d&)> analytic;
    std::string analytic_tag;

    int target_dim() const { return static_cast<int>(values.cols()) - 1; }

    void validate_unit(double tol = 1e-10) const
    {
        for (int i = 0; i < values.rows(); ++i)
            if (std::abs(values.row(i).norm() - 1.0) > tol)
                fail(ErrorCode::InvalidInput,
                     "map value at vertex " + std::to_string(i) + " is not on the unit sphere");
    }
};

}  // namespace specstab
