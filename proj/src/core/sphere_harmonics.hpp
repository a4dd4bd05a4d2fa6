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

#include <vector>

namespace specstab {

/// Real spherical harmonics up to a fixed degree, orthonormal on the
/// curvature-one sphere (area 4π), evaluated through Cartesian-stable
/// Legendre recurrences. Sup norms of values and tangential gradients
/// are computed by dense sampling plus local ascent and inflated by a
/// small safety factor, keeping dual-norm quotients conservative.
class SphericalHarmonicBasis {
public:
    explicit SphericalHarmonicBasis(int max_degree);

    int max_degree() const { return max_degree_; }
    int size() const { return static_cast<int>(index_.size()); }
    int degree(int k) const { return index_[k].l; }
    int order(int k) const { return index_[k].m; }

    double value(int k, const Eigen::Vector3d& x) const;
    Eigen::Vector3d tangent_gradient(int k, const Eigen::Vector3d& x) const;

    /// ‖Y_k‖_{C⁰}, conservative upper estimate.
    double sup_value(int k) const;
    /// ‖∇Y_k‖_{C⁰}, conservative upper estimate.
    double sup_gradient(int k) const;

private:
    struct Entry {
        int l;
        int m;  // signed: m >= 0 cosine type, m < 0 sine type
    };
    std::vector<Entry> index_;
    int max_degree_;
    mutable std::vector<double> sup_value_cache_;
    mutable std::vector<double> sup_gradient_cache_;
};

}  // namespace specstab
