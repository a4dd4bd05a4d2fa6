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

#include <array>

namespace specstab {

struct QuadNode {
    double b0, b1, b2;  // barycentric coordinates
    double w;           // weight, sums to 1 over the rule
};

/// Midpoint rule, exact for quadratics on a triangle.
inline const std::array<QuadNode, 3>& tri_quadrature_deg2()
{
    static const std::array<QuadNode, 3> rule = {{
        {0.5, 0.5, 0.0, 1.0 / 3.0},
        {0.0, 0.5, 0.5, 1.0 / 3.0},
        {0.5, 0.0, 0.5, 1.0 / 3.0},
    }};
    return rule;
}

/// Seven-point rule, exact for quintics on a triangle.
inline const std::array<QuadNode, 7>& tri_quadrature_deg5()
{
    constexpr double a1 = 0.059715871789770;
    constexpr double b1 = 0.470142064105115;
    constexpr double w1 = 0.132394152788506;
    constexpr double a2 = 0.797426985353087;
    constexpr double b2 = 0.101286507323456;
    constexpr double w2 = 0.125939180544827;
    static const std::array<QuadNode, 7> rule = {{
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
        {a1, b1, b1, w1},
        {b1, a1, b1, w1},
        {b1, b1, a1, w1},
        {a2, b2, b2, w2},
        {b2, a2, b2, w2},
        {b2, b2, a2, w2},
    }};
    return rule;
}

}  // namespace specstab
