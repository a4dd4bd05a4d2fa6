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

#include <string>
#include <vector>

#include "measure.hpp"
#include "report.hpp"
#include "surface_mesh.hpp"

namespace specstab {

/// Construct a mesh from a spec string: "icosphere:L",
/// "icosphere_unit:L", "torus:c,d:n", or a mesh file path.
SurfaceMesh mesh_from_spec(const std::string& spec);

/// Construct a measure from a spec string: "uniform", "unit",
/// "caps:eps:M", "perturb:l:m:t", "random:amplitude" (seeded harmonic
/// mix), or a measure file path.
MeasureOnMesh measure_from_spec(const SurfaceMesh& mesh, const std::string& spec,
                                std::uint64_t seed);

/// Registered audit names, in the order they are documented.
const std::vector<std::string>& experiment_names();

/// Run one audit by name. Unknown names raise InvalidInput with the
/// registered list in the message.
StabilityReport run_experiment(const std::string& name, const RunConfig& config);

StabilityReport lemma21_audit(const RunConfig& config);
StabilityReport hersch_audit(const RunConfig& config);
StabilityReport sharpness_audit(const RunConfig& config);
StabilityReport concentration_audit(const RunConfig& config);
StabilityReport robin_audit(const RunConfig& config);
StabilityReport bubbling_audit(const RunConfig& config);
StabilityReport canonical_audit(const RunConfig& config);
StabilityReport jacobi_audit(const RunConfig& config);
StabilityReport density_audit(const RunConfig& config);

}  // namespace specstab
