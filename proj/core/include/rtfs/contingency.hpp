#pragma once

#include <span>
#include <string>

#include "rtfs/freq_sim.hpp"

namespace rtfs {

/// Online unit with the largest MW output; ties go to larger kinetic energy,
/// then the lexicographically smaller id.
std::string largest_mw_unit(const SystemSnapshot& snapshot);

/// Online unit with the largest kinetic energy; ties go to larger output,
/// then the lexicographically smaller id.
std::string largest_inertia_unit(const SystemSnapshot& snapshot);

/// Trips `unit_id` at t = 0. Stages that name a unit also remove that unit
/// from the fleet and default their MW change to minus its output when
/// `delta_mw` is zero.
ContingencyScenario build_scenario(const SystemSnapshot& snapshot, const std::string& unit_id,
                                   std::span<const ContingencyStage> stages = {});

/// Simulates the largest-MW and largest-inertia trips (once if they are the
/// same unit) and returns the result with the lower nadir.
SimulationResult worst_case(const SystemSnapshot& snapshot, const SimulationConfig& config, double ke_load);

} // namespace rtfs
