#include "rtfs/contingency.hpp"

#include <algorithm>
#include <cstdio>

namespace rtfs {

namespace {

template <typename Better>
std::string pick_unit(const SystemSnapshot& snapshot, Better better)
{
    const GeneratorUnit* best = nullptr;
    for (const auto& unit : snapshot.units) {
        if (unit.online && (best == nullptr || better(unit, *best))) {
            best = &unit;
        }
    }
    if (best == nullptr) {
        throw ValidationError("snapshot", "no online units");
    }
    return best->id;
}

void remove_unit(SystemSnapshot& snapshot, const std::string& unit_id, double& output_mw)
{
    auto it = std::find_if(snapshot.units.begin(), snapshot.units.end(),
                           [&](const GeneratorUnit& u) { return u.id == unit_id; });
    if (it == snapshot.units.end()) {
        throw ValidationError(unit_id, "unit not present in snapshot");
    }
    if (!it->online) {
        throw ValidationError(unit_id, "unit is offline");
    }
    output_mw = it->output_mw;
    snapshot.units.erase(it);
}

} // namespace

std::string largest_mw_unit(const SystemSnapshot& snapshot)
{
    return pick_unit(snapshot, [](const GeneratorUnit& a, const GeneratorUnit& b) {
        if (a.output_mw != b.output_mw) {
            return a.output_mw > b.output_mw;
        }
        if (a.kinetic_energy != b.kinetic_energy) {
            return a.kinetic_energy > b.kinetic_energy;
        }
        return a.id < b.id;
    });
}

std::string largest_inertia_unit(const SystemSnapshot& snapshot)
{
    return pick_unit(snapshot, [](const GeneratorUnit& a, const GeneratorUnit& b) {
        if (a.kinetic_energy != b.kinetic_energy) {
            return a.kinetic_energy > b.kinetic_energy;
        }
        if (a.output_mw != b.output_mw) {
            return a.output_mw > b.output_mw;
        }
        return a.id < b.id;
    });
}

ContingencyScenario build_scenario(const SystemSnapshot& snapshot, const std::string& unit_id,
                                   std::span<const ContingencyStage> stages)
{
    ContingencyScenario scenario;
    scenario.base = snapshot;
    double output = 0.0;
    remove_unit(scenario.base, unit_id, output);
    scenario.delta_p_cont = -output;
    scenario.label = "trip " + unit_id;

    for (const auto& stage : stages) {
        ContingencyStage added = stage;
        if (!stage.unit_id.empty()) {
            double stage_output = 0.0;
            remove_unit(scenario.base, stage.unit_id, stage_output);
            if (added.delta_mw == 0.0) {
                added.delta_mw = -stage_output;
            }
            scenario.label += " + " + stage.unit_id;
        }
        char when[32];
        std::snprintf(when, sizeof when, " @%gs", stage.delay_s);
        scenario.label += when;
        scenario.stages.push_back(added);
    }
    scenario.trivial = scenario.delta_p_cont == 0.0 &&
                       std::all_of(scenario.stages.begin(), scenario.stages.end(),
                                   [](const ContingencyStage& s) { return s.delta_mw == 0.0; });
    return scenario;
}

SimulationResult worst_case(const SystemSnapshot& snapshot, const SimulationConfig& config, double ke_load)
{
    const std::string by_mw = largest_mw_unit(snapshot);
    const std::string by_inertia = largest_inertia_unit(snapshot);

    auto run = [&](const std::string& unit_id, const std::string& label) {
        auto scenario = build_scenario(snapshot, unit_id);
        scenario.label = label + ": trip " + unit_id;
        return simulate(scenario, config, ke_load);
    };

    if (by_mw == by_inertia) {
        return run(by_mw, "largest-mw+largest-inertia");
    }
    SimulationResult mw_result = run(by_mw, "largest-mw");
    SimulationResult inertia_result = run(by_inertia, "largest-inertia");
    // Equal nadirs keep the largest-MW case.
    return inertia_result.nadir_hz < mw_result.nadir_hz ? std::move(inertia_result) : std::move(mw_result);
}

} // namespace rtfs
