#pragma once

// Single-mass frequency response simulation.
//
// The march integrates
//     df/dt = (f_n / 2) * dP(t) / KE_sys
//     dP(t) = dP_cont(t) + sum_i dP_DR_i(t) + dP_LR(t) + dP_SDR(t)
// on a fixed grid with the trapezoidal rule. Load relief is linear in f and
// is folded into the trapezoid implicitly. Governors are stepped explicitly
// with the deviation extrapolated to the middle of each step from the two
// latest samples.

#include <span>
#include <string>
#include <vector>

#include "rtfs/fleet.hpp"

namespace rtfs {

/// A later MW change applied `delay_s` after the initial trip. When `unit_id`
/// names a unit, that unit was already removed from the scenario fleet.
struct ContingencyStage {
    double delay_s = 0.0;
    double delta_mw = 0.0;
    std::string unit_id;

    bool operator==(const ContingencyStage&) const = default;
};

struct ContingencyScenario {
    SystemSnapshot base;       // fleet with tripped unit(s) removed
    double delta_p_cont = 0.0; // MW; negative for generation loss
    std::string label;
    std::vector<ContingencyStage> stages;
    bool trivial = false;      // zero-size contingency

    EventDirection direction() const;
    /// dP_cont(t) including every stage whose delay has elapsed.
    double imbalance_at(double t) const;
    std::vector<Violation> check() const;
};

/// Latching under-frequency relays for the SDR blocks.
class SdrRelays {
public:
    /// Blocks already at or above their setting before the event are
    /// treated as unavailable and never trip.
    SdrRelays(std::span<const SdrBlock> blocks, double pre_event_frequency);

    /// Feeds one frequency sample at time `t`; returns total tripped MW.
    double step(double frequency, double t);

    double tripped_mw() const noexcept { return tripped_mw_; }
    const std::vector<SdrTrip>& trips() const noexcept { return trips_; }

private:
    struct Relay {
        SdrBlock block;
        bool below = false;
        double below_since = 0.0;
        bool tripped = false;
    };
    std::vector<Relay> relays_;
    std::vector<SdrTrip> trips_;
    double tripped_mw_ = 0.0;
};

/// Runs the scenario over [0, horizon]. Throws SimulationError on a
/// non-positive system inertia or a non-finite state.
SimulationResult simulate(const ContingencyScenario& scenario, const SimulationConfig& config, double ke_load);

} // namespace rtfs
