#pragma once

// Per-unit primary frequency response: deadband, droop reference, reserve
// limiter, first-order turbine-governor lag and droop ramp-rate limiter.
//
// Frequency deviation convention throughout: dev = f_n - f, positive while
// the system is under-frequency.

#include "rtfs/fleet.hpp"

namespace rtfs {

/// Under: max(dev - halfwidth, 0). Over: min(dev + halfwidth, 0).
double deadband_adjust(double dev, EventDirection event, double halfwidth);

/// P_n / (droop_fraction * f_n) * dev_db, in MW.
double droop_reference(const GeneratorUnit& unit, double dev_db, double nominal_frequency, double droop_fraction);

/// Caps the reference to spinning reserve (under) or load rejection (over).
double limit_reference(const GeneratorUnit& unit, double ref_mw, EventDirection event);

/// Zero-order-hold step of T dx/dt + x = K ref.
double lag_step(double state_mw, double ref_mw, double gain, double time_constant, double dt);

/// prev + clamp(candidate - prev, -mdrr dt, +mdrr dt).
double ramp_limit(double prev_mw, double candidate_mw, double mdrr, double dt);

/// P_load0 k_p dev / f_n; positive (load shrinks) while under-frequency.
double load_relief(double load_mw, double load_relief_factor, double dev, double nominal_frequency);

struct PfrState {
    double lag_mw = 0.0;     // unlimited first-order lag output
    double output_mw = 0.0;  // after ramp limiting and reserve capping

    bool operator==(const PfrState&) const = default;
};

struct GovernorSettings {
    double nominal_frequency = 50.0;
    double droop_fraction = 0.04;
    double deadband_halfwidth = 0.025;
    double time_step = 0.01;
};

/// Runs one unit through the full response chain for one step.
///
/// `reference_offset_mw` is the droop reference already being served before
/// the contingency; it is subtracted so that only the incremental response
/// is produced. It is zero whenever the pre-contingency frequency sits inside
/// the deadband.
class UnitGovernor {
public:
    UnitGovernor(const GeneratorUnit& unit, const GovernorSettings& settings, EventDirection event,
                 double pre_event_dev = 0.0);

    /// Advances from the current state to the next sample using the
    /// frequency deviation held over the step.
    const PfrState& step(double dev);

    const PfrState& state() const noexcept { return state_; }
    const GeneratorUnit& unit() const noexcept { return unit_; }
    double reference_for(double dev) const;

private:
    GeneratorUnit unit_;
    GovernorSettings settings_;
    EventDirection event_;
    double reference_offset_mw_ = 0.0;
    double lag_decay_ = 0.0;
    PfrState state_;
};

} // namespace rtfs
