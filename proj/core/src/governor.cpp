#include "rtfs/governor.hpp"

#include <algorithm>
#include <cmath>

namespace rtfs {

double deadband_adjust(double dev, EventDirection event, double halfwidth)
{
    if (event == EventDirection::under) {
        return std::max(dev - halfwidth, 0.0);
    }
    return std::min(dev + halfwidth, 0.0);
}

double droop_reference(const GeneratorUnit& unit, double dev_db, double nominal_frequency, double droop_fraction)
{
    return unit.rated_mw / (droop_fraction * nominal_frequency) * dev_db;
}

double limit_reference(const GeneratorUnit& unit, double ref_mw, EventDirection event)
{
    if (event == EventDirection::under) {
        return std::min(ref_mw, unit.spinning_reserve_mw);
    }
    return std::max(ref_mw, -unit.load_rejection_mw);
}

double lag_step(double state_mw, double ref_mw, double gain, double time_constant, double dt)
{
    const double decay = std::exp(-dt / time_constant);
    return state_mw * decay + gain * ref_mw * (1.0 - decay);
}

double ramp_limit(double prev_mw, double candidate_mw, double mdrr, double dt)
{
    const double max_change = mdrr * dt;
    return prev_mw + std::clamp(candidate_mw - prev_mw, -max_change, max_change);
}

double load_relief(double load_mw, double load_relief_factor, double dev, double nominal_frequency)
{
    return load_mw * load_relief_factor * dev / nominal_frequency;
}

UnitGovernor::UnitGovernor(const GeneratorUnit& unit, const GovernorSettings& settings, EventDirection event,
                           double pre_event_dev)
    : unit_(unit), settings_(settings), event_(event)
{
    reference_offset_mw_ = droop_reference(unit_, deadband_adjust(pre_event_dev, event_, settings_.deadband_halfwidth),
                                           settings_.nominal_frequency, settings_.droop_fraction);
    lag_decay_ = std::exp(-settings_.time_step / unit_.time_constant);
}

double UnitGovernor::reference_for(double dev) const
{
    const double dev_db = deadband_adjust(dev, event_, settings_.deadband_halfwidth);
    const double ref = droop_reference(unit_, dev_db, settings_.nominal_frequency, settings_.droop_fraction) -
                       reference_offset_mw_;
    return limit_reference(unit_, ref, event_);
}

const PfrState& UnitGovernor::step(double dev)
{
    const double ref = reference_for(dev);
    // Same update as lag_step(); the decay factor is cached for the march.
    state_.lag_mw = state_.lag_mw * lag_decay_ + unit_.gain * ref * (1.0 - lag_decay_);
    double out = ramp_limit(state_.output_mw, state_.lag_mw, unit_.mdrr, settings_.time_step);
    // With K > 1 the lag can settle above the reserve cap.
    out = std::clamp(out, -unit_.load_rejection_mw, unit_.spinning_reserve_mw);
    state_.output_mw = out;
    return state_;
}

} // namespace rtfs
