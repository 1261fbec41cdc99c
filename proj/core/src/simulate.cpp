#include "rtfs/freq_sim.hpp"

#include <algorithm>
#include <cmath>

#include "rtfs/governor.hpp"

namespace rtfs {

namespace {

// Relay timing tolerance for delays that are an exact multiple of dt.
constexpr double kTimeEps = 1e-9;

PowerTrace make_power_trace(double dt, std::size_t samples)
{
    return PowerTrace{0.0, dt, std::vector<double>(samples, 0.0)};
}

} // namespace

EventDirection ContingencyScenario::direction() const
{
    if (delta_p_cont != 0.0) {
        return delta_p_cont < 0.0 ? EventDirection::under : EventDirection::over;
    }
    for (const auto& stage : stages) {
        if (stage.delta_mw != 0.0) {
            return stage.delta_mw < 0.0 ? EventDirection::under : EventDirection::over;
        }
    }
    return EventDirection::under;
}

double ContingencyScenario::imbalance_at(double t) const
{
    double total = delta_p_cont;
    for (const auto& stage : stages) {
        if (t + kTimeEps >= stage.delay_s) {
            total += stage.delta_mw;
        }
    }
    return total;
}

std::vector<Violation> ContingencyScenario::check() const
{
    // Tripping the last online unit leaves an empty fleet, which is a valid
    // (load-inertia only) scenario.
    std::vector<Violation> out = check_snapshot(base);
    std::erase_if(out, [](const Violation& v) { return v.message == "no online units"; });
    if (!std::isfinite(delta_p_cont)) {
        out.push_back({"scenario", "contingency size is not finite"});
    }
    if (delta_p_cont == 0.0 && !trivial && stages.empty()) {
        out.push_back({"scenario", "zero contingency must be flagged trivial"});
    }
    const auto dir = direction();
    double last_delay = 0.0;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& s = stages[i];
        if (!std::isfinite(s.delay_s) || !std::isfinite(s.delta_mw)) {
            out.push_back({"scenario", "stage " + std::to_string(i) + " is not finite"});
            continue;
        }
        if (!(s.delay_s > last_delay)) {
            out.push_back({"scenario", "stage delays must be strictly increasing and positive"});
        }
        last_delay = s.delay_s;
        if (s.delta_mw != 0.0 && ((s.delta_mw < 0.0) != (dir == EventDirection::under))) {
            out.push_back({"scenario", "stage " + std::to_string(i) + " opposes the contingency direction"});
        }
    }
    return out;
}

SdrRelays::SdrRelays(std::span<const SdrBlock> blocks, double pre_event_frequency)
{
    for (const auto& block : blocks) {
        if (block.armed && block.trip_frequency < pre_event_frequency) {
            relays_.push_back(Relay{block});
        }
    }
}

double SdrRelays::step(double frequency, double t)
{
    for (auto& relay : relays_) {
        if (relay.tripped) {
            continue;
        }
        if (frequency < relay.block.trip_frequency) {
            if (!relay.below) {
                relay.below = true;
                relay.below_since = t;
            }
            if (t - relay.below_since + kTimeEps >= relay.block.pickup_delay) {
                relay.tripped = true;
                tripped_mw_ += relay.block.amount_mw;
                trips_.push_back({relay.block.id, t, relay.block.amount_mw});
            }
        } else {
            relay.below = false;
        }
    }
    return tripped_mw_;
}

SimulationResult simulate(const ContingencyScenario& scenario, const SimulationConfig& config, double ke_load)
{
    config.validate();
    if (auto v = scenario.check(); !v.empty()) {
        throw ValidationError(std::move(v));
    }
    if (!(ke_load >= 0.0) || !std::isfinite(ke_load)) {
        throw ValidationError("scenario", "load inertia must be non-negative");
    }

    const SystemSnapshot& base = scenario.base;
    const double f_n = base.nominal_frequency;
    const double f_0 = base.pre_contingency_frequency;
    const double dev_0 = f_n - f_0;
    const double dt = config.time_step;
    const EventDirection event = scenario.direction();

    const double ke_gen = total_generation_inertia(base);
    const double ke_sys = ke_gen + ke_load;
    if (!(ke_sys > 0.0)) {
        throw SimulationError("system inertia must be positive", 0);
    }

    const auto steps = static_cast<std::size_t>(std::llround(config.horizon / dt));
    const std::size_t samples = steps + 1;

    SimulationResult result;
    result.scenario_label = scenario.label;
    result.snapshot_time = base.timestamp;
    result.event = event;
    result.delta_p_cont = scenario.delta_p_cont;
    result.ke_gen = ke_gen;
    result.ke_load = ke_load;
    result.ke_sys = ke_sys;
    result.alarm_threshold = event == EventDirection::under ? config.ufls_threshold : config.zenith_threshold;

    GovernorSettings settings{f_n, config.droop_fraction, config.deadband_halfwidth, dt};
    std::vector<UnitGovernor> governors;
    std::vector<PowerTrace*> unit_traces;
    for (const auto& unit : base.units) {
        if (unit.online && unit.droop_enabled) {
            governors.emplace_back(unit, settings, event, dev_0);
        }
    }
    for (const auto& gov : governors) {
        result.per_unit_pfr[gov.unit().id] = make_power_trace(dt, samples);
    }
    for (const auto& gov : governors) {
        unit_traces.push_back(&result.per_unit_pfr.at(gov.unit().id));
    }

    // SDR is an under-frequency scheme; it is inactive for load-loss events.
    std::vector<SdrBlock> sdr_blocks;
    if (event == EventDirection::under) {
        sdr_blocks = base.sdr_blocks;
    }
    SdrRelays relays(sdr_blocks, f_0);

    result.frequency = FrequencyTrace{0.0, dt, std::vector<double>(samples, f_0)};
    result.load_relief = make_power_trace(dt, samples);
    result.sdr = make_power_trace(dt, samples);
    result.total_imbalance = make_power_trace(dt, samples);

    auto& f = result.frequency.samples;
    auto& lr = result.load_relief.values;
    auto& sdr = result.sdr.values;
    auto& dp = result.total_imbalance.values;

    // The march runs on x = f - f_0 so a balanced system stays exactly at f_0.
    // Load relief is taken relative to the pre-contingency operating point.
    const double relief_slope = base.system_load_mw * base.load_relief_factor / f_n;  // MW per Hz
    const double h = dt * f_n / (4.0 * ke_sys);

    sdr[0] = relays.step(f_0, 0.0);
    dp[0] = scenario.imbalance_at(0.0) + sdr[0];

    double x = 0.0;
    double dev_prev = dev_0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t_next = dt * static_cast<double>(k + 1);
        const double dev_k = f_n - f[k];
        // Governors see the deviation extrapolated to the middle of the step,
        // which keeps the explicit coupling second-order in dt.
        const double dev_mid = 1.5 * dev_k - 0.5 * dev_prev;
        dev_prev = dev_k;

        double pfr = 0.0;
        for (std::size_t u = 0; u < governors.size(); ++u) {
            const double out = governors[u].step(dev_mid).output_mw;
            unit_traces[u]->values[k + 1] = out;
            pfr += out;
        }

        // Everything except load relief is known at the step end; load relief
        // is linear in f, so the trapezoid is solved for x[k+1] directly.
        const double known = scenario.imbalance_at(t_next) + pfr + relays.tripped_mw();
        x = (x + h * (dp[k] + known)) / (1.0 + h * relief_slope);
        const double f_next = f_0 + x;
        if (!std::isfinite(f_next)) {
            throw SimulationError("frequency became non-finite", k + 1);
        }
        f[k + 1] = f_next;
        lr[k + 1] = -relief_slope * x;
        sdr[k + 1] = relays.step(f_next, t_next);
        dp[k + 1] = scenario.imbalance_at(t_next) + pfr + lr[k + 1] + sdr[k + 1];
        if (!std::isfinite(dp[k + 1])) {
            throw SimulationError("power imbalance became non-finite", k + 1);
        }
    }
    result.sdr_tripped = relays.trips();

    const auto min_it = std::min_element(f.begin(), f.end());
    const auto max_it = std::max_element(f.begin(), f.end());
    result.nadir_hz = *min_it;
    result.nadir_time = result.frequency.time_at(static_cast<std::size_t>(min_it - f.begin()));
    result.zenith_hz = *max_it;
    result.zenith_time = result.frequency.time_at(static_cast<std::size_t>(max_it - f.begin()));
    result.alarm = event == EventDirection::under ? result.nadir_hz < config.ufls_threshold
                                                  : result.zenith_hz > config.zenith_threshold;
    return result;
}

} // namespace rtfs
