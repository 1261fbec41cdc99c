#pragma once

// Domain records shared by every part of the engine. All of them are plain
// values: once built and validated they are never mutated in place.

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtfs/errors.hpp"

namespace rtfs {

using UtcTime = std::chrono::sys_time<std::chrono::milliseconds>;

/// Under-frequency for generation loss, over-frequency for load loss.
enum class EventDirection { under, over };

std::string_view to_string(EventDirection direction);

struct GeneratorUnit {
    std::string id;
    double rated_mw = 0.0;
    double output_mw = 0.0;
    double kinetic_energy = 0.0;       // MW·s, nameplate
    double spinning_reserve_mw = 0.0;  // headroom for under-frequency response
    double load_rejection_mw = 0.0;    // room for over-frequency response
    bool droop_enabled = false;
    double gain = 1.0;
    double time_constant = 1.0;        // s
    double mdrr = 0.0;                 // MW/s
    bool online = true;

    bool operator==(const GeneratorUnit&) const = default;
};

/// Contracted demand response tripped by an under-frequency relay.
struct SdrBlock {
    std::string id;
    double amount_mw = 0.0;
    double trip_frequency = 49.0;
    double pickup_delay = 0.0;
    bool armed = true;

    bool operator==(const SdrBlock&) const = default;
};

struct SystemSnapshot {
    UtcTime timestamp{};
    std::vector<GeneratorUnit> units;
    std::vector<SdrBlock> sdr_blocks;
    double system_load_mw = 0.0;
    double pre_contingency_frequency = 50.0;
    double nominal_frequency = 50.0;
    double load_relief_factor = 2.0;
    std::optional<double> load_inertia_override;

    const GeneratorUnit* find_unit(std::string_view id) const;

    bool operator==(const SystemSnapshot&) const = default;
};

struct SimulationConfig {
    double time_step = 0.01;
    double horizon = 60.0;
    double deadband_halfwidth = 0.025;
    double droop_fraction = 0.04;
    double ufls_threshold = 48.75;
    double zenith_threshold = 51.0;

    std::vector<Violation> check() const;
    void validate() const;

    bool operator==(const SimulationConfig&) const = default;
};

/// Uniformly sampled frequency in Hz.
struct FrequencyTrace {
    double start_time = 0.0;
    double time_step = 0.0;
    std::vector<double> samples;

    double time_at(std::size_t index) const { return start_time + time_step * static_cast<double>(index); }
    double duration() const;

    bool operator==(const FrequencyTrace&) const = default;
};

/// Checks the measured-trace invariants (positive step, non-empty, 40..60 Hz).
std::vector<Violation> check_trace(const FrequencyTrace& trace);

/// Uniformly sampled MW quantity.
struct PowerTrace {
    double start_time = 0.0;
    double time_step = 0.0;
    std::vector<double> values;

    double time_at(std::size_t index) const { return start_time + time_step * static_cast<double>(index); }

    bool operator==(const PowerTrace&) const = default;
};

struct SdrTrip {
    std::string block_id;
    double time = 0.0;
    double amount_mw = 0.0;

    bool operator==(const SdrTrip&) const = default;
};

struct SimulationResult {
    std::string scenario_label;
    UtcTime snapshot_time{};
    EventDirection event = EventDirection::under;

    FrequencyTrace frequency;
    double nadir_hz = 0.0;
    double nadir_time = 0.0;
    double zenith_hz = 0.0;
    double zenith_time = 0.0;

    std::map<std::string, PowerTrace> per_unit_pfr;
    PowerTrace load_relief;
    PowerTrace sdr;  // cumulative tripped MW
    std::vector<SdrTrip> sdr_tripped;
    PowerTrace total_imbalance;

    double delta_p_cont = 0.0;  // initial step, MW (signed)
    double ke_gen = 0.0;
    double ke_load = 0.0;
    double ke_sys = 0.0;

    bool alarm = false;
    double alarm_threshold = 0.0;

    bool operator==(const SimulationResult&) const = default;
};

std::vector<Violation> check_unit(const GeneratorUnit& unit);
std::vector<Violation> check_sdr_block(const SdrBlock& block, double nominal_frequency);
std::vector<Violation> check_snapshot(const SystemSnapshot& snapshot);

/// Returns the snapshot unchanged when every invariant holds, otherwise
/// throws ValidationError listing each violation.
SystemSnapshot validate_snapshot(SystemSnapshot snapshot);

/// Sum of nameplate kinetic energy over online units (MW·s).
double total_generation_inertia(const SystemSnapshot& snapshot);

} // namespace rtfs
