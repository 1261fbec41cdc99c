#pragma once

// Serialized forms: snapshot documents (JSON), the unit-parameter store
// (JSON), fault-recorder trace files (delimited text with a '#' header) and
// the append-only results store (JSON lines).

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtfs/calibration.hpp"
#include "rtfs/fleet.hpp"
#include "rtfs/inertia.hpp"

namespace rtfs {

inline constexpr int kSnapshotSchemaVersion = 1;
inline constexpr int kResultSchemaVersion = 1;

enum class ParseMode { strict, lenient };

struct SnapshotDocument {
    int schema_version = kSnapshotSchemaVersion;
    SystemSnapshot snapshot;
    /// Unknown members kept in lenient mode, keyed by JSON pointer, stored as
    /// serialized JSON.
    std::map<std::string, std::string> unknown_fields;
};

/// Parses without running snapshot validation.
SnapshotDocument parse_snapshot_document(std::string_view text, ParseMode mode = ParseMode::strict);

/// Parses and validates. Omitted system fields default to f_n = 50 Hz,
/// k_p = 2 and f_0 = f_n.
SystemSnapshot parse_snapshot(std::string_view text, ParseMode mode = ParseMode::strict);

std::string serialize_snapshot(const SystemSnapshot& snapshot);
std::string serialize_snapshot_document(const SnapshotDocument& document);

std::string read_text_file(const std::filesystem::path& path);
SystemSnapshot load_snapshot_file(const std::filesystem::path& path, ParseMode mode = ParseMode::strict);

/// Calibrated per-unit values that override what the snapshot feed carries.
struct UnitParameters {
    std::optional<double> gain;
    std::optional<double> time_constant;
    std::optional<double> mdrr;
    std::optional<double> kinetic_energy;

    bool operator==(const UnitParameters&) const = default;
};

class UnitParameterStore {
public:
    static UnitParameterStore parse(std::string_view text);
    static UnitParameterStore load(const std::filesystem::path& path);

    std::string serialize() const;
    void save(const std::filesystem::path& path) const;

    void set(const std::string& unit_id, const UnitParameters& params);
    void set_lag(const std::string& unit_id, double gain, double time_constant);
    const UnitParameters* find(const std::string& unit_id) const;
    const std::map<std::string, UnitParameters>& units() const noexcept { return units_; }

    /// Copies stored values onto matching units in the snapshot.
    SystemSnapshot apply(SystemSnapshot snapshot) const;

private:
    std::map<std::string, UnitParameters> units_;
};

struct TraceChannel {
    std::string name;
    std::string unit;
    std::vector<double> values;
};

/// Uniform multi-channel trace read from a recorder export.
struct TraceFile {
    std::string event_id;
    UtcTime start_utc{};
    double sample_rate_hz = 0.0;
    double start_offset = 0.0;  // first sample time, s after start_utc
    std::map<std::string, std::string> metadata;
    std::vector<TraceChannel> channels;
    bool resampled = false;

    double time_step() const { return 1.0 / sample_rate_hz; }
    std::size_t sample_count() const { return channels.empty() ? 0 : channels.front().values.size(); }
    const TraceChannel& channel(std::string_view name) const;
    bool has_channel(std::string_view name) const;
    FrequencyTrace frequency(std::string_view name = "frequency") const;
    PowerTrace power(std::string_view name) const;
    std::optional<std::string> meta(std::string_view key) const;
    double meta_number(std::string_view key) const;
    std::optional<double> meta_number_or(std::string_view key) const;
};

/// Jitter above this is an error; below it the data is resampled linearly.
inline constexpr double kMaxTraceJitter = 1e-3;

TraceFile parse_trace_file(std::string_view text);
TraceFile load_trace_file(const std::filesystem::path& path);
std::string serialize_trace_file(const TraceFile& trace);

/// Metadata keys: delta_p_mw, onset_s, pre_event_load_mw, ke_gen_mws,
/// event_kind (sudden-trip | ramp-down).
DisturbanceRecord to_disturbance_record(const TraceFile& trace);

/// Channels frequency + output_mw. Metadata keys: unit_id, onset_s, rated_mw,
/// spinning_reserve_mw, load_rejection_mw, mdrr and optionally
/// deadband_halfwidth, droop_fraction, nominal_frequency, frequency_source.
UnitEventTrace to_unit_event_trace(const TraceFile& trace);

/// Channels frequency + load_mw. Only samples from onset_s onward are used
/// when that key is present.
std::vector<FrequencyLoadPair> to_frequency_load_pairs(const TraceFile& trace);

/// Full-fidelity JSON for a result. When `max_points` is set, traces are
/// decimated for transport (see decimate_min_preserving) and emitted as
/// explicit (t, value) arrays.
std::string result_to_json(const SimulationResult& result, std::optional<std::size_t> max_points = std::nullopt);
SimulationResult result_from_json(std::string_view text);

struct DecimatedTrace {
    std::vector<double> t;
    std::vector<double> value;
};

/// Reduces a trace to at most `max_points` samples, keeping the first and
/// last sample and the minimum and maximum of every bucket, so the global
/// extremes survive exactly.
DecimatedTrace decimate_min_preserving(const FrequencyTrace& trace, std::size_t max_points);

struct ResultSummary {
    UtcTime timestamp{};
    std::string scenario_label;
    double nadir_hz = 0.0;
    double nadir_time = 0.0;
    bool alarm = false;
};

/// Append-only result history. Records are keyed by snapshot time and
/// scenario label; one JSON line per calculation.
class ResultsStore {
public:
    explicit ResultsStore(std::filesystem::path directory);

    void store_result(const SimulationResult& result);
    /// Results whose snapshot time lies in [from, to].
    std::vector<SimulationResult> load_history(UtcTime from, UtcTime to) const;
    std::vector<ResultSummary> list(UtcTime from, UtcTime to) const;

    const std::filesystem::path& file() const noexcept { return file_; }

private:
    std::filesystem::path file_;
    mutable std::mutex mutex_;
};

} // namespace rtfs
