#pragma once

// Operational loop: periodic worst-case calculation, alarm state, what-if
// test mode, and the snapshot polling runner.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rtfs/contingency.hpp"
#include "rtfs/fleet.hpp"
#include "rtfs/inertia.hpp"
#include "rtfs/ingestion.hpp"

namespace rtfs {

struct ServiceConfig {
    SimulationConfig simulation;
    double cycle_period_s = 300.0;
    double poll_interval_s = 4.0;
    double staleness_s = 60.0;
    std::filesystem::path snapshot_dir;     // watched directory
    std::filesystem::path snapshot_file;    // or one explicit file
    std::filesystem::path results_dir;
    std::filesystem::path parameter_store;
    LoadInertiaModel load_inertia_model;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_transport_points = 1000;
    ParseMode snapshot_mode = ParseMode::strict;
};

/// Relative paths are resolved against `base_dir`.
ServiceConfig parse_service_config(std::string_view text, const std::filesystem::path& base_dir = {});
ServiceConfig load_service_config(const std::filesystem::path& path);

/// RTFS_SNAPSHOT_DIR and RTFS_RESULTS_DIR override the configured paths.
void apply_environment(ServiceConfig& config);

/// Override from the snapshot when present, otherwise the regression.
double resolve_load_inertia(const SystemSnapshot& snapshot, const LoadInertiaModel& model);

/// True when the result breaches its own alarm threshold.
bool breaches_limit(const SimulationResult& result);

/// Alarm with clear-hysteresis: raised by one breaching result, cleared only
/// after two consecutive non-breaching results.
bool alarm_state(const SimulationResult* latest, const SimulationResult* previous);

enum class CycleStatus { completed, skipped_stale, failed };

std::string_view to_string(CycleStatus status);

struct CycleOutcome {
    CycleStatus status = CycleStatus::failed;
    std::shared_ptr<const SimulationResult> result;
    std::string message;
};

struct ServiceStatus {
    bool alarm = false;
    bool degraded = false;
    std::vector<std::string> degraded_reasons;
    bool snapshot_stale = false;
    bool storage_ok = true;
    std::optional<UtcTime> last_cycle_time;
    std::optional<UtcTime> last_snapshot_time;
    std::uint64_t cycles_completed = 0;
    std::uint64_t sequence = 0;  // bumps on every state change
    std::optional<double> latest_nadir_hz;
    std::string latest_label;
};

struct WhatIfRequest {
    std::map<std::string, double> deltas;  // unit id -> MW change
    bool allow_unbalanced = false;
    std::optional<std::string> trip_unit;  // manual scenario; worst case when empty
    std::vector<ContingencyStage> stages;
};

/// Applies redispatch deltas, moving spinning reserve the opposite way.
/// Throws ValidationError with one violation per offending unit.
SystemSnapshot apply_redispatch(const SystemSnapshot& base, const WhatIfRequest& request);

class RtfsService {
public:
    explicit RtfsService(ServiceConfig config);

    /// One full calculation on `snapshot` evaluated at wall time `now`.
    CycleOutcome run_cycle(const SystemSnapshot& snapshot, UtcTime now);

    /// Marks the service degraded when the newest snapshot seen by the feed
    /// (none at all counts as stale) has aged past the staleness bound.
    void check_staleness(std::optional<UtcTime> newest_snapshot, UtcTime now);

    /// Test mode against the snapshot of the latest completed cycle. Never
    /// touches operational state.
    SimulationResult whatif(const WhatIfRequest& request) const;
    SimulationResult whatif(const SystemSnapshot& base, const WhatIfRequest& request) const;

    ServiceStatus status() const;
    std::shared_ptr<const SimulationResult> latest_result() const;
    std::shared_ptr<const SystemSnapshot> latest_snapshot() const;
    std::vector<ResultSummary> history(UtcTime from, UtcTime to) const;

    /// Blocks until the state sequence differs from `seen` or the timeout
    /// elapses; returns the current sequence.
    std::uint64_t wait_for_update(std::uint64_t seen, std::chrono::milliseconds timeout) const;

    const ServiceConfig& config() const noexcept { return config_; }

private:
    struct State {
        std::shared_ptr<const SimulationResult> latest;
        std::shared_ptr<const SimulationResult> previous;
        std::shared_ptr<const SystemSnapshot> snapshot;
        ServiceStatus status;
    };

    std::shared_ptr<const State> load_state() const;
    void publish(std::shared_ptr<State> next);
    SystemSnapshot prepare(const SystemSnapshot& snapshot) const;

    ServiceConfig config_;
    std::optional<UnitParameterStore> parameters_;
    std::unique_ptr<ResultsStore> store_;

    mutable std::mutex state_mutex_;
    mutable std::condition_variable state_changed_;
    std::shared_ptr<const State> state_;
    std::mutex cycle_mutex_;  // single writer
};

/// Spacing of full calculations; snapshot polling alone never makes a cycle due.
class CycleScheduler {
public:
    explicit CycleScheduler(double period_s) : period_s_(period_s) {}

    bool due(double now_s) const { return !last_run_s_ || now_s >= *last_run_s_ + period_s_; }
    void record_run(double now_s) { last_run_s_ = now_s; }
    std::optional<double> last_run() const { return last_run_s_; }

private:
    double period_s_;
    std::optional<double> last_run_s_;
};

/// Finds the newest snapshot: the newest-timestamp document in a watched
/// directory, or a single explicitly named file.
class SnapshotSource {
public:
    static SnapshotSource directory(std::filesystem::path dir, ParseMode mode = ParseMode::strict);
    static SnapshotSource file(std::filesystem::path path, ParseMode mode = ParseMode::strict);

    /// Unreadable or invalid documents are skipped and reported via
    /// last_error().
    std::optional<SystemSnapshot> poll();
    const std::string& last_error() const noexcept { return last_error_; }

private:
    SnapshotSource(std::filesystem::path path, bool is_directory, ParseMode mode)
        : path_(std::move(path)), is_directory_(is_directory), mode_(mode) {}

    std::filesystem::path path_;
    bool is_directory_;
    ParseMode mode_;
    std::string last_error_;
};

/// Owns the scheduler thread: polls the source every poll interval and runs
/// a cycle when one is due and a snapshot newer than the last cycle exists.
class ServiceRunner {
public:
    ServiceRunner(RtfsService& service, SnapshotSource source);
    ~ServiceRunner();

    ServiceRunner(const ServiceRunner&) = delete;
    ServiceRunner& operator=(const ServiceRunner&) = delete;

    void start();
    void stop();

    /// One poll tick; exposed so the loop can be driven deterministically.
    void tick(double monotonic_s, UtcTime now);

private:
    void loop();

    RtfsService& service_;
    SnapshotSource source_;
    CycleScheduler scheduler_;
    std::optional<UtcTime> last_cycled_;
    std::optional<UtcTime> newest_seen_;
    std::optional<SystemSnapshot> pending_;

    std::thread thread_;
    std::mutex mutex_;
    std::condition_variable wake_;
    bool stopping_ = false;
};

} // namespace rtfs
