#include "rtfs/service.hpp"

#include <algorithm>
#include <cmath>

#include "rtfs/time_util.hpp"

namespace rtfs {

namespace {

constexpr double kBalanceTolerance = 1e-6;  // MW

void set_reason(ServiceStatus& status, const std::string& reason, bool active)
{
    auto& reasons = status.degraded_reasons;
    const auto it = std::find(reasons.begin(), reasons.end(), reason);
    if (active && it == reasons.end()) {
        reasons.push_back(reason);
    } else if (!active && it != reasons.end()) {
        reasons.erase(it);
    }
    status.degraded = !reasons.empty();
}

const std::string kStaleReason = "stale snapshot";
const std::string kStorageReason = "results storage unavailable";
const std::string kCycleReason = "last cycle failed";

} // namespace

std::string_view to_string(CycleStatus status)
{
    switch (status) {
    case CycleStatus::completed:
        return "completed";
    case CycleStatus::skipped_stale:
        return "skipped-stale";
    case CycleStatus::failed:
        return "failed";
    }
    return "failed";
}

double resolve_load_inertia(const SystemSnapshot& snapshot, const LoadInertiaModel& model)
{
    if (snapshot.load_inertia_override) {
        return *snapshot.load_inertia_override;
    }
    return predict_load_inertia(snapshot.system_load_mw, model);
}

bool breaches_limit(const SimulationResult& result)
{
    return result.event == EventDirection::under ? result.nadir_hz < result.alarm_threshold
                                                 : result.zenith_hz > result.alarm_threshold;
}

bool alarm_state(const SimulationResult* latest, const SimulationResult* previous)
{
    return (latest != nullptr && breaches_limit(*latest)) || (previous != nullptr && breaches_limit(*previous));
}

SystemSnapshot apply_redispatch(const SystemSnapshot& base, const WhatIfRequest& request)
{
    std::vector<Violation> violations;
    SystemSnapshot out = base;
    double total = 0.0;
    for (const auto& [id, delta] : request.deltas) {
        auto it = std::find_if(out.units.begin(), out.units.end(), [&](const GeneratorUnit& u) { return u.id == id; });
        if (it == out.units.end()) {
            violations.push_back({id, "unknown unit"});
            continue;
        }
        if (!std::isfinite(delta)) {
            violations.push_back({id, "delta is not finite"});
            continue;
        }
        if (!it->online && delta != 0.0) {
            violations.push_back({id, "unit is offline"});
            continue;
        }
        const double output = it->output_mw + delta;
        if (output < -kBalanceTolerance) {
            violations.push_back({id, "redispatch takes output below zero (" + std::to_string(output) + " MW)"});
            continue;
        }
        if (output > it->rated_mw + kBalanceTolerance) {
            violations.push_back({id, "redispatch pushes output above rating (" + std::to_string(output) + " > " +
                                          std::to_string(it->rated_mw) + " MW)"});
            continue;
        }
        it->output_mw = std::clamp(output, 0.0, it->rated_mw);
        it->spinning_reserve_mw = std::clamp(it->spinning_reserve_mw - delta, 0.0, it->rated_mw - it->output_mw);
        total += delta;
    }
    if (!request.allow_unbalanced && std::abs(total) > kBalanceTolerance) {
        violations.push_back({"redispatch", "deltas sum to " + std::to_string(total) +
                                                " MW; set allow_unbalanced to accept an unbalanced redispatch"});
    }
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }
    return out;
}

RtfsService::RtfsService(ServiceConfig config) : config_(std::move(config))
{
    config_.simulation.validate();
    if (!config_.parameter_store.empty()) {
        parameters_ = UnitParameterStore::load(config_.parameter_store);
    }
    auto initial = std::make_shared<State>();
    if (!config_.results_dir.empty()) {
        try {
            store_ = std::make_unique<ResultsStore>(config_.results_dir);
        } catch (const StorageError&) {
            initial->status.storage_ok = false;
            set_reason(initial->status, kStorageReason, true);
        }
    }
    state_ = std::move(initial);
}

std::shared_ptr<const RtfsService::State> RtfsService::load_state() const
{
    std::lock_guard lock(state_mutex_);
    return state_;
}

void RtfsService::publish(std::shared_ptr<State> next)
{
    {
        std::lock_guard lock(state_mutex_);
        next->status.sequence = state_->status.sequence + 1;
        state_ = std::move(next);
    }
    state_changed_.notify_all();
}

SystemSnapshot RtfsService::prepare(const SystemSnapshot& snapshot) const
{
    return validate_snapshot(parameters_ ? parameters_->apply(snapshot) : snapshot);
}

CycleOutcome RtfsService::run_cycle(const SystemSnapshot& snapshot, UtcTime now)
{
    std::lock_guard cycle_lock(cycle_mutex_);
    const auto current = load_state();
    auto next = std::make_shared<State>(*current);
    next->status.last_snapshot_time = std::max(snapshot.timestamp, current->status.last_snapshot_time.value_or(snapshot.timestamp));

    CycleOutcome outcome;
    if (seconds_between(snapshot.timestamp, now) > config_.staleness_s) {
        next->status.snapshot_stale = true;
        set_reason(next->status, kStaleReason, true);
        outcome.status = CycleStatus::skipped_stale;
        outcome.result = current->latest;
        outcome.message = "snapshot " + format_utc(snapshot.timestamp) + " is older than " +
                          std::to_string(config_.staleness_s) + " s; cycle skipped";
        publish(std::move(next));
        return outcome;
    }

    try {
        auto prepared = std::make_shared<const SystemSnapshot>(prepare(snapshot));
        const double ke_load = resolve_load_inertia(*prepared, config_.load_inertia_model);
        auto result = std::make_shared<const SimulationResult>(worst_case(*prepared, config_.simulation, ke_load));

        bool stored = store_ != nullptr;
        if (store_) {
            try {
                store_->store_result(*result);
            } catch (const StorageError& e) {
                stored = false;
                outcome.message = e.what();
            }
        }
        next->status.storage_ok = store_ == nullptr ? next->status.storage_ok : stored;
        set_reason(next->status, kStorageReason, !next->status.storage_ok);

        next->previous = current->latest;
        next->latest = result;
        next->snapshot = prepared;
        next->status.alarm = alarm_state(next->latest.get(), next->previous.get());
        next->status.snapshot_stale = false;
        set_reason(next->status, kStaleReason, false);
        set_reason(next->status, kCycleReason, false);
        next->status.last_cycle_time = now;
        next->status.cycles_completed += 1;
        next->status.latest_nadir_hz = result->nadir_hz;
        next->status.latest_label = result->scenario_label;

        outcome.status = CycleStatus::completed;
        outcome.result = result;
    } catch (const Error& e) {
        set_reason(next->status, kCycleReason, true);
        outcome.status = CycleStatus::failed;
        outcome.result = current->latest;
        outcome.message = e.what();
    }
    publish(std::move(next));
    return outcome;
}

void RtfsService::check_staleness(std::optional<UtcTime> newest_snapshot, UtcTime now)
{
    std::lock_guard cycle_lock(cycle_mutex_);
    const auto current = load_state();
    const bool stale = !newest_snapshot || seconds_between(*newest_snapshot, now) > config_.staleness_s;
    if (stale == current->status.snapshot_stale) {
        return;
    }
    auto next = std::make_shared<State>(*current);
    next->status.snapshot_stale = stale;
    set_reason(next->status, kStaleReason, stale);
    publish(std::move(next));
}

SimulationResult RtfsService::whatif(const WhatIfRequest& request) const
{
    const auto state = load_state();
    if (!state->snapshot) {
        throw Error("no operational snapshot available yet");
    }
    return whatif(*state->snapshot, request);
}

SimulationResult RtfsService::whatif(const SystemSnapshot& base, const WhatIfRequest& request) const
{
    const SystemSnapshot snapshot = validate_snapshot(apply_redispatch(prepare(base), request));
    const double ke_load = resolve_load_inertia(snapshot, config_.load_inertia_model);
    SimulationResult result;
    if (request.trip_unit) {
        auto scenario = build_scenario(snapshot, *request.trip_unit, request.stages);
        result = simulate(scenario, config_.simulation, ke_load);
    } else {
        result = worst_case(snapshot, config_.simulation, ke_load);
    }
    result.scenario_label = "what-if: " + result.scenario_label;
    return result;
}

ServiceStatus RtfsService::status() const
{
    return load_state()->status;
}

std::shared_ptr<const SimulationResult> RtfsService::latest_result() const
{
    return load_state()->latest;
}

std::shared_ptr<const SystemSnapshot> RtfsService::latest_snapshot() const
{
    return load_state()->snapshot;
}

std::vector<ResultSummary> RtfsService::history(UtcTime from, UtcTime to) const
{
    if (!store_) {
        return {};
    }
    return store_->list(from, to);
}

std::uint64_t RtfsService::wait_for_update(std::uint64_t seen, std::chrono::milliseconds timeout) const
{
    std::unique_lock lock(state_mutex_);
    state_changed_.wait_for(lock, timeout, [&] { return state_->status.sequence != seen; });
    return state_->status.sequence;
}

SnapshotSource SnapshotSource::directory(std::filesystem::path dir, ParseMode mode)
{
    return SnapshotSource(std::move(dir), true, mode);
}

SnapshotSource SnapshotSource::file(std::filesystem::path path, ParseMode mode)
{
    return SnapshotSource(std::move(path), false, mode);
}

std::optional<SystemSnapshot> SnapshotSource::poll()
{
    last_error_.clear();
    std::vector<std::filesystem::path> candidates;
    std::error_code ec;
    if (is_directory_) {
        for (const auto& entry : std::filesystem::directory_iterator(path_, ec)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                candidates.push_back(entry.path());
            }
        }
        if (ec) {
            last_error_ = "cannot list " + path_.string() + ": " + ec.message();
            return std::nullopt;
        }
    } else if (std::filesystem::exists(path_, ec)) {
        candidates.push_back(path_);
    }

    std::optional<SystemSnapshot> newest;
    for (const auto& path : candidates) {
        try {
            SystemSnapshot s = parse_snapshot_document(read_text_file(path), mode_).snapshot;
            if (!newest || s.timestamp > newest->timestamp) {
                newest = std::move(s);
            }
        } catch (const Error& e) {
            // Half-written files show up here too; the next poll retries.
            last_error_ = path.filename().string() + ": " + e.what();
        }
    }
    return newest;
}

ServiceRunner::ServiceRunner(RtfsService& service, SnapshotSource source)
    : service_(service), source_(std::move(source)), scheduler_(service.config().cycle_period_s)
{
}

ServiceRunner::~ServiceRunner()
{
    stop();
}

void ServiceRunner::start()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = false;
    }
    thread_ = std::thread([this] { loop(); });
}

void ServiceRunner::stop()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    if (thread_.joinable()) {
        thread_.join();
    }
}

void ServiceRunner::tick(double monotonic_s, UtcTime now)
{
    if (auto snapshot = source_.poll()) {
        if (!newest_seen_ || snapshot->timestamp > *newest_seen_) {
            newest_seen_ = snapshot->timestamp;
        }
        if ((!last_cycled_ || snapshot->timestamp > *last_cycled_) &&
            (!pending_ || snapshot->timestamp > pending_->timestamp)) {
            pending_ = std::move(snapshot);
        }
    }
    if (!scheduler_.due(monotonic_s) || !pending_) {
        service_.check_staleness(newest_seen_, now);
        return;
    }
    const CycleOutcome outcome = service_.run_cycle(*pending_, now);
    last_cycled_ = pending_->timestamp;
    pending_.reset();
    if (outcome.status == CycleStatus::completed) {
        scheduler_.record_run(monotonic_s);
    }
}

void ServiceRunner::loop()
{
    const auto period = std::chrono::duration<double>(service_.config().poll_interval_s);
    const auto origin = std::chrono::steady_clock::now();
    std::unique_lock lock(mutex_);
    while (!stopping_) {
        lock.unlock();
        const double monotonic = std::chrono::duration<double>(std::chrono::steady_clock::now() - origin).count();
        tick(monotonic, utc_now());
        lock.lock();
        wake_.wait_for(lock, period, [this] { return stopping_; });
    }
}

} // namespace rtfs
