#include "rtfs/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rtfs {

namespace {

// Absolute slack for MW sums read from SCADA with finite precision.
constexpr double kMwSlack = 1e-9;

std::string join_violations(const std::vector<Violation>& violations)
{
    std::ostringstream out;
    out << "validation failed:";
    for (const auto& v : violations) {
        out << "\n  [" << v.subject << "] " << v.message;
    }
    return out.str();
}

bool finite_all(std::initializer_list<double> values)
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

} // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(join_violations(violations)), violations_(std::move(violations))
{
}

ParseError::ParseError(std::string field, std::size_t line, std::size_t column, const std::string& what)
    : Error(what), field_(std::move(field)), line_(line), column_(column)
{
}

std::string_view to_string(EventDirection direction)
{
    return direction == EventDirection::under ? "under" : "over";
}

const GeneratorUnit* SystemSnapshot::find_unit(std::string_view id) const
{
    auto it = std::find_if(units.begin(), units.end(), [&](const GeneratorUnit& u) { return u.id == id; });
    return it == units.end() ? nullptr : &*it;
}

double FrequencyTrace::duration() const
{
    return samples.empty() ? 0.0 : time_step * static_cast<double>(samples.size() - 1);
}

std::vector<Violation> SimulationConfig::check() const
{
    std::vector<Violation> out;
    auto add = [&](const char* msg) { out.push_back({"config", msg}); };
    if (!(time_step > 0.0 && time_step <= 0.1)) {
        add("time_step must lie in (0, 0.1] s");
    }
    if (!(horizon >= 10.0) || !std::isfinite(horizon)) {
        add("horizon must be at least 10 s");
    }
    if (!(deadband_halfwidth >= 0.0)) {
        add("deadband_halfwidth must be non-negative");
    }
    if (!(droop_fraction > 0.0)) {
        add("droop_fraction must be positive");
    }
    if (!std::isfinite(ufls_threshold) || !std::isfinite(zenith_threshold)) {
        add("alarm thresholds must be finite");
    }
    return out;
}

void SimulationConfig::validate() const
{
    if (auto v = check(); !v.empty()) {
        throw ValidationError(std::move(v));
    }
}

std::vector<Violation> check_trace(const FrequencyTrace& trace)
{
    std::vector<Violation> out;
    if (!(trace.time_step > 0.0)) {
        out.push_back({"trace", "time_step must be positive"});
    }
    if (trace.samples.empty()) {
        out.push_back({"trace", "trace has no samples"});
    }
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const double f = trace.samples[i];
        if (!(f >= 40.0 && f <= 60.0)) {
            out.push_back({"trace", "sample " + std::to_string(i) + " outside [40, 60] Hz"});
            break;
        }
    }
    return out;
}

std::vector<Violation> check_unit(const GeneratorUnit& unit)
{
    std::vector<Violation> out;
    const std::string subject = unit.id.empty() ? std::string("<unnamed unit>") : unit.id;
    auto add = [&](std::string msg) { out.push_back({subject, std::move(msg)}); };

    if (unit.id.empty()) {
        add("unit id is empty");
    }
    if (!finite_all({unit.rated_mw, unit.output_mw, unit.kinetic_energy, unit.spinning_reserve_mw,
                     unit.load_rejection_mw, unit.gain, unit.time_constant, unit.mdrr})) {
        add("non-finite field");
        return out;
    }
    if (!(unit.rated_mw > 0.0)) {
        add("rated_mw must be positive");
    }
    if (unit.kinetic_energy < 0.0) {
        add("kinetic_energy must be non-negative");
    }
    if (!(unit.time_constant > 0.0)) {
        add("time_constant must be positive");
    }
    if (!(unit.gain > 0.0 && unit.gain <= 1.5)) {
        add("gain must lie in (0, 1.5]");
    }
    if (unit.output_mw < 0.0) {
        add("output is negative");
    }
    if (unit.output_mw > unit.rated_mw + kMwSlack) {
        add("output exceeds rating");
    }
    if (unit.spinning_reserve_mw < 0.0) {
        add("spinning reserve is negative");
    }
    if (unit.spinning_reserve_mw > unit.rated_mw - unit.output_mw + kMwSlack) {
        add("spinning reserve exceeds unloaded capacity");
    }
    if (unit.load_rejection_mw < 0.0) {
        add("load rejection is negative");
    }
    if (unit.droop_enabled && !(unit.mdrr > 0.0)) {
        add("mdrr must be positive for a droop-enabled unit");
    }
    return out;
}

std::vector<Violation> check_sdr_block(const SdrBlock& block, double nominal_frequency)
{
    std::vector<Violation> out;
    const std::string subject = block.id.empty() ? std::string("<unnamed sdr block>") : block.id;
    if (block.id.empty()) {
        out.push_back({subject, "sdr block id is empty"});
    }
    if (!finite_all({block.amount_mw, block.trip_frequency, block.pickup_delay})) {
        out.push_back({subject, "non-finite field"});
        return out;
    }
    if (block.amount_mw < 0.0) {
        out.push_back({subject, "amount_mw must be non-negative"});
    }
    if (!(block.trip_frequency < nominal_frequency)) {
        out.push_back({subject, "trip frequency must be below nominal"});
    }
    if (block.pickup_delay < 0.0) {
        out.push_back({subject, "pickup delay must be non-negative"});
    }
    return out;
}

std::vector<Violation> check_snapshot(const SystemSnapshot& snapshot)
{
    std::vector<Violation> out;
    auto add = [&](std::string msg) { out.push_back({"snapshot", std::move(msg)}); };

    if (!(snapshot.system_load_mw > 0.0) || !std::isfinite(snapshot.system_load_mw)) {
        add("system load must be positive");
    }
    if (!(snapshot.pre_contingency_frequency >= 45.0 && snapshot.pre_contingency_frequency <= 55.0)) {
        add("pre-contingency frequency outside [45, 55] Hz");
    }
    if (!(snapshot.nominal_frequency > 0.0) || !std::isfinite(snapshot.nominal_frequency)) {
        add("nominal frequency must be positive");
    }
    if (!(snapshot.load_relief_factor >= 0.0) || !std::isfinite(snapshot.load_relief_factor)) {
        add("load relief factor must be non-negative");
    }
    if (snapshot.load_inertia_override &&
        !(*snapshot.load_inertia_override >= 0.0 && std::isfinite(*snapshot.load_inertia_override))) {
        add("load inertia override must be non-negative");
    }

    std::vector<std::string> seen;
    for (const auto& unit : snapshot.units) {
        auto v = check_unit(unit);
        out.insert(out.end(), v.begin(), v.end());
        if (std::find(seen.begin(), seen.end(), unit.id) != seen.end()) {
            out.push_back({unit.id, "duplicate unit id"});
        }
        seen.push_back(unit.id);
    }
    for (const auto& block : snapshot.sdr_blocks) {
        auto v = check_sdr_block(block, snapshot.nominal_frequency);
        out.insert(out.end(), v.begin(), v.end());
    }
    if (std::none_of(snapshot.units.begin(), snapshot.units.end(), [](const GeneratorUnit& u) { return u.online; })) {
        add("no online units");
    }
    return out;
}

SystemSnapshot validate_snapshot(SystemSnapshot snapshot)
{
    if (auto v = check_snapshot(snapshot); !v.empty()) {
        throw ValidationError(std::move(v));
    }
    return snapshot;
}

double total_generation_inertia(const SystemSnapshot& snapshot)
{
    return std::accumulate(snapshot.units.begin(), snapshot.units.end(), 0.0,
                           [](double acc, const GeneratorUnit& u) { return u.online ? acc + u.kinetic_energy : acc; });
}

} // namespace rtfs
