#include <algorithm>

#include "json_util.hpp"
#include "rtfs/ingestion.hpp"

namespace rtfs {

using detail::Json;

namespace {

DecimatedTrace decimate(double start, double step, const std::vector<double>& values, std::size_t max_points)
{
    DecimatedTrace out;
    const std::size_t n = values.size();
    auto emit = [&](std::size_t i) {
        out.t.push_back(start + step * static_cast<double>(i));
        out.value.push_back(values[i]);
    };
    if (max_points < 4) {
        throw ValidationError("decimation", "max_points must be at least 4 to keep both ends and the extremes");
    }
    if (n <= max_points) {
        for (std::size_t i = 0; i < n; ++i) {
            emit(i);
        }
        return out;
    }
    emit(0);
    const std::size_t interior = n - 2;
    const std::size_t buckets = (max_points - 2) / 2;
    for (std::size_t b = 0; b < buckets; ++b) {
        const std::size_t lo = 1 + interior * b / buckets;
        const std::size_t hi = 1 + interior * (b + 1) / buckets;  // exclusive
        if (lo >= hi) {
            continue;
        }
        const auto first = values.begin() + static_cast<std::ptrdiff_t>(lo);
        const auto last = values.begin() + static_cast<std::ptrdiff_t>(hi);
        const auto [min_it, max_it] = std::minmax_element(first, last);
        auto a = static_cast<std::size_t>(min_it - values.begin());
        auto c = static_cast<std::size_t>(max_it - values.begin());
        if (a > c) {
            std::swap(a, c);
        }
        emit(a);
        if (c != a) {
            emit(c);
        }
    }
    emit(n - 1);
    return out;
}

Json trace_json(double start, double step, const std::vector<double>& values, const char* key,
                std::optional<std::size_t> max_points)
{
    if (max_points) {
        const DecimatedTrace d = decimate(start, step, values, *max_points);
        return Json{{"t", d.t}, {"values", d.value}, {"decimated", values.size() > *max_points},
                    {"original_samples", values.size()}};
    }
    return Json{{"start_time", start}, {"time_step", step}, {key, values}};
}

Json power_json(const PowerTrace& p, std::optional<std::size_t> max_points)
{
    return trace_json(p.start_time, p.time_step, p.values, "values", max_points);
}

PowerTrace power_from_json(const Json& j, const std::string& path)
{
    detail::object_at(j, path);
    if (j.contains("decimated")) {
        detail::field_error(path, "decimated transport traces cannot be decoded into a result");
    }
    PowerTrace p;
    p.start_time = detail::number(j, "start_time", path);
    p.time_step = detail::number(j, "time_step", path);
    p.values = j.at("values").get<std::vector<double>>();
    return p;
}

} // namespace

DecimatedTrace decimate_min_preserving(const FrequencyTrace& trace, std::size_t max_points)
{
    return decimate(trace.start_time, trace.time_step, trace.samples, max_points);
}

std::string result_to_json(const SimulationResult& r, std::optional<std::size_t> max_points)
{
    Json units = Json::object();
    for (const auto& [id, trace] : r.per_unit_pfr) {
        units[id] = power_json(trace, max_points);
    }
    Json trips = Json::array();
    for (const auto& t : r.sdr_tripped) {
        trips.push_back(Json{{"block_id", t.block_id}, {"time", t.time}, {"amount_mw", t.amount_mw}});
    }
    Json j{{"schema_version", kResultSchemaVersion},
           {"scenario_label", r.scenario_label},
           {"snapshot_time", format_utc(r.snapshot_time)},
           {"event", std::string(to_string(r.event))},
           {"nadir_hz", r.nadir_hz},
           {"nadir_time", r.nadir_time},
           {"zenith_hz", r.zenith_hz},
           {"zenith_time", r.zenith_time},
           {"delta_p_cont", r.delta_p_cont},
           {"ke_gen", r.ke_gen},
           {"ke_load", r.ke_load},
           {"ke_sys", r.ke_sys},
           {"alarm", r.alarm},
           {"alarm_threshold", r.alarm_threshold},
           {"frequency", trace_json(r.frequency.start_time, r.frequency.time_step, r.frequency.samples, "samples",
                                    max_points)},
           {"per_unit_pfr", units},
           {"load_relief", power_json(r.load_relief, max_points)},
           {"sdr", power_json(r.sdr, max_points)},
           {"sdr_tripped", trips},
           {"total_imbalance", power_json(r.total_imbalance, max_points)}};
    return j.dump();
}

SimulationResult detail::result_from_json_value(const Json& j)
{
    detail::object_at(j, "");
    const Json* version = detail::member(j, "schema_version");
    if (version == nullptr || !version->is_number_integer() || version->get<int>() != kResultSchemaVersion) {
        detail::field_error("/schema_version", "missing or unsupported result schema version");
    }
    try {
        SimulationResult r;
        r.scenario_label = detail::string_field(j, "scenario_label", "");
        r.snapshot_time = detail::time_field(j, "snapshot_time", "");
        const std::string event = detail::string_field(j, "event", "");
        if (event != "under" && event != "over") {
            detail::field_error("/event", "expected 'under' or 'over'");
        }
        r.event = event == "under" ? EventDirection::under : EventDirection::over;
        r.nadir_hz = detail::number(j, "nadir_hz", "");
        r.nadir_time = detail::number(j, "nadir_time", "");
        r.zenith_hz = detail::number(j, "zenith_hz", "");
        r.zenith_time = detail::number(j, "zenith_time", "");
        r.delta_p_cont = detail::number(j, "delta_p_cont", "");
        r.ke_gen = detail::number(j, "ke_gen", "");
        r.ke_load = detail::number(j, "ke_load", "");
        r.ke_sys = detail::number(j, "ke_sys", "");
        r.alarm = detail::boolean_or(j, "alarm", "", false);
        r.alarm_threshold = detail::number(j, "alarm_threshold", "");

        const Json& f = detail::object_at(j.at("frequency"), "/frequency");
        if (f.contains("decimated")) {
            detail::field_error("/frequency", "decimated transport traces cannot be decoded into a result");
        }
        r.frequency.start_time = detail::number(f, "start_time", "/frequency");
        r.frequency.time_step = detail::number(f, "time_step", "/frequency");
        r.frequency.samples = f.at("samples").get<std::vector<double>>();

        const Json& units = detail::object_at(j.at("per_unit_pfr"), "/per_unit_pfr");
        for (auto it = units.begin(); it != units.end(); ++it) {
            r.per_unit_pfr[it.key()] = power_from_json(it.value(), "/per_unit_pfr/" + it.key());
        }
        r.load_relief = power_from_json(j.at("load_relief"), "/load_relief");
        r.sdr = power_from_json(j.at("sdr"), "/sdr");
        r.total_imbalance = power_from_json(j.at("total_imbalance"), "/total_imbalance");
        for (const auto& t : j.at("sdr_tripped")) {
            r.sdr_tripped.push_back({detail::string_field(t, "block_id", "/sdr_tripped"),
                                     detail::number(t, "time", "/sdr_tripped"),
                                     detail::number(t, "amount_mw", "/sdr_tripped")});
        }
        return r;
    } catch (const Json::exception& e) {
        throw ParseError("", 0, 0, std::string("result document: ") + e.what());
    }
}

SimulationResult result_from_json(std::string_view text)
{
    return detail::result_from_json_value(detail::parse_json_text(text));
}

} // namespace rtfs
