#include <cstdlib>

#include "json_util.hpp"
#include "rtfs/service.hpp"

namespace rtfs {

using detail::Json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value)
{
    if (value.empty()) {
        return {};
    }
    std::filesystem::path p(value);
    return p.is_relative() && !base.empty() ? base / p : p;
}

std::string optional_string(const Json& j, const char* key, const std::string& path)
{
    const Json* v = detail::member(j, key);
    if (v == nullptr) {
        return {};
    }
    if (!v->is_string()) {
        detail::field_error(path + "/" + key, "expected a string");
    }
    return v->get<std::string>();
}

} // namespace

ServiceConfig parse_service_config(std::string_view text, const std::filesystem::path& base_dir)
{
    const Json root = detail::parse_json_text(text);
    detail::object_at(root, "");
    ServiceConfig c;

    if (const Json* sim = detail::member(root, "simulation")) {
        detail::object_at(*sim, "/simulation");
        auto& s = c.simulation;
        s.time_step = detail::number_or(*sim, "time_step", "/simulation", s.time_step);
        s.horizon = detail::number_or(*sim, "horizon", "/simulation", s.horizon);
        s.deadband_halfwidth = detail::number_or(*sim, "deadband_halfwidth", "/simulation", s.deadband_halfwidth);
        s.droop_fraction = detail::number_or(*sim, "droop_fraction", "/simulation", s.droop_fraction);
        s.ufls_threshold = detail::number_or(*sim, "ufls_threshold", "/simulation", s.ufls_threshold);
        s.zenith_threshold = detail::number_or(*sim, "zenith_threshold", "/simulation", s.zenith_threshold);
    }
    c.cycle_period_s = detail::number_or(root, "cycle_period_s", "", c.cycle_period_s);
    c.poll_interval_s = detail::number_or(root, "poll_interval_s", "", c.poll_interval_s);
    c.staleness_s = detail::number_or(root, "staleness_s", "", c.staleness_s);
    if (!(c.cycle_period_s > 0.0) || !(c.poll_interval_s > 0.0) || !(c.staleness_s > 0.0)) {
        detail::field_error("/cycle_period_s", "cadences and staleness bound must be positive");
    }
    c.snapshot_dir = resolve(base_dir, optional_string(root, "snapshot_dir", ""));
    c.snapshot_file = resolve(base_dir, optional_string(root, "snapshot_file", ""));
    c.results_dir = resolve(base_dir, optional_string(root, "results_dir", ""));
    c.parameter_store = resolve(base_dir, optional_string(root, "parameter_store", ""));

    if (const Json* model = detail::member(root, "load_inertia_model")) {
        detail::object_at(*model, "/load_inertia_model");
        c.load_inertia_model.slope =
            detail::number_or(*model, "slope", "/load_inertia_model", c.load_inertia_model.slope);
        c.load_inertia_model.intercept_load_mw = detail::number_or(*model, "intercept_load_mw", "/load_inertia_model",
                                                                   c.load_inertia_model.intercept_load_mw);
    }
    if (const Json* http = detail::member(root, "http")) {
        detail::object_at(*http, "/http");
        if (auto host = optional_string(*http, "host", "/http"); !host.empty()) {
            c.host = host;
        }
        c.port = static_cast<int>(detail::number_or(*http, "port", "/http", c.port));
    }
    const double points =
        detail::number_or(root, "max_transport_points", "", static_cast<double>(c.max_transport_points));
    if (!(points >= 4.0)) {
        detail::field_error("/max_transport_points", "must be at least 4");
    }
    c.max_transport_points = static_cast<std::size_t>(points);
    if (detail::boolean_or(root, "lenient_snapshots", "", false)) {
        c.snapshot_mode = ParseMode::lenient;
    }
    c.simulation.validate();
    return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path)
{
    return parse_service_config(read_text_file(path), path.parent_path());
}

void apply_environment(ServiceConfig& config)
{
    if (const char* dir = std::getenv("RTFS_SNAPSHOT_DIR"); dir != nullptr && *dir != '\0') {
        config.snapshot_dir = dir;
        config.snapshot_file.clear();
    }
    if (const char* dir = std::getenv("RTFS_RESULTS_DIR"); dir != nullptr && *dir != '\0') {
        config.results_dir = dir;
    }
}

} // namespace rtfs
