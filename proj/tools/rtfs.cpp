// rtfs: command-line front end.
//
//   rtfs serve --config <path>
//   rtfs simulate --snapshot <file> [--unit <id>]
//   rtfs calibrate lag|lrf|inertia --input <file...>
//   rtfs estimate-inertia --trace <file> --delta-p <MW>

#include <atomic>
#include <csignal>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtfs/calibration.hpp"
#include "rtfs/contingency.hpp"
#include "rtfs/http_api.hpp"
#include "rtfs/inertia.hpp"
#include "rtfs/ingestion.hpp"
#include "rtfs/service.hpp"
#include "rtfs/time_util.hpp"

namespace {

using nlohmann::json;

std::atomic<bool> g_stop{false};

void on_signal(int)
{
    g_stop = true;
}

json summary(const rtfs::SimulationResult& r)
{
    return json{{"scenario_label", r.scenario_label},
                {"snapshot_time", rtfs::format_utc(r.snapshot_time)},
                {"event", std::string(rtfs::to_string(r.event))},
                {"delta_p_cont_mw", r.delta_p_cont},
                {"nadir_hz", r.nadir_hz},
                {"nadir_time_s", r.nadir_time},
                {"zenith_hz", r.zenith_hz},
                {"ke_gen_mws", r.ke_gen},
                {"ke_load_mws", r.ke_load},
                {"ke_sys_mws", r.ke_sys},
                {"sdr_trips", r.sdr_tripped.size()},
                {"alarm", r.alarm},
                {"alarm_threshold_hz", r.alarm_threshold}};
}

int run_serve(const std::string& config_path, const std::string& snapshot_dir, const std::string& snapshot_file,
              const std::string& results_dir, int port)
{
    rtfs::ServiceConfig config = rtfs::load_service_config(config_path);
    rtfs::apply_environment(config);
    if (!snapshot_dir.empty()) {
        config.snapshot_dir = snapshot_dir;
        config.snapshot_file.clear();
    }
    if (!snapshot_file.empty()) {
        config.snapshot_file = snapshot_file;
        config.snapshot_dir.clear();
    }
    if (!results_dir.empty()) {
        config.results_dir = results_dir;
    }
    if (port >= 0) {
        config.port = port;
    }
    if (config.snapshot_dir.empty() && config.snapshot_file.empty()) {
        std::cerr << "rtfs serve: no snapshot source (set snapshot_dir/snapshot_file, --snapshot-dir or "
                     "RTFS_SNAPSHOT_DIR)\n";
        return 2;
    }

    rtfs::RtfsService service(config);
    auto source = config.snapshot_dir.empty() ? rtfs::SnapshotSource::file(config.snapshot_file, config.snapshot_mode)
                                              : rtfs::SnapshotSource::directory(config.snapshot_dir, config.snapshot_mode);
    rtfs::HttpApi api(service);
    const int bound = api.start(config.host, config.port);
    rtfs::ServiceRunner runner(service, std::move(source));
    runner.start();
    std::cout << "rtfs serving on http://" << config.host << ':' << bound << std::endl;

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    runner.stop();
    api.stop();
    return 0;
}

int run_simulate(const std::string& snapshot_path, const std::string& unit, const std::string& config_path,
                 const std::string& params_path, bool lenient, bool full)
{
    rtfs::ServiceConfig config;
    if (!config_path.empty()) {
        config = rtfs::load_service_config(config_path);
    }
    rtfs::SystemSnapshot snapshot =
        rtfs::parse_snapshot_document(rtfs::read_text_file(snapshot_path),
                                      lenient ? rtfs::ParseMode::lenient : rtfs::ParseMode::strict)
            .snapshot;
    if (!params_path.empty()) {
        snapshot = rtfs::UnitParameterStore::load(params_path).apply(std::move(snapshot));
    } else if (!config.parameter_store.empty()) {
        snapshot = rtfs::UnitParameterStore::load(config.parameter_store).apply(std::move(snapshot));
    }
    snapshot = rtfs::validate_snapshot(std::move(snapshot));
    const double ke_load = rtfs::resolve_load_inertia(snapshot, config.load_inertia_model);

    rtfs::SimulationResult result;
    if (unit.empty()) {
        result = rtfs::worst_case(snapshot, config.simulation, ke_load);
    } else {
        result = rtfs::simulate(rtfs::build_scenario(snapshot, unit), config.simulation, ke_load);
    }
    if (full) {
        std::cout << rtfs::result_to_json(result) << '\n';
    } else {
        std::cout << summary(result).dump(2) << '\n';
    }
    return result.alarm ? 3 : 0;
}

int run_calibrate_lag(const std::vector<std::string>& inputs, const std::string& store_path)
{
    json out = json::array();
    std::optional<rtfs::UnitParameterStore> store;
    if (!store_path.empty()) {
        store = std::filesystem::exists(store_path) ? rtfs::UnitParameterStore::load(store_path)
                                                    : rtfs::UnitParameterStore{};
    }
    for (const auto& path : inputs) {
        const rtfs::UnitEventTrace trace = rtfs::to_unit_event_trace(rtfs::load_trace_file(path));
        const rtfs::LagFit fit = rtfs::fit_unit_lag(trace);
        out.push_back(json{{"input", path},
                           {"unit_id", trace.unit_id},
                           {"frequency_source", trace.frequency_source},
                           {"gain", fit.gain},
                           {"time_constant_s", fit.time_constant},
                           {"sse", fit.sse},
                           {"normalized_rmse", fit.normalized_rmse},
                           {"converged", fit.converged},
                           {"high_residual", fit.high_residual},
                           {"diagnostic", fit.diagnostic}});
        if (store && fit.converged) {
            store->set_lag(trace.unit_id, fit.gain, fit.time_constant);
        }
    }
    if (store) {
        store->save(store_path);
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int run_calibrate_lrf(const std::vector<std::string>& inputs, double load_override, double f_n)
{
    json out = json::array();
    for (const auto& path : inputs) {
        const rtfs::TraceFile trace = rtfs::load_trace_file(path);
        const auto pairs = rtfs::to_frequency_load_pairs(trace);
        double load = load_override;
        if (!(load > 0.0)) {
            load = trace.meta_number_or("p_load0_mw").value_or(pairs.empty() ? 0.0 : pairs.front().load_mw);
        }
        const rtfs::LrfEstimate est = rtfs::estimate_lrf(pairs, load, f_n);
        out.push_back(json{{"input", path}, {"event_id", trace.event_id}, {"p_load0_mw", load}, {"k_p", est.k_p},
                           {"r2", est.r2}, {"samples", est.samples}});
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int run_calibrate_inertia(const std::vector<std::string>& inputs, double f_n, const std::vector<double>& below_line)
{
    json events = json::array();
    std::vector<rtfs::LoadInertiaSample> samples;
    for (const auto& path : inputs) {
        const rtfs::DisturbanceRecord record = rtfs::to_disturbance_record(rtfs::load_trace_file(path));
        json entry{{"input", path}, {"event_id", record.event_id}};
        try {
            const double ke_sys = rtfs::estimate_system_inertia(record, f_n);
            const auto ke_load = rtfs::load_inertia_from_event(ke_sys, record.ke_gen_at_event);
            entry["ke_sys_mws"] = ke_sys;
            entry["ke_load_mws"] = ke_load.ke_load;
            entry["flagged"] = ke_load.flagged;
            samples.push_back({record.pre_event_load_mw, ke_load.ke_load});
        } catch (const rtfs::Error& e) {
            entry["rejected"] = e.what();
        }
        events.push_back(entry);
    }
    json out{{"events", events}};
    rtfs::SampleSelector select;
    if (below_line.size() == 2) {
        const double slope = below_line[0];
        const double intercept = below_line[1];
        select = [=](const rtfs::LoadInertiaSample& s) { return s.ke_load <= slope * (s.load_mw - intercept); };
    }
    if (samples.size() >= 3) {
        try {
            const auto model = rtfs::fit_load_inertia_model(samples, select);
            out["model"] = json{{"slope", model.slope},
                                {"intercept_load_mw", model.intercept_load_mw},
                                {"r2", model.fit_r2},
                                {"samples", model.sample_count}};
        } catch (const rtfs::Error& e) {
            out["model_error"] = e.what();
        }
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int run_estimate_inertia(const std::string& trace_path, double delta_p, double f_n, std::optional<double> ke_gen,
                         double window, double min_rocof, std::optional<double> onset)
{
    const rtfs::TraceFile file = rtfs::load_trace_file(trace_path);
    rtfs::DisturbanceRecord record;
    record.event_id = file.event_id;
    record.frequency = file.frequency();
    record.delta_p = delta_p;
    record.onset_time = onset.value_or(file.meta_number_or("onset_s").value_or(record.frequency.start_time + 2.0));
    record.ke_gen_at_event = ke_gen.value_or(file.meta_number_or("ke_gen_mws").value_or(0.0));

    const double rocof = rtfs::max_rocof(record.frequency, window);
    const double ke_sys = rtfs::estimate_system_inertia(record, f_n, {window, min_rocof});
    json out{{"event_id", record.event_id}, {"max_rocof_hz_per_s", rocof}, {"ke_sys_mws", ke_sys}};
    if (ke_gen || file.meta("ke_gen_mws")) {
        const auto load = rtfs::load_inertia_from_event(ke_sys, record.ke_gen_at_event);
        out["ke_load_mws"] = load.ke_load;
        out["flagged"] = load.flagged;
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Real-time frequency stability engine"};
    app.require_subcommand(1);

    auto* serve = app.add_subcommand("serve", "Run the periodic calculation service and HTTP API");
    std::string config_path;
    std::string snapshot_dir;
    std::string snapshot_file;
    std::string results_dir;
    int port = -1;
    serve->add_option("--config", config_path, "Service configuration (JSON)")->required()->check(CLI::ExistingFile);
    serve->add_option("--snapshot-dir", snapshot_dir, "Watch this directory for snapshot documents");
    serve->add_option("--snapshot", snapshot_file, "Re-read this snapshot file on every poll");
    serve->add_option("--results-dir", results_dir, "Results store directory");
    serve->add_option("--port", port, "HTTP port (0 picks a free port)");

    auto* sim = app.add_subcommand("simulate", "Simulate the worst-case (or a named) unit trip for one snapshot");
    std::string sim_snapshot;
    std::string sim_unit;
    std::string sim_config;
    std::string sim_params;
    bool sim_lenient = false;
    bool sim_full = false;
    sim->add_option("--snapshot", sim_snapshot, "Snapshot document")->required()->check(CLI::ExistingFile);
    sim->add_option("--unit", sim_unit, "Trip this unit instead of the automatic worst case");
    sim->add_option("--config", sim_config, "Service configuration for simulation settings")->check(CLI::ExistingFile);
    sim->add_option("--params", sim_params, "Unit-parameter store")->check(CLI::ExistingFile);
    sim->add_flag("--lenient", sim_lenient, "Accept unknown fields in the snapshot");
    sim->add_flag("--full", sim_full, "Print the full result with traces");

    auto* cal = app.add_subcommand("calibrate", "Offline parameter calibration");
    cal->require_subcommand(1);
    auto* cal_lag = cal->add_subcommand("lag", "Fit (K, T) per unit from unit event traces");
    auto* cal_lrf = cal->add_subcommand("lrf", "Estimate the load relief factor");
    auto* cal_inertia = cal->add_subcommand("inertia", "Estimate system/load inertia and fit the load model");
    std::vector<std::string> inputs;
    std::string store_path;
    double lrf_load = 0.0;
    double f_n = 50.0;
    std::vector<double> below_line;
    for (auto* sub : {cal_lag, cal_lrf, cal_inertia}) {
        sub->add_option("--input", inputs, "Trace files")->required()->check(CLI::ExistingFile);
        sub->add_option("--f-n", f_n, "Nominal frequency (Hz)");
    }
    cal_lag->add_option("--store", store_path, "Write converged fits into this unit-parameter store");
    cal_lrf->add_option("--p-load0", lrf_load, "System load at nominal frequency (MW)");
    cal_inertia->add_option("--below-line", below_line, "Fit only samples with ke_load <= slope*(load - intercept)")
        ->expected(2);

    auto* est = app.add_subcommand("estimate-inertia", "System inertia from one recorded trip");
    std::string est_trace;
    double est_delta_p = 0.0;
    std::optional<double> est_ke_gen;
    std::optional<double> est_onset;
    double est_window = 0.5;
    double est_min_rocof = 0.05;
    est->add_option("--trace", est_trace, "Trace file with a frequency channel")->required()->check(CLI::ExistingFile);
    est->add_option("--delta-p", est_delta_p, "Generation lost (MW)")->required()->check(CLI::PositiveNumber);
    est->add_option("--f-n", f_n, "Nominal frequency (Hz)");
    est->add_option("--ke-gen", est_ke_gen, "Online generator inertia at the event (MW.s)");
    est->add_option("--onset", est_onset, "Event onset on the trace time axis (s)");
    est->add_option("--window", est_window, "RoCoF smoothing window (s)");
    est->add_option("--min-rocof", est_min_rocof, "Confidence cutoff (Hz/s)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            return run_serve(config_path, snapshot_dir, snapshot_file, results_dir, port);
        }
        if (*sim) {
            return run_simulate(sim_snapshot, sim_unit, sim_config, sim_params, sim_lenient, sim_full);
        }
        if (*cal_lag) {
            return run_calibrate_lag(inputs, store_path);
        }
        if (*cal_lrf) {
            return run_calibrate_lrf(inputs, lrf_load, f_n);
        }
        if (*cal_inertia) {
            return run_calibrate_inertia(inputs, f_n, below_line);
        }
        if (*est) {
            return run_estimate_inertia(est_trace, est_delta_p, f_n, est_ke_gen, est_window, est_min_rocof, est_onset);
        }
    } catch (const rtfs::ValidationError& e) {
        std::cerr << "rtfs: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "rtfs: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
