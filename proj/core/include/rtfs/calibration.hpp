#pragma once

// Offline calibration: load relief factor from event data and per-unit
// (K, T) lag parameters from fault-recorder traces.

#include <span>
#include <string>

#include "rtfs/fleet.hpp"

namespace rtfs {

struct FrequencyLoadPair {
    double frequency_hz = 0.0;
    double load_mw = 0.0;
};

struct LrfEstimate {
    double k_p = 0.0;
    double r2 = 0.0;
    std::size_t samples = 0;
};

struct LrfOptions {
    std::size_t min_pairs = 10;
    double min_frequency_spread = 0.05;  // Hz
};

/// Regresses relative load relief (P_load0 - P)/P_load0 on dev/f_n; the slope
/// is k_p.
LrfEstimate estimate_lrf(std::span<const FrequencyLoadPair> pairs, double load_mw, double nominal_frequency,
                         const LrfOptions& options = {});

/// Static settings that shape a unit's response but are not fitted.
struct UnitStaticParams {
    double rated_mw = 0.0;
    double spinning_reserve_mw = 0.0;
    double load_rejection_mw = 0.0;
    double mdrr = 0.0;
    double deadband_halfwidth = 0.025;
    double droop_fraction = 0.04;
    double nominal_frequency = 50.0;
};

struct UnitEventTrace {
    std::string unit_id;
    FrequencyTrace frequency;
    PowerTrace output_mw;
    double onset_time = 0.0;
    double pre_event_output_mw = 0.0;
    UnitStaticParams params;
    std::string frequency_source = "local";  // "local" or "coi"
};

/// Mean output over the `span_s` seconds before onset.
double baseline_output(const PowerTrace& output, double onset_time, double span_s = 2.0);

/// Builds a trace record, taking the baseline as the 2 s pre-onset mean.
UnitEventTrace make_unit_event_trace(std::string unit_id, FrequencyTrace frequency, PowerTrace output_mw,
                                     double onset_time, const UnitStaticParams& params);

/// Direction of the largest excursion in a measured trace.
EventDirection excursion_direction(const FrequencyTrace& frequency, double nominal_frequency);

/// Open-loop replay of the unit response chain against measured frequency.
/// Output has one MW value per frequency sample and starts at zero.
PowerTrace replay_unit_response(const FrequencyTrace& frequency, const UnitStaticParams& params, double gain,
                                double time_constant);

struct LagSearchBounds {
    double gain_min = 0.2;
    double gain_max = 1.5;
    double gain_step = 0.05;
    double time_min = 0.5;
    double time_max = 20.0;
    double time_step = 0.5;
    double resolution = 1e-3;
    double window_s = 30.0;               // fitted span after onset
    double high_residual_ratio = 0.1;     // RMSE / peak response
    std::size_t max_evaluations = 20000;
};

struct LagFit {
    double gain = 0.0;
    double time_constant = 0.0;
    double sse = 0.0;
    bool converged = false;
    double best_grid_sse = 0.0;
    double normalized_rmse = 0.0;
    bool high_residual = false;
    std::size_t evaluations = 0;
    std::string diagnostic;
};

/// Sum of squared errors between the replayed and the measured incremental
/// response over the fitting window.
double lag_fit_sse(const UnitEventTrace& trace, double gain, double time_constant, double window_s = 30.0);

/// Grid search over (K, T) followed by a coordinate pattern search.
LagFit fit_unit_lag(const UnitEventTrace& trace, const LagSearchBounds& bounds = {});

} // namespace rtfs
