#pragma once

// Event-driven inertia estimation and the load-inertia regression.

#include <functional>
#include <span>
#include <string>

#include "rtfs/fleet.hpp"

namespace rtfs {

enum class DisturbanceKind { sudden_trip, ramp_down };

/// A recorded generator trip. `onset_time` is on the trace's own time axis.
struct DisturbanceRecord {
    std::string event_id;
    FrequencyTrace frequency;
    double onset_time = 0.0;
    double delta_p = 0.0;            // MW lost, positive
    double pre_event_load_mw = 0.0;
    double ke_gen_at_event = 0.0;    // MW·s
    DisturbanceKind kind = DisturbanceKind::sudden_trip;
};

std::vector<Violation> check_record(const DisturbanceRecord& record);

/// KE_load = slope * (P_load0 - intercept_load_mw), floored at zero.
struct LoadInertiaModel {
    double slope = 2.2528;               // MW·s per MW
    double intercept_load_mw = 783.0;    // MW
    double fit_r2 = 0.0;
    std::size_t sample_count = 0;

    bool operator==(const LoadInertiaModel&) const = default;
};

/// Largest |df/dt| after first differencing and a centred moving average of
/// width `window` seconds (truncated at the trace ends).
double max_rocof(const FrequencyTrace& trace, double window = 0.5);

struct InertiaEstimateOptions {
    double window = 0.5;
    double min_rocof = 0.05;  // Hz/s; below this the estimate is not trusted
};

/// 0.5 f_n dP / max RoCoF, in MW·s.
double estimate_system_inertia(const DisturbanceRecord& record, double nominal_frequency,
                               const InertiaEstimateOptions& options = {});

struct LoadInertiaEstimate {
    double ke_load = 0.0;
    bool flagged = false;  // negative: estimation noise dominates
};

LoadInertiaEstimate load_inertia_from_event(double ke_sys, double ke_gen);

double predict_load_inertia(double load_mw, const LoadInertiaModel& model);

struct LoadInertiaSample {
    double load_mw = 0.0;
    double ke_load = 0.0;
};

using SampleSelector = std::function<bool(const LoadInertiaSample&)>;

/// Ordinary least squares of ke_load on load over the samples accepted by
/// `select` (all samples when empty). Needs three samples and a load spread.
LoadInertiaModel fit_load_inertia_model(std::span<const LoadInertiaSample> samples, const SampleSelector& select = {});

} // namespace rtfs
