#include "rtfs/inertia.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtfs/regression.hpp"

namespace rtfs {

LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw EstimationError("linear fit needs at least two paired points");
    }
    const auto n = static_cast<double>(x.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) {
        throw EstimationError("linear fit: regressor has zero variance");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    if (syy > 0.0) {
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (fit.intercept + fit.slope * x[i]);
            sse += r * r;
        }
        fit.r2 = std::clamp(1.0 - sse / syy, 0.0, 1.0);
    } else {
        fit.r2 = 1.0;
    }
    return fit;
}

std::vector<Violation> check_record(const DisturbanceRecord& record)
{
    std::vector<Violation> out = check_trace(record.frequency);
    const std::string subject = record.event_id.empty() ? std::string("record") : record.event_id;
    if (record.frequency.time_step > 0.0 && 1.0 / record.frequency.time_step < 20.0 - 1e-9) {
        out.push_back({subject, "trace is sampled slower than 20 samples/s"});
    }
    const double start = record.frequency.start_time;
    const double end = start + record.frequency.duration();
    if (record.onset_time - start < 2.0 - 1e-9) {
        out.push_back({subject, "trace must cover 2 s before the event"});
    }
    if (end - record.onset_time < 10.0 - 1e-9) {
        out.push_back({subject, "trace must cover 10 s after the event"});
    }
    if (record.kind == DisturbanceKind::sudden_trip && !(record.delta_p > 0.0)) {
        out.push_back({subject, "delta_p must be positive for a sudden trip"});
    }
    return out;
}

double max_rocof(const FrequencyTrace& trace, double window)
{
    const double dt = trace.time_step;
    if (!(dt > 0.0) || trace.samples.size() < 2) {
        throw EstimationError("max_rocof: trace needs a positive step and at least two samples");
    }
    if (!(trace.duration() > window)) {
        throw EstimationError("max_rocof: trace is shorter than the smoothing window");
    }
    const auto& f = trace.samples;
    const std::size_t n = f.size() - 1;
    std::vector<double> derivative(n);
    for (std::size_t i = 0; i < n; ++i) {
        derivative[i] = (f[i + 1] - f[i]) / dt;
    }

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + derivative[i];
    }
    // Centred window of `width` derivative samples, clipped at the ends.
    const auto width = std::max<std::ptrdiff_t>(1, std::llround(window / dt));
    const auto count = static_cast<std::ptrdiff_t>(n);
    double best = 0.0;
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - width / 2);
        const std::ptrdiff_t hi = std::min(count, i - width / 2 + width);
        const double mean = (prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)]) /
                            static_cast<double>(hi - lo);
        best = std::max(best, std::abs(mean));
    }
    return best;
}

double estimate_system_inertia(const DisturbanceRecord& record, double nominal_frequency,
                               const InertiaEstimateOptions& options)
{
    if (record.kind != DisturbanceKind::sudden_trip) {
        throw EstimationError("inertia is only estimated from sudden trips, not ramp-downs");
    }
    if (auto v = check_record(record); !v.empty()) {
        throw ValidationError(std::move(v));
    }
    const double rocof = max_rocof(record.frequency, options.window);
    if (!(rocof >= options.min_rocof)) {
        throw EstimationError("RoCoF of " + std::to_string(rocof) +
                              " Hz/s is below the confidence cutoff; estimate rejected");
    }
    return 0.5 * nominal_frequency * record.delta_p / rocof;
}

LoadInertiaEstimate load_inertia_from_event(double ke_sys, double ke_gen)
{
    const double ke_load = ke_sys - ke_gen;
    return {ke_load, ke_load < 0.0};
}

double predict_load_inertia(double load_mw, const LoadInertiaModel& model)
{
    return std::max(0.0, model.slope * (load_mw - model.intercept_load_mw));
}

LoadInertiaModel fit_load_inertia_model(std::span<const LoadInertiaSample> samples, const SampleSelector& select)
{
    std::vector<double> load;
    std::vector<double> ke;
    for (const auto& s : samples) {
        if (!select || select(s)) {
            load.push_back(s.load_mw);
            ke.push_back(s.ke_load);
        }
    }
    if (load.size() < 3) {
        throw EstimationError("load inertia fit needs at least three samples after selection");
    }
    const LinearFit fit = fit_line(load, ke);
    if (!(fit.slope > 0.0)) {
        throw EstimationError("load inertia fit produced a non-positive slope");
    }
    LoadInertiaModel model;
    model.slope = fit.slope;
    model.intercept_load_mw = -fit.intercept / fit.slope;
    model.fit_r2 = fit.r2;
    model.sample_count = load.size();
    return model;
}

} // namespace rtfs
