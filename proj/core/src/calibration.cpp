#include "rtfs/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rtfs/governor.hpp"
#include "rtfs/regression.hpp"

namespace rtfs {

LrfEstimate estimate_lrf(std::span<const FrequencyLoadPair> pairs, double load_mw, double nominal_frequency,
                         const LrfOptions& options)
{
    if (!(load_mw > 0.0) || !(nominal_frequency > 0.0)) {
        throw EstimationError("estimate_lrf: load and nominal frequency must be positive");
    }
    if (pairs.size() < options.min_pairs) {
        throw EstimationError("estimate_lrf: needs at least " + std::to_string(options.min_pairs) + " pairs");
    }
    const auto [lo, hi] = std::minmax_element(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        return a.frequency_hz < b.frequency_hz;
    });
    if (hi->frequency_hz - lo->frequency_hz < options.min_frequency_spread) {
        throw EstimationError("estimate_lrf: frequency spread below " +
                              std::to_string(options.min_frequency_spread * 1000.0) + " mHz");
    }
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(pairs.size());
    y.reserve(pairs.size());
    for (const auto& p : pairs) {
        x.push_back((nominal_frequency - p.frequency_hz) / nominal_frequency);
        y.push_back((load_mw - p.load_mw) / load_mw);
    }
    const LinearFit fit = fit_line(x, y);
    return {fit.slope, fit.r2, pairs.size()};
}

double baseline_output(const PowerTrace& output, double onset_time, double span_s)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < output.values.size(); ++i) {
        const double t = output.time_at(i);
        if (t >= onset_time - span_s - 1e-9 && t < onset_time - 1e-9) {
            sum += output.values[i];
            ++count;
        }
    }
    if (count == 0) {
        throw EstimationError("no samples before onset to form a baseline");
    }
    return sum / static_cast<double>(count);
}

UnitEventTrace make_unit_event_trace(std::string unit_id, FrequencyTrace frequency, PowerTrace output_mw,
                                     double onset_time, const UnitStaticParams& params)
{
    if (frequency.samples.size() != output_mw.values.size() ||
        std::abs(frequency.time_step - output_mw.time_step) > 1e-12 ||
        std::abs(frequency.start_time - output_mw.start_time) > 1e-12) {
        throw ValidationError(unit_id, "frequency and output traces do not share a time base");
    }
    if (frequency.duration() < 30.0 - 1e-9) {
        throw ValidationError(unit_id, "unit event trace must span at least 30 s");
    }
    UnitEventTrace trace;
    trace.unit_id = std::move(unit_id);
    trace.pre_event_output_mw = baseline_output(output_mw, onset_time);
    trace.frequency = std::move(frequency);
    trace.output_mw = std::move(output_mw);
    trace.onset_time = onset_time;
    trace.params = params;
    return trace;
}

EventDirection excursion_direction(const FrequencyTrace& frequency, double nominal_frequency)
{
    double worst = 0.0;
    for (double f : frequency.samples) {
        const double dev = nominal_frequency - f;
        if (std::abs(dev) > std::abs(worst)) {
            worst = dev;
        }
    }
    return worst >= 0.0 ? EventDirection::under : EventDirection::over;
}

namespace {

GeneratorUnit replay_unit(const UnitStaticParams& params, double gain, double time_constant)
{
    GeneratorUnit unit;
    unit.id = "replay";
    unit.rated_mw = params.rated_mw;
    unit.spinning_reserve_mw = params.spinning_reserve_mw;
    unit.load_rejection_mw = params.load_rejection_mw;
    unit.mdrr = params.mdrr;
    unit.droop_enabled = true;
    unit.gain = gain;
    unit.time_constant = time_constant;
    return unit;
}

} // namespace

PowerTrace replay_unit_response(const FrequencyTrace& frequency, const UnitStaticParams& params, double gain,
                                double time_constant)
{
    if (!(time_constant > 0.0) || !(frequency.time_step > 0.0) || !(params.mdrr > 0.0)) {
        throw ValidationError("replay", "time constant, time step and mdrr must be positive");
    }
    const double f_n = params.nominal_frequency;
    const EventDirection event = excursion_direction(frequency, f_n);
    GovernorSettings settings{f_n, params.droop_fraction, params.deadband_halfwidth, frequency.time_step};
    UnitGovernor governor(replay_unit(params, gain, time_constant), settings, event);

    PowerTrace out{frequency.start_time, frequency.time_step, std::vector<double>(frequency.samples.size(), 0.0)};
    for (std::size_t k = 0; k + 1 < frequency.samples.size(); ++k) {
        out.values[k + 1] = governor.step(f_n - frequency.samples[k]).output_mw;
    }
    return out;
}

double lag_fit_sse(const UnitEventTrace& trace, double gain, double time_constant, double window_s)
{
    const PowerTrace model = replay_unit_response(trace.frequency, trace.params, gain, time_constant);
    double sse = 0.0;
    for (std::size_t i = 0; i < model.values.size(); ++i) {
        const double t = model.time_at(i);
        if (t < trace.onset_time - 1e-9 || t > trace.onset_time + window_s + 1e-9) {
            continue;
        }
        const double r = model.values[i] - (trace.output_mw.values[i] - trace.pre_event_output_mw);
        sse += r * r;
    }
    return sse;
}

LagFit fit_unit_lag(const UnitEventTrace& trace, const LagSearchBounds& bounds)
{
    const auto& p = trace.params;
    bool excursion = false;
    for (double f : trace.frequency.samples) {
        if (std::abs(p.nominal_frequency - f) > p.deadband_halfwidth) {
            excursion = true;
            break;
        }
    }
    if (!excursion) {
        throw EstimationError("fit_unit_lag: frequency never leaves the deadband for unit " + trace.unit_id);
    }

    LagFit fit;
    double peak = 0.0;
    std::size_t window_samples = 0;
    for (std::size_t i = 0; i < trace.output_mw.values.size(); ++i) {
        const double t = trace.output_mw.time_at(i);
        if (t >= trace.onset_time - 1e-9 && t <= trace.onset_time + bounds.window_s + 1e-9) {
            peak = std::max(peak, std::abs(trace.output_mw.values[i] - trace.pre_event_output_mw));
            ++window_samples;
        }
    }

    auto evaluate = [&](double k, double t) {
        ++fit.evaluations;
        return lag_fit_sse(trace, k, t, bounds.window_s);
    };

    double best_k = bounds.gain_min;
    double best_t = bounds.time_min;
    double best = std::numeric_limits<double>::infinity();
    const auto k_count = static_cast<int>(std::floor((bounds.gain_max - bounds.gain_min) / bounds.gain_step + 1e-9));
    const auto t_count = static_cast<int>(std::floor((bounds.time_max - bounds.time_min) / bounds.time_step + 1e-9));
    for (int i = 0; i <= k_count; ++i) {
        const double k = bounds.gain_min + bounds.gain_step * i;
        for (int j = 0; j <= t_count; ++j) {
            const double t = bounds.time_min + bounds.time_step * j;
            const double sse = evaluate(k, t);
            if (sse < best) {
                best = sse;
                best_k = k;
                best_t = t;
            }
        }
    }
    fit.best_grid_sse = best;

    // Coordinate pattern search from the best grid point, halving the step
    // whenever no neighbour improves.
    double step_k = bounds.gain_step;
    double step_t = bounds.time_step;
    const double t_floor = std::min(bounds.time_min, bounds.resolution);
    while ((step_k >= bounds.resolution || step_t >= bounds.resolution) && fit.evaluations < bounds.max_evaluations) {
        bool improved = false;
        const double candidates[4][2] = {
            {best_k + step_k, best_t}, {best_k - step_k, best_t}, {best_k, best_t + step_t}, {best_k, best_t - step_t}};
        for (const auto& c : candidates) {
            const double k = std::clamp(c[0], bounds.gain_min, bounds.gain_max);
            const double t = std::clamp(c[1], t_floor, bounds.time_max);
            if (k == best_k && t == best_t) {
                continue;
            }
            const double sse = evaluate(k, t);
            if (sse < best) {
                best = sse;
                best_k = k;
                best_t = t;
                improved = true;
            }
        }
        if (!improved) {
            step_k *= 0.5;
            step_t *= 0.5;
        }
    }

    fit.gain = best_k;
    fit.time_constant = best_t;
    fit.sse = best;
    fit.normalized_rmse =
        peak > 0.0 && window_samples > 0 ? std::sqrt(best / static_cast<double>(window_samples)) / peak : 0.0;

    // A unit that did not move cannot identify (K, T).
    const double flat_threshold = std::max(1e-6, 1e-3 * p.rated_mw);
    if (peak < flat_threshold) {
        fit.converged = false;
        fit.diagnostic = "unit " + trace.unit_id + " shows no measurable response; (K, T) not identifiable";
        return fit;
    }
    fit.converged = step_k < bounds.resolution && step_t < bounds.resolution;
    if (!fit.converged) {
        fit.diagnostic = "evaluation budget exhausted before reaching the requested resolution";
    }
    if (fit.normalized_rmse > bounds.high_residual_ratio) {
        fit.high_residual = true;
        if (!fit.diagnostic.empty()) {
            fit.diagnostic += "; ";
        }
        fit.diagnostic += "high residual: measured response departs from its droop target "
                          "(supplementary control such as AGC?)";
    }
    return fit;
}

} // namespace rtfs
