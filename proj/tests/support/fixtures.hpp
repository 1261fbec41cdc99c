#pragma once
// Fleet builders and synthetic recordings shared by unit and acceptance tests.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rtfs/calibration.hpp"
#include "rtfs/fleet.hpp"
#include "rtfs/freq_sim.hpp"
#include "rtfs/inertia.hpp"

namespace fixtures {

inline rtfs::UtcTime utc(int year, unsigned month, unsigned day, int h = 0, int m = 0, int s = 0)
{
    using namespace std::chrono;
    return time_point_cast<milliseconds>(sys_days{std::chrono::year{year} / month / day} + hours{h} + minutes{m} +
                                         seconds{s});
}

inline rtfs::GeneratorUnit unit(std::string id, double rated, double output, double ke, double reserve = 0.0,
                                bool droop = false)
{
    rtfs::GeneratorUnit u;
    u.id = std::move(id);
    u.rated_mw = rated;
    u.output_mw = output;
    u.kinetic_energy = ke;
    u.spinning_reserve_mw = reserve;
    u.load_rejection_mw = std::min(output, 0.5 * rated);
    u.droop_enabled = droop;
    u.mdrr = droop ? 0.1 * rated : 0.0;
    return u;
}

inline rtfs::GeneratorUnit responsive(std::string id, double rated, double output, double ke, double reserve,
                                      double gain, double time_constant, double mdrr)
{
    auto u = unit(std::move(id), rated, output, ke, reserve, true);
    u.gain = gain;
    u.time_constant = time_constant;
    u.mdrr = mdrr;
    return u;
}

/// A scenario with no governors, no SDR and the requested inertia and load.
inline rtfs::ContingencyScenario bare_scenario(double delta_p, double ke_gen, double load_mw, double k_p,
                                               double fn = 50.0)
{
    rtfs::ContingencyScenario s;
    s.base.timestamp = utc(2024, 3, 1, 12);
    s.base.units = {unit("G1", 2 * load_mw, load_mw, ke_gen)};
    s.base.system_load_mw = load_mw;
    s.base.nominal_frequency = fn;
    s.base.pre_contingency_frequency = fn;
    s.base.load_relief_factor = k_p;
    s.delta_p_cont = delta_p;
    s.label = "synthetic";
    return s;
}

/// Ten-unit fleet loosely shaped like a small isolated system at 1900 MW.
/// Governed units carry enough reserve and ramp for a 244 MW loss to be
/// covered within a few seconds.
inline rtfs::SystemSnapshot reference_fleet()
{
    rtfs::SystemSnapshot s;
    s.timestamp = utc(2024, 3, 1, 12);
    s.system_load_mw = 1900.0;
    s.units = {
        responsive("CCGT1", 340, 244, 1800, 60, 1.0, 3.0, 20),
        responsive("CCGT2", 340, 230, 1800, 60, 0.9, 4.0, 20),
        responsive("COAL1", 340, 300, 2100, 30, 0.8, 6.0, 8),
        responsive("COAL2", 220, 190, 1400, 25, 0.8, 6.0, 6),
        responsive("OCGT1", 120, 60, 500, 50, 1.1, 1.5, 30),
        responsive("OCGT2", 120, 60, 500, 50, 1.1, 1.5, 30),
        responsive("HYD1", 200, 120, 900, 60, 1.0, 2.5, 25),
        unit("STEAM1", 200, 180, 1500),
        unit("STEAM2", 200, 176, 1000),
        unit("WIND", 400, 340, 0),
    };
    s.sdr_blocks = {{"SDR-A", 40, 49.0, 0.0, true}, {"SDR-B", 30, 48.9, 0.2, true}};
    return s;
}

/// Thin fleet with little inertia and no governors: any trip falls through
/// the under-frequency shedding threshold.
inline rtfs::SystemSnapshot low_inertia_fleet()
{
    rtfs::SystemSnapshot s;
    s.timestamp = utc(2024, 3, 1, 12, 5);
    s.system_load_mw = 900;
    s.units = {unit("A", 400, 320, 600), unit("B", 400, 300, 600), unit("C", 400, 280, 600)};
    s.load_inertia_override = 0.0;
    return s;
}

/// Random governed fleet generated from `seed`; all units droop-enabled with
/// realistic (K, T, MDRR) spreads.
inline rtfs::SystemSnapshot random_fleet(unsigned seed, double load_mw = 1900.0)
{
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> count(6, 12);
    std::uniform_real_distribution<double> rated(120, 360);
    std::uniform_real_distribution<double> loading(0.55, 0.85);
    std::uniform_real_distribution<double> h(2.5, 6.0);
    std::uniform_real_distribution<double> gain(0.7, 1.2);
    std::uniform_real_distribution<double> tconst(1.0, 5.0);
    std::uniform_real_distribution<double> ramp(0.05, 0.15);

    rtfs::SystemSnapshot s;
    s.timestamp = utc(2024, 3, 1, 12);
    s.system_load_mw = load_mw;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        const double p = rated(rng);
        const double out = p * loading(rng);
        auto u = responsive("U" + std::to_string(i), p, out, h(rng) * p, 0.0, gain(rng), tconst(rng), ramp(rng) * p);
        u.spinning_reserve_mw = p - out;
        s.units.push_back(u);
    }
    return s;
}

/// Frequency recorded around a sudden trip: flat at f0 for `pre_s`, then the
/// simulated excursion of a governor-free system sampled every `dt`.
inline rtfs::FrequencyTrace padded_trace(const rtfs::FrequencyTrace& excursion, double f0, double pre_s)
{
    rtfs::FrequencyTrace t;
    t.time_step = excursion.time_step;
    const auto pre = static_cast<std::size_t>(std::lround(pre_s / excursion.time_step));
    t.samples.assign(pre, f0);
    t.samples.insert(t.samples.end(), excursion.samples.begin(), excursion.samples.end());
    return t;
}

/// Unit event trace whose MW channel is the replayed response itself.
inline rtfs::UnitEventTrace synthetic_unit_trace(double gain, double time_constant, double noise_fraction,
                                                 unsigned seed)
{
    rtfs::UnitStaticParams params;
    params.rated_mw = 300;
    params.spinning_reserve_mw = 80;
    params.load_rejection_mw = 80;
    params.mdrr = 30;

    const double dt = 0.02;
    const double pre = 5.0;
    rtfs::FrequencyTrace f;
    f.time_step = dt;
    for (double t = 0.0; t < pre + 40.0; t += dt) {
        const double s = t - pre;
        double dev = 0.0;
        if (s > 0.0) {
            dev = 0.35 * (1.0 - std::exp(-s / 1.2)) - 0.15 * (1.0 - std::exp(-s / 9.0));
        }
        f.samples.push_back(50.0 - dev);
    }
    const auto onset = static_cast<std::size_t>(std::lround(pre / dt));
    rtfs::FrequencyTrace after{0.0, dt, {f.samples.begin() + static_cast<std::ptrdiff_t>(onset), f.samples.end()}};
    const rtfs::PowerTrace response = rtfs::replay_unit_response(after, params, gain, time_constant);

    double peak = 0.0;
    for (double v : response.values) {
        peak = std::max(peak, std::abs(v));
    }
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_fraction * peak);
    const double base = 180.0;
    rtfs::PowerTrace mw;
    mw.time_step = dt;
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        const double r = i >= onset ? response.values[i - onset] : 0.0;
        mw.values.push_back(base + r + (noise_fraction > 0.0 ? noise(rng) : 0.0));
    }
    return rtfs::make_unit_event_trace("U1", f, mw, pre, params);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag)
{
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = std::filesystem::temp_directory_path() / ("rtfs-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace fixtures
