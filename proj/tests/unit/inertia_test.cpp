#include <cmath>
#include <doctest.h>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rtfs/freq_sim.hpp"
#include "rtfs/inertia.hpp"
#include "rtfs/regression.hpp"

using doctest::Approx;

namespace {

rtfs::FrequencyTrace line(double slope, double seconds, double dt = 0.02)
{
    rtfs::FrequencyTrace t{0.0, dt, {}};
    for (double s = 0.0; s <= seconds + 1e-9; s += dt) {
        t.samples.push_back(50.0 + slope * s);
    }
    return t;
}

rtfs::DisturbanceRecord record_from(const rtfs::FrequencyTrace& excursion, double delta_p, double ke_gen = 0.0)
{
    rtfs::DisturbanceRecord r;
    r.event_id = "ev";
    r.frequency = fixtures::padded_trace(excursion, 50.0, 3.0);
    r.onset_time = 3.0;
    r.delta_p = delta_p;
    r.pre_event_load_mw = 1900;
    r.ke_gen_at_event = ke_gen;
    return r;
}

} // namespace

TEST_SUITE("inertia-estimation")
{
    TEST_CASE("max RoCoF of an affine trace is its slope")
    {
        for (double slope : {-0.4, -0.05, 0.3}) {
            for (double window : {0.1, 0.5, 1.0}) {
                CHECK(rtfs::max_rocof(line(slope, 10), window) == Approx(std::abs(slope)).epsilon(1e-9));
            }
        }
        CHECK(rtfs::max_rocof(line(0.0, 10)) == 0.0);
        CHECK_THROWS_AS(rtfs::max_rocof(line(-0.4, 0.3)), rtfs::EstimationError);
    }

    TEST_CASE("max RoCoF of a simulated governor-free trip")
    {
        const auto r = rtfs::simulate(fixtures::bare_scenario(-300, 15000, 1900, 0.0), {}, 0.0);
        CHECK(rtfs::max_rocof(r.frequency) == Approx(0.5).epsilon(0.02));
    }

    TEST_CASE("system inertia from a trip")
    {
        CHECK(rtfs::estimate_system_inertia(record_from(line(-0.5, 20), 300), 50) == Approx(15000).epsilon(1e-6));
        const double rocof = 50.0 * 244 / (2 * 14016.0);
        CHECK(rtfs::estimate_system_inertia(record_from(line(-rocof, 20), 244), 50) == Approx(14016).epsilon(1e-6));
        CHECK(rtfs::estimate_system_inertia(record_from(line(-0.4352, 20), 244), 50) == Approx(14016).epsilon(5e-4));
        CHECK_THROWS_AS(rtfs::estimate_system_inertia(record_from(line(-0.01, 20), 244), 50), rtfs::EstimationError);
    }

    TEST_CASE("records need a sudden trip with enough data around onset")
    {
        auto r = record_from(line(-0.4, 20), 244);
        CHECK(rtfs::check_record(r).empty());
        auto ramp = r;
        ramp.kind = rtfs::DisturbanceKind::ramp_down;
        CHECK_THROWS_AS(rtfs::estimate_system_inertia(ramp, 50), rtfs::Error);
        auto slow = r;
        slow.frequency.time_step = 0.1;
        CHECK_FALSE(rtfs::check_record(slow).empty());
        auto early = r;
        early.onset_time = 0.5;
        CHECK_FALSE(rtfs::check_record(early).empty());
        auto short_tail = r;
        short_tail.frequency.samples.resize(static_cast<std::size_t>(8.0 / 0.02));
        CHECK_FALSE(rtfs::check_record(short_tail).empty());
        auto zero = r;
        zero.delta_p = 0.0;
        CHECK_FALSE(rtfs::check_record(zero).empty());
    }

    TEST_CASE("load inertia by subtraction")
    {
        const auto a = rtfs::load_inertia_from_event(15000, 11500);
        CHECK(a.ke_load == Approx(3500));
        CHECK_FALSE(a.flagged);
        const auto b = rtfs::load_inertia_from_event(11000, 11500);
        CHECK(b.ke_load == Approx(-500));
        CHECK(b.flagged);
        CHECK(rtfs::load_inertia_from_event(9000, 0).ke_load == 9000);
    }

    TEST_CASE("load inertia regression line")
    {
        const rtfs::LoadInertiaModel m;
        CHECK(rtfs::predict_load_inertia(1900, m) == Approx(2516.3776).epsilon(1e-9));
        CHECK(rtfs::predict_load_inertia(783, m) == 0.0);
        CHECK(rtfs::predict_load_inertia(500, m) == 0.0);
        double prev = 0.0;
        for (double p = 100; p <= 4000; p += 50) {
            const double v = rtfs::predict_load_inertia(p, m);
            CHECK(v >= prev);
            prev = v;
        }
    }

    TEST_CASE("fit recovers exact coefficients")
    {
        std::vector<rtfs::LoadInertiaSample> s;
        for (double p : {1200.0, 1450.0, 1700.0, 2100.0, 2600.0}) {
            s.push_back({p, 2.2528 * (p - 783)});
        }
        const auto m = rtfs::fit_load_inertia_model(s);
        CHECK(m.slope == Approx(2.2528).epsilon(1e-9));
        CHECK(m.intercept_load_mw == Approx(783).epsilon(1e-9));
        CHECK(m.fit_r2 == Approx(1.0));
        CHECK(m.sample_count == 5);
    }

    TEST_CASE("fit with symmetric noise keeps the slope")
    {
        std::vector<rtfs::LoadInertiaSample> s;
        int sign = 1;
        for (double p = 1200; p <= 2600; p += 50) {
            const double ke = 2.0 * (p - 500);
            s.push_back({p, ke * (1.0 + 0.05 * sign)});
            sign = -sign;
        }
        CHECK(rtfs::fit_load_inertia_model(s).slope == Approx(2.0).epsilon(0.05));
    }

    TEST_CASE("lower-cluster predicate restricts the fit")
    {
        std::vector<rtfs::LoadInertiaSample> s;
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> load(1200, 2600);
        for (int i = 0; i < 30; ++i) {
            const double p = load(rng);
            s.push_back({p, 2.2528 * (p - 783)});
            s.push_back({p + 10, 4.0 * (p - 600)});
        }
        const auto all = rtfs::fit_load_inertia_model(s);
        std::size_t offered = 0;
        const auto lower = rtfs::fit_load_inertia_model(s, [&](const rtfs::LoadInertiaSample& x) {
            ++offered;
            return x.ke_load <= 3.0 * (x.load_mw - 700);
        });
        CHECK(offered == s.size());
        CHECK(lower.sample_count == 30);
        CHECK(lower.slope == Approx(2.2528).epsilon(1e-9));
        CHECK(lower.intercept_load_mw == Approx(783).epsilon(1e-9));
        CHECK(all.slope > lower.slope);
    }

    TEST_CASE("fit rejects degenerate inputs")
    {
        std::vector<rtfs::LoadInertiaSample> two{{1000, 500}, {1500, 1600}};
        CHECK_THROWS_AS(rtfs::fit_load_inertia_model(two), rtfs::EstimationError);
        std::vector<rtfs::LoadInertiaSample> flat{{1500, 500}, {1500, 1600}, {1500, 900}};
        CHECK_THROWS_AS(rtfs::fit_load_inertia_model(flat), rtfs::EstimationError);
    }

    TEST_CASE("line fit")
    {
        const std::vector<double> x{1, 2, 3, 4};
        const std::vector<double> y{3, 5, 7, 9};
        const auto f = rtfs::fit_line(x, y);
        CHECK(f.slope == Approx(2));
        CHECK(f.intercept == Approx(1));
        CHECK(f.r2 == Approx(1));
        const std::vector<double> same{2, 2, 2, 2};
        CHECK_THROWS_AS(rtfs::fit_line(same, y), rtfs::EstimationError);
    }

    TEST_CASE("round trip through governor-free simulations")
    {
        for (unsigned seed = 0; seed < 10; ++seed) {
            std::mt19937 rng(seed);
            const double ke_gen = std::uniform_real_distribution<double>(9000, 20000)(rng);
            const double load = std::uniform_real_distribution<double>(1200, 2200)(rng);
            const double ke_load = rtfs::predict_load_inertia(load, {});
            const double ke_sys = ke_gen + ke_load;
            // Trip size chosen so the initial RoCoF is at least 0.2 Hz/s.
            const double dp = std::uniform_real_distribution<double>(0.2, 0.6)(rng) * 2.0 * ke_sys / 50.0;
            const auto sim = rtfs::simulate(fixtures::bare_scenario(-dp, ke_gen, load, 2.0), {}, ke_load);
            const auto rec = record_from(sim.frequency, dp, ke_gen);
            const double est = rtfs::estimate_system_inertia(rec, 50);
            CHECK(est == Approx(ke_sys).epsilon(0.05));
        }
    }
}
