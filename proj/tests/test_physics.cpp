// Copyright 2026 The elzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "elzsim/physics.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "gtest/gtest.h"

using namespace elzsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// CODATA 2018: k_B = 8.617333262e-5 eV/K, h = 4.135667696e-15 eV s.
double kt_uev(double mk) { return 8.617333262e-5 * 1e6 * mk * 1e-3; }

}  // namespace

TEST(Fermi, half_filled_at_fermi_level) {
    for (double t : {1.0, 45.0, 200.0, 4000.0}) EXPECT_DOUBLE_EQ(fermi_occupation(0.0, t), 0.5);
}

TEST(Fermi, one_kt_above) {
    EXPECT_NEAR(fermi_occupation(kt_uev(45.0), 45.0), 1.0 / (1.0 + std::exp(1.0)), 1e-14);
    EXPECT_NEAR(fermi_occupation(3.878, 45.0), 0.26894, 1e-4);
    EXPECT_NEAR(kt_uev(45.0), 3.878, 1e-3);
}

TEST(Fermi, particle_hole_symmetry_and_monotone) {
    double prev = 1.0;
    for (double e = -500.0; e <= 500.0; e += 0.37) {
        for (double t : {5.0, 45.0, 300.0}) {
            EXPECT_NEAR(fermi_occupation(e, t) + fermi_occupation(-e, t), 1.0, 1e-15);
        }
        const double f = fermi_occupation(e, 45.0);
        EXPECT_LE(f, prev);
        prev = f;
    }
    EXPECT_EQ(fermi_occupation(1e6, 45.0), 0.0);
    EXPECT_EQ(fermi_occupation(-1e6, 45.0), 1.0);
}

TEST(Fermi, rejects_non_positive_temperature) {
    EXPECT_THROW(fermi_occupation(1.0, 0.0), DomainError);
    EXPECT_THROW(fermi_occupation(1.0, -3.0), DomainError);
}

TEST(Zeeman, conversion) {
    EXPECT_NEAR(zeeman_convert(19.105), 79.0, 0.1);
    EXPECT_EQ(zeeman_convert(0.0), 0.0);
    EXPECT_NEAR(zeeman_convert(1.0), 4.1357, 1e-4);
}

TEST(Rates, symmetric_point) {
    PhysicalParams p;
    for (double t : {20.0, 45.0, 150.0}) {
        p.electron_temperature_mk = t;
        p.fermi_offset_uev = p.zeeman_energy_uev / 2;
        const RateSet r = derive_rates(p);
        EXPECT_NEAR(r.up_out, r.down_in, 1e-9 * r.up_out);
    }
}

TEST(Rates, detailed_balance_random_draws) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        PhysicalParams p;
        p.zeeman_energy_uev = 10.0 + 150.0 * u(rng);
        p.fermi_offset_uev = p.zeeman_energy_uev * (0.02 + 0.96 * u(rng));
        p.electron_temperature_mk = 10.0 + 400.0 * u(rng);
        p.base_tunnel_rate_hz = 1e3 + 1e6 * u(rng);
        p.t1_ms = 0.1 + 100.0 * u(rng);
        const RateSet r = derive_rates(p);
        const double kt = kt_uev(p.electron_temperature_mk);
        EXPECT_NEAR(r.down_out / r.down_in, std::exp(-p.fermi_offset_uev / kt),
                    1e-12 * std::exp(-p.fermi_offset_uev / kt));
        const double up = std::exp(-(p.zeeman_energy_uev - p.fermi_offset_uev) / kt);
        EXPECT_NEAR(r.up_in / r.up_out, up, 1e-12 * up);
        EXPECT_LE(r.up_out, p.base_tunnel_rate_hz);
        EXPECT_LE(r.down_in, p.base_tunnel_rate_hz);
        EXPECT_GE(r.up_in, 0.0);
        EXPECT_GE(r.down_out, 0.0);
        EXPECT_DOUBLE_EQ(r.relax, 1e3 / p.t1_ms);
    }
}

TEST(Rates, thermal_escape_ratio_at_symmetric_point) {
    PhysicalParams p;
    p.fermi_offset_uev = p.zeeman_energy_uev / 2;
    const RateSet r = derive_rates(p);
    EXPECT_NEAR(std::log(r.down_out / r.down_in), -10.19, 0.01);
    EXPECT_NEAR(r.down_out / r.down_in, 3.76e-5, 0.02e-5);
}

TEST(Rates, both_tunnel_rates_near_gamma_when_levels_are_deep) {
    // With both levels several k_B T away from the Fermi level the two
    // tunnel rates saturate at the barrier rate.
    PhysicalParams p;
    p.fermi_offset_uev = 30.0;
    const RateSet r = derive_rates(p);
    EXPECT_NEAR(r.up_out, 20e3, 20.0);
    EXPECT_NEAR(r.down_in, 20e3, 20.0);
}

TEST(Rates, invalid_params_rejected) {
    PhysicalParams p;
    p.fermi_offset_uev = p.zeeman_energy_uev;
    EXPECT_THROW(derive_rates(p), DomainError);
    p = {};
    p.fermi_offset_uev = 0.0;
    EXPECT_THROW(derive_rates(p), DomainError);
    p = {};
    p.t1_ms = -1.0;
    EXPECT_THROW(derive_rates(p), DomainError);
    p = {};
    p.sensor_level_empty = p.sensor_level_occupied;
    EXPECT_THROW(derive_rates(p), DomainError);
    p = {};
    p.sampling_rate_hz = 0.0;
    EXPECT_THROW(derive_rates(p), DomainError);
}

TEST(Keith, paper_operating_point_passes) {
    const PhysicalParams p;
    const KeithReport k = keith_conditions(p, derive_rates(p));
    EXPECT_NEAR(k[0].ratio, 20.4, 0.05);
    EXPECT_NEAR(k[1].ratio, 630.0, 1.0);
    EXPECT_NEAR(k[2].ratio, 50.0, 0.1);
    EXPECT_EQ(k[0].threshold, 13.0);
    EXPECT_EQ(k[1].threshold, 100.0);
    EXPECT_EQ(k[2].threshold, 12.0);
    for (const auto& c : k) EXPECT_TRUE(c.pass) << c.name;
}

TEST(Keith, hot_electrons_fail_first_condition) {
    PhysicalParams p;
    p.electron_temperature_mk = 200.0;
    const KeithReport k = keith_conditions(p, derive_rates(p));
    EXPECT_NEAR(k[0].ratio, 79.0 / kt_uev(200.0), 1e-9);
    EXPECT_NEAR(k[0].ratio, 4.58, 0.01);
    EXPECT_FALSE(k[0].pass);
}

TEST(Keith, margins_scale_linearly) {
    PhysicalParams p;
    const auto base = keith_conditions(p, derive_rates(p));
    p.t1_ms *= 2;
    EXPECT_NEAR(keith_conditions(p, derive_rates(p))[1].ratio, 2 * base[1].ratio, 1e-9);
    p = {};
    p.sampling_rate_hz *= 2;
    EXPECT_NEAR(keith_conditions(p, derive_rates(p))[2].ratio, 2 * base[2].ratio, 1e-9);
    p = {};
    p.t1_ms = 1e300;
    const auto inf = keith_conditions(p, derive_rates(p));
    EXPECT_GT(inf[1].ratio, 1e290);
    EXPECT_TRUE(inf[1].pass);
}

TEST(Budget, relaxation_error) {
    EXPECT_NEAR(relaxation_error(50, 10, 31.5), 0.0019, 0.00005);
    EXPECT_EQ(relaxation_error(50, 10, kInf), 0.0);
    EXPECT_NEAR(relaxation_error(50, 10, 5), 1.0 - std::exp(-60.0 / 5000.0), 1e-15);
    EXPECT_NEAR(relaxation_error(50, 10, 5), 0.01193, 1e-5);
}

TEST(Budget, missed_bump_at_operating_point) {
    EXPECT_NEAR(missed_bump_probability(50, 50, 1), 0.005, 0.0002);
    EXPECT_EQ(missed_bump_probability(50, 50, 0), 0.0);
    EXPECT_LT(missed_bump_probability(50, 50, 1e-9), 1e-10);
}

TEST(Budget, missed_bump_off_diagonal_matches_direct_formula) {
    // Printed closed form evaluated away from its removable singularity.
    auto direct = [](double tu, double td, double ts) {
        const double ru = ts / tu, rd = ts / td;
        const double detect = ru * (1 - std::exp((ru - rd) / 2)) / ((1 - std::exp(ru / 2)) * (ru - rd));
        return 1 - detect;
    };
    for (auto [tu, td] : {std::pair{25.0, 100.0}, {100.0, 25.0}, {40.0, 60.0}, {10.0, 300.0}}) {
        EXPECT_NEAR(missed_bump_probability(tu, td, 1.0), direct(tu, td, 1.0), 1e-12);
    }
}

TEST(Budget, missed_bump_monotone_and_continuous_on_diagonal) {
    double prev = 0.0;
    for (double ts = 0.01; ts < 20.0; ts *= 1.1) {
        const double m = missed_bump_probability(50, 70, ts);
        EXPECT_GT(m, prev);
        EXPECT_LE(m, 1.0);
        prev = m;
    }
    const double on = missed_bump_probability(50, 50, 1);
    for (double eps : {1e-6, 1e-7, 1e-9}) {
        EXPECT_NEAR(missed_bump_probability(50 * (1 + eps), 50, 1), on, 1e-8);
        EXPECT_NEAR(missed_bump_probability(50 * (1 - eps), 50, 1), on, 1e-8);
    }
}

TEST(Budget, sampled_form_is_half_interval_form_at_twice_the_step) {
    for (auto [tu, td] : {std::pair{50.0, 50.0}, {25.0, 100.0}, {100.0, 25.0}}) {
        for (double ts : {0.5, 1.0, 3.0}) {
            EXPECT_NEAR(sampled_missed_bump_probability(tu, td, ts), missed_bump_probability(tu, td, 2 * ts), 1e-14);
        }
    }
}

TEST(Budget, sampled_form_matches_interval_sum) {
    // Oracle: a bump is missed iff tunnel-out at time s (within the first
    // interval after it, i.e. s in ((k-1)t_s, k t_s]) is followed by the
    // reload before k t_s. Integrate over s numerically.
    for (auto [tu, td] : {std::pair{50.0, 50.0}, {25.0, 100.0}, {100.0, 25.0}}) {
        const double a = 1 / tu, b = 1 / td, ts = 1.0;
        double inside = 0.0;  // within one interval, s uniform-ish under the exponential
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double s = (i + 0.5) * ts / n;
            inside += a * std::exp(-a * s) * (1 - std::exp(-b * (ts - s))) * ts / n;
        }
        // Intervals are identical up to the factor e^{-a t_s} per interval.
        const double miss = inside / (1 - std::exp(-a * ts));
        EXPECT_NEAR(sampled_missed_bump_probability(tu, td, ts), miss, 1e-8);
    }
}

TEST(Budget, thermal_escape) {
    const double p = thermal_escape_probability(50, 79, 45, 670);
    EXPECT_GT(p, 0.0004);
    EXPECT_LT(p, 0.0008);
    EXPECT_EQ(thermal_escape_probability(50, 79, 45, 0), 0.0);
    EXPECT_NEAR(thermal_escape_probability(50, 79, 45, 1340) / p, 2.0, 1e-3);
    EXPECT_NEAR(p, 1 - std::exp(-670 / (50 * std::exp(79 / (2 * kt_uev(45))))), 1e-15);
    double prev = 0.0;
    for (double w = 10; w < 1e5; w *= 1.5) {
        const double q = thermal_escape_probability(50, 79, 45, w);
        EXPECT_GT(q, prev);
        prev = q;
    }
    prev = 0.0;
    for (double t = 10; t < 500; t += 7) {
        const double q = thermal_escape_probability(50, 79, t, 670);
        EXPECT_GT(q, prev);
        prev = q;
    }
}

TEST(Budget, operating_point) {
    const PhysicalParams p;
    const ErrorBudget b = predict_budget(p, derive_rates(p), 670, 1);
    EXPECT_NEAR(b.predicted_f_up, 0.993, 0.001);
    EXPECT_NEAR(b.predicted_f_down, 0.9995, 0.0005);
    EXPECT_NEAR(b.predicted_visibility, 0.992, 0.001);
    EXPECT_NEAR(b.predicted_visibility, 0.9912, 0.003);
    EXPECT_DOUBLE_EQ(b.predicted_visibility, b.predicted_f_up + b.predicted_f_down - 1);
    for (double v : {b.relaxation_loss, b.missed_bump, b.thermal_escape}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Budget, error_free_limit) {
    PhysicalParams p;
    p.t1_ms = kInf;
    p.electron_temperature_mk = 0.5;
    const ErrorBudget b = predict_budget(p, derive_rates(p), 670, 0.0);
    EXPECT_EQ(b.relaxation_loss, 0.0);
    EXPECT_EQ(b.missed_bump, 0.0);
    EXPECT_EQ(b.thermal_escape, 0.0);
    EXPECT_EQ(b.predicted_visibility, 1.0);
}
