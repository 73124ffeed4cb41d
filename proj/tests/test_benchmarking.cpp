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


#include "elzsim/benchmarking.hpp"

#include <cmath>

#include "gtest/gtest.h"

using namespace elzsim;

namespace {

QubitParams clean() {
    QubitParams q;
    q.noise = NoiseModel::kNone;
    return q;
}

std::vector<std::size_t> powers_of_two(std::size_t max) {
    std::vector<std::size_t> v;
    for (std::size_t m = 1; m <= max; m *= 2) v.push_back(m);
    return v;
}

RBConfig depolarizing_config(double p, std::size_t max_m, std::size_t k, std::size_t shots) {
    RBConfig c;
    c.sequence_lengths = powers_of_two(max_m);
    c.sequences_per_length = k;
    c.shots_per_sequence = shots;
    c.depolarizing_per_clifford = p;
    return c;
}

}  // namespace

TEST(Fidelity, conversions) {
    EXPECT_DOUBLE_EQ(clifford_fidelity_from_decay(1.0), 1.0);
    EXPECT_DOUBLE_EQ(gate_fidelity_from_clifford(1.0, 44.0 / 24.0), 1.0);
    EXPECT_NEAR(clifford_fidelity_from_decay(0.996), 0.998, 1e-15);
    EXPECT_NEAR(gate_fidelity_from_clifford(0.998, 44.0 / 24.0), 1.0 - 0.002 * 24.0 / 44.0, 1e-15);
    EXPECT_NEAR(irb_gate_fidelity(0.99900, 0.99799), 0.9994944945, 1e-9);
    EXPECT_DOUBLE_EQ(irb_gate_fidelity(0.99, 0.99), 1.0);
    EXPECT_THROW(irb_gate_fidelity(0.0, 0.5), DomainError);
}

TEST(Rb, noiseless_curve_is_flat) {
    const RBConfig c = depolarizing_config(1.0, 4096, 10, 20);
    const RbResult r = run_rb(c, clean(), nullptr, {3, 1, 100});
    for (const auto& row : r.data.per_sequence)
        for (double v : row) EXPECT_EQ(v, 1.0);
    EXPECT_DOUBLE_EQ(r.fit.decay, 1.0);
    EXPECT_DOUBLE_EQ(r.fit.gate_fidelity, 1.0);
    EXPECT_EQ(r.fit.decay_sigma, 0.0);
    EXPECT_NEAR(r.fit.generators_per_clifford, 44.0 / 24.0, 1e-15);
}

TEST(Rb, recovers_depolarizing_decay) {
    const RBConfig c = depolarizing_config(0.997, 2048, 50, 100);
    const RbResult r = run_rb(c, clean(), nullptr, {17, 1, 200});
    ASSERT_TRUE(r.fit.converged);
    EXPECT_GT(r.fit.decay_sigma, 0.0);
    EXPECT_LT(std::abs(r.fit.decay - 0.997), 3 * r.fit.decay_sigma);
    EXPECT_NEAR(r.fit.amplitude, 0.5, 0.02);
    EXPECT_NEAR(r.fit.offset, 0.5, 0.02);
}

TEST(Rb, fit_needs_three_lengths) {
    std::vector<RbCurvePoint> two{{1, 0.9, 0.01, 10}, {2, 0.8, 0.01, 10}};
    EXPECT_THROW(fit_rb_decay(two, 10), InsufficientDataError);
}

TEST(Rb, binomial_scatter_shrinks_with_shots) {
    // Depolarizing alone gives every sequence the same P, so the scatter
    // across sequences is pure shot noise.
    for (std::size_t shots : {25u, 400u}) {
        RBConfig c = depolarizing_config(0.98, 32, 400, shots);
        const RbData d = collect_rb(c, clean(), nullptr, {5, 1, 0});
        const auto curve = summarize(d);
        for (const auto& pt : curve) {
            // The recovery Clifford is depolarized too.
            const double p = 0.5 + 0.5 * std::pow(0.98, static_cast<double>(pt.m + 1));
            const double expect = std::sqrt(p * (1 - p) / static_cast<double>(shots));
            EXPECT_NEAR(pt.scatter_std / expect, 1.0, 0.12) << pt.m << " " << shots;
            EXPECT_NEAR(pt.mean_p_up, p, 4 * expect / std::sqrt(400.0));
        }
    }
}

TEST(Bootstrap, minimum_resamples) {
    const RbData d = collect_rb(depolarizing_config(0.99, 64, 5, 10), clean(), nullptr, {1, 1, 0});
    EXPECT_THROW(bootstrap_ci(d, 99, 1), DomainError);
    EXPECT_NO_THROW(bootstrap_ci(d, 100, 1));
}

TEST(Bootstrap, error_matches_repeat_scatter) {
    const RBConfig c = depolarizing_config(0.99, 256, 30, 50);
    std::vector<double> decays;
    double sigma_sum = 0.0;
    const int reps = 40;
    for (int rep = 0; rep < reps; ++rep) {
        const RbResult r = run_rb(c, clean(), nullptr, {1000u + static_cast<unsigned>(rep), 1, 200});
        decays.push_back(r.fit.decay);
        sigma_sum += r.fit.decay_sigma;
    }
    EXPECT_NEAR(sigma_sum / reps / sample_std(decays), 1.0, 0.3);
}

TEST(Rb, workers_do_not_change_results) {
    QubitParams q = calibrate_ou_noise(QubitParams{});
    RBConfig c = depolarizing_config(1.0, 64, 6, 10);
    const RbResult a = run_rb(c, q, nullptr, {8, 1, 100});
    const RbResult b = run_rb(c, q, nullptr, {8, 4, 100});
    EXPECT_EQ(a.data.per_sequence, b.data.per_sequence);
    EXPECT_EQ(a.fit.decay, b.fit.decay);
    EXPECT_EQ(a.fit.bootstrap_decay, b.fit.bootstrap_decay);
}

TEST(Rb, validation) {
    RBConfig c = depolarizing_config(1.0, 8, 5, 5);
    c.sequence_lengths = {};
    EXPECT_THROW(validate(c), DomainError);
    c.sequence_lengths = {1, 4, 4};
    EXPECT_THROW(validate(c), DomainError);
    c.sequence_lengths = {1, 2, 4};
    c.sequences_per_length = 1;
    EXPECT_THROW(validate(c), DomainError);
    c.sequences_per_length = 5;
    c.depolarizing_per_clifford = 1.5;
    EXPECT_THROW(validate(c), DomainError);
    c.depolarizing_per_clifford = 1.0;
    EXPECT_NO_THROW(validate(c));
    c.readout_channel = ReadoutChannel::kTracePipeline;
    EXPECT_THROW(collect_rb(c, clean(), nullptr, {}), ConfigError);
    c.readout_channel = ReadoutChannel::kIdeal;
    c.interleaved_gate = Gate::kX;
    EXPECT_THROW(run_irb(c, Gate::kX, clean(), nullptr, {}), ConfigError);
}

TEST(Irb, interleaved_depolarizing_multiplies_decay) {
    RBConfig c = depolarizing_config(0.995, 512, 40, 200);
    c.depolarizing_interleaved = 0.99;
    const IrbResult r = run_irb(c, Gate::kI, clean(), nullptr, {21, 1, 200});
    EXPECT_NEAR(r.reference.fit.decay, 0.995, 3 * r.reference.fit.decay_sigma);
    EXPECT_NEAR(r.interleaved.fit.decay, 0.995 * 0.99, 3 * r.interleaved.fit.decay_sigma);
    EXPECT_NEAR(r.gate_fidelity, 1 - 0.01 / 2, 3 * r.gate_fidelity_sigma);
    EXPECT_GT(r.gate_fidelity_sigma, 0.0);
    EXPECT_FALSE(r.unphysical_ordering);
}

TEST(Irb, perfect_gate_has_unit_fidelity) {
    RBConfig c = depolarizing_config(0.99, 256, 40, 100);
    const IrbResult r = run_irb(c, Gate::kX, clean(), nullptr, {4, 1, 200});
    EXPECT_NEAR(r.gate_fidelity, 1.0, 3 * r.gate_fidelity_sigma + 1e-12);
    // Reusing the reference run must give the same answer.
    const IrbResult again = run_irb(c, Gate::kX, clean(), nullptr, {4, 1, 200}, &r.reference);
    EXPECT_EQ(again.gate_fidelity, r.gate_fidelity);
}

TEST(Rb, trace_pipeline_offsets_follow_readout_fidelity) {
    // Independent readout oracle: read prepared spins directly.
    RbReadout ro;
    const RateSet rates = derive_rates(ro.physical);
    const int n = 20000;
    int up_ok = 0, down_ok = 0;
    for (int i = 0; i < n; ++i) {
        Rng rng = make_rng(77, static_cast<std::uint64_t>(i), stream::kReadout);
        up_ok += detect_spin(read_spin(ro.physical, rates, Spin::kUp, ro.detection.read_window_us, rng),
                             ro.detection) == Spin::kUp;
        down_ok += detect_spin(read_spin(ro.physical, rates, Spin::kDown, ro.detection.read_window_us, rng),
                               ro.detection) == Spin::kDown;
    }
    const double f_up = static_cast<double>(up_ok) / n;
    const double f_down = static_cast<double>(down_ok) / n;

    RBConfig c = depolarizing_config(0.98, 512, 40, 50);
    c.readout_channel = ReadoutChannel::kTracePipeline;
    const RbResult r = run_rb(c, clean(), &ro, {9, 1, 100});
    ASSERT_TRUE(r.fit.converged);
    EXPECT_NEAR(r.fit.decay, 0.98, 4 * r.fit.decay_sigma);
    EXPECT_NEAR(r.fit.offset, 0.5 * (f_up + 1 - f_down), 0.01);
    EXPECT_NEAR(r.fit.offset, 0.495, 0.01);
    EXPECT_NEAR(r.fit.amplitude + r.fit.offset, f_up, 0.01);
}
