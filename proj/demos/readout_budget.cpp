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

// Closed-form readout budget next to a small Monte Carlo run at the same
// operating point.

#include <cstdio>

#include "elzsim/physics.hpp"
#include "elzsim/readout.hpp"
#include "elzsim/trace_sim.hpp"

int main() {
    using namespace elzsim;
    const PhysicalParams p;
    const RateSet rates = derive_rates(p);
    const DetectionConfig det;
    const ErrorBudget b = predict_budget(p, rates, det.read_window_us, p.sample_time_us());
    std::printf("closed form  F_up %.3f%%  F_down %.3f%%  V %.3f%%\n", 100 * b.predicted_f_up,
                100 * b.predicted_f_down, 100 * b.predicted_visibility);

    BatchSpec spec;
    spec.n_shots = 4000;
    spec.base_seed = 11;
    spec.read_window_us = det.read_window_us;
    const auto batch = generate_batch(p, rates, spec);
    const FidelityEstimate f = score_batch(batch, det);
    std::printf("simulated    F_up %.3f%%  F_down %.3f%%  V %.3f%%  (%zu shots)\n", 100 * f.f_up, 100 * f.f_down,
                100 * f.visibility, batch.size());
    for (const auto& k : keith_conditions(p, rates)) {
        std::printf("%-22s %8.1f (>= %.0f) %s\n", std::string(k.name).c_str(), k.ratio, k.threshold,
                    k.pass ? "ok" : "FAIL");
    }
}
