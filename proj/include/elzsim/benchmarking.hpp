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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elzsim/clifford.hpp"
#include "elzsim/errors.hpp"
#include "elzsim/fit.hpp"
#include "elzsim/parallel.hpp"
#include "elzsim/physics.hpp"
#include "elzsim/qubit.hpp"
#include "elzsim/readout.hpp"
#include "elzsim/rng.hpp"
#include "elzsim/trace_sim.hpp"

namespace elzsim {

enum class ReadoutChannel : std::uint8_t { kIdeal, kTracePipeline };

struct RBConfig {
    std::vector<std::size_t> sequence_lengths;
    std::size_t sequences_per_length = 200;
    std::size_t shots_per_sequence = 100;
    std::optional<Gate> interleaved_gate;
    ReadoutChannel readout_channel = ReadoutChannel::kIdeal;
    /// Polarisation kept by a depolarizing channel after every Clifford
    /// (1 disables it). Lets a known decay be injected.
    double depolarizing_per_clifford = 1.0;
    /// Same, after every interleaved gate.
    double depolarizing_interleaved = 1.0;
};

inline void validate(const RBConfig& c) {
    if (c.sequence_lengths.empty()) throw DomainError("sequence_lengths must not be empty");
    if (c.sequence_lengths.front() < 1) throw DomainError("sequence lengths must be at least 1");
    for (std::size_t i = 1; i < c.sequence_lengths.size(); ++i) {
        if (c.sequence_lengths[i] <= c.sequence_lengths[i - 1]) {
            throw DomainError("sequence_lengths must be strictly increasing");
        }
    }
    if (c.sequences_per_length < 2) throw DomainError("sequences_per_length must be at least 2");
    if (c.shots_per_sequence < 1) throw DomainError("shots_per_sequence must be at least 1");
    auto check_p = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
    };
    check_p(c.depolarizing_per_clifford, "depolarizing_per_clifford");
    check_p(c.depolarizing_interleaved, "depolarizing_interleaved");
}

/// Readout chain used when readout_channel is kTracePipeline.
struct RbReadout {
    PhysicalParams physical;
    DetectionConfig detection;
};

struct RbRunOptions {
    std::uint64_t base_seed = 1;
    unsigned workers = 1;
    std::size_t bootstrap_resamples = 200;
};

/// Per-sequence return probabilities, indexed [length][sequence].
struct RbData {
    std::vector<std::size_t> lengths;
    std::vector<std::vector<double>> per_sequence;
    std::size_t shots_per_sequence = 0;
};

struct RbCurvePoint {
    std::size_t m = 0;
    double mean_p_up = 0.0;
    double scatter_std = 0.0;
    std::size_t n_sequences = 0;
};

struct RBDecayFit {
    double amplitude = 0.0;
    double decay = 1.0;
    double offset = 0.0;
    std::vector<RbCurvePoint> curve;
    std::vector<double> bootstrap_decay;
    double decay_sigma = 0.0;
    double clifford_fidelity = 1.0;
    double clifford_fidelity_sigma = 0.0;
    /// Clifford infidelity divided by the mean number of primitives per
    /// Clifford in the compilation table.
    double gate_fidelity = 1.0;
    double gate_fidelity_sigma = 0.0;
    double generators_per_clifford = 0.0;
    bool converged = false;
};

struct RbResult {
    RbData data;
    RBDecayFit fit;
};

inline double clifford_fidelity_from_decay(double p) { return 1.0 - (1.0 - p) / 2.0; }

inline double gate_fidelity_from_clifford(double f_clifford, double generators_per_clifford) {
    return 1.0 - (1.0 - f_clifford) / generators_per_clifford;
}

inline std::vector<RbCurvePoint> summarize(const RbData& d) {
    std::vector<RbCurvePoint> out;
    out.reserve(d.lengths.size());
    for (std::size_t i = 0; i < d.lengths.size(); ++i) {
        const auto& v = d.per_sequence[i];
        RbCurvePoint pt{d.lengths[i], 0.0, 0.0, v.size()};
        for (double x : v) pt.mean_p_up += x;
        pt.mean_p_up /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - pt.mean_p_up) * (x - pt.mean_p_up);
        pt.scatter_std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        out.push_back(pt);
    }
    return out;
}

struct DecayParams {
    double amplitude = 0.0;
    double decay = 1.0;
    double offset = 0.0;
    bool converged = false;
};

/// Weighted fit of P(m) = A p^m + B with p and B in [0, 1] and |A| <= 1.
///
/// Each point is weighted by the standard error of its mean. The error is
/// floored at half a count of one sequence so that points where every
/// shot agreed do not take infinite weight.
inline DecayParams fit_rb_decay(std::span<const RbCurvePoint> curve, std::size_t shots_per_sequence) {
    const std::size_t n = curve.size();
    if (n < 3) throw InsufficientDataError("RB fit needs at least three lengths");
    std::vector<double> x(n), y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(curve[i].m);
        y[i] = curve[i].mean_p_up;
        const double k = static_cast<double>(curve[i].n_sequences);
        const double floor = 0.5 / (static_cast<double>(shots_per_sequence) * std::sqrt(k));
        const double se = std::max(curve[i].scatter_std / std::sqrt(k), floor);
        w[i] = 1.0 / (se * se);
    }

    // Start from B = 1/2 and a log-linear estimate of p.
    const double b0 = 0.5;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - b0;
        if (r <= 0.02) continue;
        const double ly = std::log(r);
        sx += x[i];
        sy += ly;
        sxx += x[i] * x[i];
        sxy += x[i] * ly;
        ++used;
    }
    double p0 = 1.0, a0 = y.front() - b0;
    if (used >= 2) {
        const double den = static_cast<double>(used) * sxx - sx * sx;
        if (den > 0.0) {
            const double slope = (static_cast<double>(used) * sxy - sx * sy) / den;
            p0 = std::clamp(std::exp(slope), 0.0, 1.0);
            a0 = std::exp((sy - slope * sx) / static_cast<double>(used));
        }
    }

    auto model = [](double m, const fit::Params<3>& p, fit::Params<3>* g) {
        const double pm = p[1] > 0.0 ? std::pow(p[1], m) : (m == 0.0 ? 1.0 : 0.0);
        if (g) {
            (*g)[0] = pm;
            (*g)[1] = p[1] > 0.0 ? p[0] * m * pm / p[1] : 0.0;
            (*g)[2] = 1.0;
        }
        return p[0] * pm + p[2];
    };
    auto project = [](const fit::Params<3>& p) {
        // P(m) and its limit are probabilities.
        fit::Params<3> out = p;
        out[0] = std::clamp(out[0], -1.0, 1.0);
        out[1] = std::clamp(out[1], 0.0, 1.0);
        out[2] = std::clamp(out[2], 0.0, 1.0);
        return out;
    };
    const auto res = fit::levenberg_marquardt<3>(x, y, w, fit::Params<3>(a0, p0, b0), model, project);
    return {res.params[0], res.params[1], res.params[2], res.converged};
}

struct BootstrapResult {
    std::vector<double> decay;
    double decay_sigma = 0.0;
    double clifford_fidelity_sigma = 0.0;
    double gate_fidelity_sigma = 0.0;
};

inline double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Resamples sequences (not shots) with replacement within each length and
/// refits. The returned decay vector is in resample order, so two runs
/// bootstrapped with the same seed can be paired.
inline BootstrapResult bootstrap_ci(const RbData& data, std::size_t resamples, std::uint64_t seed) {
    if (resamples < 100) throw DomainError("bootstrap_ci: at least 100 resamples required");
    BootstrapResult out;
    out.decay.resize(resamples);
    RbData boot;
    boot.lengths = data.lengths;
    boot.shots_per_sequence = data.shots_per_sequence;
    boot.per_sequence.resize(data.lengths.size());
    for (std::size_t r = 0; r < resamples; ++r) {
        Rng rng = make_rng(seed, r, stream::kBootstrap);
        for (std::size_t i = 0; i < data.lengths.size(); ++i) {
            const auto& src = data.per_sequence[i];
            auto& dst = boot.per_sequence[i];
            dst.resize(src.size());
            for (auto& v : dst) v = src[uniform_index(rng, src.size())];
        }
        out.decay[r] = fit_rb_decay(summarize(boot), boot.shots_per_sequence).decay;
    }
    out.decay_sigma = sample_std(out.decay);
    out.clifford_fidelity_sigma = out.decay_sigma / 2.0;
    out.gate_fidelity_sigma = out.clifford_fidelity_sigma / clifford_group().average_generators();
    return out;
}

inline RBDecayFit analyze_rb(const RbData& data, std::size_t resamples, std::uint64_t seed) {
    RBDecayFit f;
    f.curve = summarize(data);
    const DecayParams d = fit_rb_decay(f.curve, data.shots_per_sequence);
    f.amplitude = d.amplitude;
    f.decay = d.decay;
    f.offset = d.offset;
    f.converged = d.converged;
    f.generators_per_clifford = clifford_group().average_generators();
    f.clifford_fidelity = clifford_fidelity_from_decay(f.decay);
    f.gate_fidelity = gate_fidelity_from_clifford(f.clifford_fidelity, f.generators_per_clifford);
    if (resamples > 0) {
        BootstrapResult b = bootstrap_ci(data, resamples, seed);
        f.bootstrap_decay = std::move(b.decay);
        f.decay_sigma = b.decay_sigma;
        f.clifford_fidelity_sigma = b.clifford_fidelity_sigma;
        f.gate_fidelity_sigma = b.gate_fidelity_sigma;
    }
    return f;
}

namespace detail {

inline void depolarize(QubitState& s, double keep) {
    s.x *= keep;
    s.y *= keep;
    s.z *= keep;
}

/// Runs the flattened program on `s`. `noise` may be null for a
/// noise-free drive.
inline QubitState execute(QubitState s, const RbSequence& seq, const QubitParams& q, const RBConfig& cfg,
                          FrequencyNoise* noise) {
    for (const RbStep& step : seq.steps) {
        switch (step.kind) {
            case RbStep::Kind::kGate:
                s = noise ? apply_gate(s, step.gate, q, *noise) : apply_gate(s, step.gate, q, 0.0);
                break;
            case RbStep::Kind::kEndClifford:
                if (cfg.depolarizing_per_clifford != 1.0) depolarize(s, cfg.depolarizing_per_clifford);
                break;
            case RbStep::Kind::kEndInterleaved:
                if (cfg.depolarizing_interleaved != 1.0) depolarize(s, cfg.depolarizing_interleaved);
                break;
        }
    }
    return s;
}

inline bool coin(Rng& rng, double p) { return std::generate_canonical<double, 64>(rng) < p; }

}  // namespace detail

/// Executes every (length, sequence) pair and returns the mean measured
/// P↑ for each.
///
/// Each shot prepares spin-up, runs the sequence under a fresh noise
/// realisation, projects, and reads out either ideally or through the
/// simulated Elzerman chain (loading with thermal mis-load, trace, and
/// threshold detection), in which case SPAM lands in A and B.
///
/// Clifford draws use a stream keyed only by (seed, length index,
/// sequence index), so a reference and an interleaved run with the same
/// seed share their random Cliffords.
inline RbData collect_rb(const RBConfig& cfg, const QubitParams& q, const RbReadout* readout,
                         const RbRunOptions& opt) {
    validate(cfg);
    validate(q);
    const bool pipeline = cfg.readout_channel == ReadoutChannel::kTracePipeline;
    if (pipeline && !readout) throw ConfigError("trace-pipeline readout requires readout parameters");
    RateSet rates;
    if (pipeline) {
        validate(readout->detection);
        rates = derive_rates(readout->physical);
    }
    const bool noisy = q.noise != NoiseModel::kNone && q.sigma_f_mhz > 0.0;

    RbData data;
    data.lengths = cfg.sequence_lengths;
    data.shots_per_sequence = cfg.shots_per_sequence;
    data.per_sequence.assign(cfg.sequence_lengths.size(), std::vector<double>(cfg.sequences_per_length));
    const std::size_t k = cfg.sequences_per_length;

    parallel_for(cfg.sequence_lengths.size() * k, opt.workers, [&](std::size_t unit) {
        const std::size_t li = unit / k;
        Rng seq_rng = make_rng(opt.base_seed, unit, stream::kSequences);
        const RbSequence seq = generate_rb_sequence(cfg.sequence_lengths[li], seq_rng, cfg.interleaved_gate);
        Rng rng = make_rng(opt.base_seed, unit, stream::kQubit);

        std::optional<double> fixed_p_up;
        if (!noisy) fixed_p_up = detail::execute(QubitState::up(), seq, q, cfg, nullptr).p_up();

        std::size_t ups = 0;
        for (std::size_t shot = 0; shot < cfg.shots_per_sequence; ++shot) {
            QubitState start = QubitState::up();
            if (pipeline && rates.up_in > 0.0) {
                // A thermally loaded UP is flipped to DOWN by the preparing π pulse.
                if (detail::coin(rng, rates.up_in / (rates.up_in + rates.down_in))) start = QubitState::down();
            }
            double p_up = 0.0;
            if (fixed_p_up && start.z < 0.0) {
                p_up = *fixed_p_up;
            } else if (noisy) {
                FrequencyNoise noise(q, rng);
                p_up = detail::execute(start, seq, q, cfg, &noise).p_up();
            } else {
                p_up = detail::execute(start, seq, q, cfg, nullptr).p_up();
            }
            const Spin actual = detail::coin(rng, p_up) ? Spin::kUp : Spin::kDown;
            Spin seen = actual;
            if (pipeline) {
                const ShotTrace t =
                    read_spin(readout->physical, rates, actual, readout->detection.read_window_us, rng);
                seen = detect_spin(t, readout->detection);
            }
            ups += seen == Spin::kUp;
        }
        data.per_sequence[li][unit % k] =
            static_cast<double>(ups) / static_cast<double>(cfg.shots_per_sequence);
    });
    return data;
}

inline RbResult run_rb(const RBConfig& cfg, const QubitParams& q, const RbReadout* readout, const RbRunOptions& opt) {
    RbResult r;
    r.data = collect_rb(cfg, q, readout, opt);
    r.fit = analyze_rb(r.data, opt.bootstrap_resamples, opt.base_seed);
    return r;
}

struct IrbResult {
    Gate gate = Gate::kI;
    RbResult reference;
    RbResult interleaved;
    double decay_ratio = 1.0;  // p_int / p_ref
    double gate_fidelity = 1.0;
    double gate_fidelity_sigma = 0.0;
    /// p_int exceeds p_ref by more than their combined bootstrap error.
    bool unphysical_ordering = false;
};

inline double irb_gate_fidelity(double p_ref, double p_int) {
    if (!(p_ref > 0.0)) throw DomainError("irb_gate_fidelity: reference decay must be positive");
    return 1.0 - (1.0 - p_int / p_ref) / 2.0;
}

/// Reference and interleaved runs share lengths, shot budget, seeds and
/// therefore their random Clifford draws. The fidelity error comes from
/// pairing the two bootstrap distributions resample by resample.
inline IrbResult run_irb(const RBConfig& reference, Gate gate, const QubitParams& q, const RbReadout* readout,
                         const RbRunOptions& opt, const RbResult* precomputed_reference = nullptr) {
    if (reference.interleaved_gate) throw ConfigError("reference RB config must not interleave a gate");
    IrbResult out;
    out.gate = gate;
    out.reference = precomputed_reference ? *precomputed_reference : run_rb(reference, q, readout, opt);
    RBConfig inter = reference;
    inter.interleaved_gate = gate;
    out.interleaved = run_rb(inter, q, readout, opt);

    const double p_ref = out.reference.fit.decay;
    const double p_int = out.interleaved.fit.decay;
    out.decay_ratio = p_int / p_ref;
    out.gate_fidelity = irb_gate_fidelity(p_ref, p_int);
    const auto& br = out.reference.fit.bootstrap_decay;
    const auto& bi = out.interleaved.fit.bootstrap_decay;
    if (!br.empty() && br.size() == bi.size()) {
        std::vector<double> f(br.size());
        for (std::size_t i = 0; i < br.size(); ++i) f[i] = br[i] > 0.0 ? irb_gate_fidelity(br[i], bi[i]) : 0.0;
        out.gate_fidelity_sigma = sample_std(f);
    }
    const double combined = std::hypot(out.reference.fit.decay_sigma, out.interleaved.fit.decay_sigma);
    out.unphysical_ordering = p_int - p_ref > combined;
    return out;
}

}  // namespace elzsim
