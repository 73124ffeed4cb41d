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

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elzsim/errors.hpp"
#include "elzsim/parallel.hpp"
#include "elzsim/physics.hpp"
#include "elzsim/rng.hpp"

namespace elzsim {

/// Hidden charge/spin state of the dot. The sensor only sees charge.
enum class ChargeSpinState : std::uint8_t { kUpOccupied, kDownOccupied, kEmpty };

enum class Spin : std::uint8_t { kUp, kDown };

inline constexpr ChargeSpinState occupied_state(Spin s) {
    return s == Spin::kUp ? ChargeSpinState::kUpOccupied : ChargeSpinState::kDownOccupied;
}

inline constexpr bool is_allowed_transition(ChargeSpinState from, ChargeSpinState to) {
    using enum ChargeSpinState;
    switch (from) {
        case kUpOccupied: return to == kEmpty || to == kDownOccupied;
        case kDownOccupied: return to == kEmpty;
        case kEmpty: return to == kUpOccupied || to == kDownOccupied;
    }
    return false;
}

struct Transition {
    double time_us = 0.0;
    ChargeSpinState state = ChargeSpinState::kEmpty;
};

struct StatePath {
    ChargeSpinState initial = ChargeSpinState::kDownOccupied;
    std::vector<Transition> transitions;  // strictly increasing times
    double duration_us = 0.0;

    ChargeSpinState final_state() const { return transitions.empty() ? initial : transitions.back().state; }

    ChargeSpinState state_at(double t_us) const {
        ChargeSpinState s = initial;
        for (const auto& tr : transitions) {
            if (tr.time_us > t_us) break;
            s = tr.state;
        }
        return s;
    }

    /// Total time spent in `s` over [0, duration_us].
    double time_in(ChargeSpinState s) const {
        double total = 0.0;
        double t = 0.0;
        ChargeSpinState cur = initial;
        for (const auto& tr : transitions) {
            if (cur == s) total += tr.time_us - t;
            t = tr.time_us;
            cur = tr.state;
        }
        if (cur == s) total += duration_us - t;
        return total;
    }
};

/// Exact (Gillespie) sampling of the three-state chain over `duration_us`.
///
/// Appends onto `path` starting from its current final state at
/// `start_us`; the free function below wraps this for a fresh path.
inline void extend_path(StatePath& path, const RateSet& rates, double start_us, double duration_us, Rng& rng) {
    using enum ChargeSpinState;
    const double end_us = start_us + duration_us;
    double t = start_us;
    ChargeSpinState s = path.final_state();
    for (;;) {
        // Rates in Hz; time in µs.
        double r1 = 0.0, r2 = 0.0;
        ChargeSpinState to1 = kEmpty, to2 = kEmpty;
        switch (s) {
            case kUpOccupied: r1 = rates.up_out; to1 = kEmpty; r2 = rates.relax; to2 = kDownOccupied; break;
            case kDownOccupied: r1 = rates.down_out; to1 = kEmpty; break;
            case kEmpty: r1 = rates.up_in; to1 = kUpOccupied; r2 = rates.down_in; to2 = kDownOccupied; break;
        }
        const double total = (r1 + r2) * 1e-6;
        if (total <= 0.0) break;
        const double u = std::generate_canonical<double, 64>(rng);
        t += -std::log1p(-u) / total;
        if (!(t < end_us)) break;
        const double v = std::generate_canonical<double, 64>(rng) * (r1 + r2);
        s = v < r1 ? to1 : to2;
        path.transitions.push_back({t, s});
    }
    path.duration_us = end_us;
}

inline StatePath sample_path(const RateSet& rates, ChargeSpinState initial, double duration_us, Rng& rng) {
    if (!(duration_us > 0.0)) throw DomainError("sample_path: duration must be positive");
    StatePath path;
    path.initial = initial;
    extend_path(path, rates, 0.0, duration_us, rng);
    return path;
}

struct RenderOptions {
    bool filter = true;
    bool noise = true;
};

struct ShotTrace {
    std::vector<float> samples;
    StatePath hidden_path;
    Spin prepared = Spin::kDown;
    std::uint64_t seed = 0;
    double sample_time_us = 1.0;
    /// Leading samples that fall inside the readout settle transient.
    std::size_t settle_samples = 0;

    double duration_us() const { return static_cast<double>(samples.size()) * sample_time_us; }
};

inline std::size_t sample_count(double duration_us, double sampling_rate_hz) {
    return static_cast<std::size_t>(std::ceil(duration_us * sampling_rate_hz * 1e-6 - 1e-9));
}

inline double sensor_level(ChargeSpinState s, const PhysicalParams& p) {
    return s == ChargeSpinState::kEmpty ? p.sensor_level_empty : p.sensor_level_occupied;
}

/// Sensor trace for a hidden path, sample k taken at t = k * t_s.
///
/// The single-pole channel is propagated exactly between state changes
/// (x + (y - x) e^{-dt/tau}), so short excursions reach precisely the
/// analytic step-response amplitude. White Gaussian noise with
/// sigma = |level_empty - level_occupied| / SNR is added per output sample.
inline std::vector<float> render_samples(const StatePath& path, const PhysicalParams& p, Rng& rng,
                                         RenderOptions opts = {}) {
    const std::size_t n = sample_count(path.duration_us, p.sampling_rate_hz);
    const double ts = p.sample_time_us();
    const double tau_us = 1e6 / (2.0 * M_PI * p.sensor_bandwidth_hz);
    std::vector<float> out(n);

    double x = sensor_level(path.initial, p);
    double y = x;
    double now = 0.0;
    std::size_t next = 0;
    const auto& tr = path.transitions;
    auto relax_to = [&](double t) {
        if (opts.filter) y = x + (y - x) * std::exp(-(t - now) / tau_us);
        else y = x;
        now = t;
    };
    for (std::size_t k = 0; k < n; ++k) {
        const double tk = static_cast<double>(k) * ts;
        while (next < tr.size() && tr[next].time_us <= tk) {
            relax_to(tr[next].time_us);
            x = sensor_level(tr[next].state, p);
            if (!opts.filter) y = x;
            ++next;
        }
        relax_to(tk);
        out[k] = static_cast<float>(y);
    }
    if (opts.noise) {
        std::normal_distribution<double> gauss(0.0, p.noise_sigma());
        for (auto& v : out) v = static_cast<float>(v + gauss(rng));
    }
    return out;
}

inline ShotTrace render_trace(const StatePath& path, const PhysicalParams& p, Rng& rng, RenderOptions opts = {}) {
    ShotTrace shot;
    shot.samples = render_samples(path, p, rng, opts);
    shot.hidden_path = path;
    shot.sample_time_us = p.sample_time_us();
    return shot;
}

/// Settle plus readout for an electron already in the dot with spin
/// `actual`. During settle the levels are still moving so only T1 acts.
///
/// The trace spans settle_time + read_window; its first settle_time worth
/// of samples is flagged in `settle_samples` for blanking.
inline ShotTrace read_spin(const PhysicalParams& p, const RateSet& rates, Spin actual, double read_window_us, Rng& rng,
                           const RenderOptions& render = {}) {
    if (!(read_window_us > 0.0)) throw DomainError("read_spin: read window must be positive");
    StatePath path;
    path.initial = occupied_state(actual);
    RateSet settle_rates;
    settle_rates.relax = rates.relax;
    extend_path(path, settle_rates, 0.0, p.settle_time_us, rng);
    extend_path(path, rates, p.settle_time_us, read_window_us, rng);

    ShotTrace shot = render_trace(path, p, rng, render);
    shot.prepared = actual;
    shot.settle_samples = sample_count(p.settle_time_us, p.sampling_rate_hz);
    return shot;
}

struct ShotOptions {
    RenderOptions render;
    /// Load the electron from an empty dot at the readout level, so a
    /// spin-up electron can be loaded thermally (rate up_in vs down_in).
    bool thermal_misload = true;
};

/// One Elzerman shot: load, optional ideal pi pulse for UP, then read_spin.
inline ShotTrace prepare_and_read_shot(const PhysicalParams& p, const RateSet& rates, Spin prepared,
                                       double read_window_us, Rng& rng, const ShotOptions& opts = {}) {
    if (!(read_window_us > 0.0)) throw DomainError("prepare_and_read_shot: read window must be positive");
    Spin loaded = Spin::kDown;
    if (opts.thermal_misload && rates.up_in > 0.0) {
        const double u = std::generate_canonical<double, 64>(rng);
        if (u * (rates.up_in + rates.down_in) < rates.up_in) loaded = Spin::kUp;
    }
    Spin actual = loaded;
    if (prepared == Spin::kUp) actual = loaded == Spin::kUp ? Spin::kDown : Spin::kUp;
    ShotTrace shot = read_spin(p, rates, actual, read_window_us, rng, opts.render);
    shot.prepared = prepared;
    return shot;
}

inline ShotTrace prepare_and_read_shot(const PhysicalParams& p, Spin prepared, double read_window_us, Rng& rng,
                                       const ShotOptions& opts = {}) {
    return prepare_and_read_shot(p, derive_rates(p), prepared, read_window_us, rng, opts);
}

enum class PreparePattern { kInterleaved, kAllUp, kAllDown };

inline Spin prepared_for(PreparePattern pattern, std::size_t k) {
    switch (pattern) {
        case PreparePattern::kAllUp: return Spin::kUp;
        case PreparePattern::kAllDown: return Spin::kDown;
        case PreparePattern::kInterleaved: break;
    }
    return k % 2 == 0 ? Spin::kUp : Spin::kDown;
}

struct BatchSpec {
    std::size_t n_shots = 0;
    PreparePattern pattern = PreparePattern::kInterleaved;
    std::uint64_t base_seed = 0;
    double read_window_us = 670.0;
    /// Offset added to the shot index before seeding; disjoint offsets give
    /// independent batches.
    std::uint64_t first_index = 0;
    ShotOptions options;
};

/// Shot k is seeded from (base_seed, first_index + k) alone, so the batch
/// is identical for any worker count.
inline std::vector<ShotTrace> generate_batch(const PhysicalParams& p, const RateSet& rates, const BatchSpec& spec,
                                             unsigned workers = 1) {
    if (spec.n_shots == 0) throw DomainError("generate_batch: need at least one shot");
    std::vector<ShotTrace> batch(spec.n_shots);
    parallel_for(spec.n_shots, workers, [&](std::size_t k) {
        const std::uint64_t seed = derive_seed(spec.base_seed, spec.first_index + k, stream::kShots);
        Rng rng(seed);
        batch[k] = prepare_and_read_shot(p, rates, prepared_for(spec.pattern, k), spec.read_window_us, rng,
                                         spec.options);
        batch[k].seed = seed;
    });
    return batch;
}

inline std::vector<ShotTrace> generate_batch(const PhysicalParams& p, const BatchSpec& spec, unsigned workers = 1) {
    return generate_batch(p, derive_rates(p), spec, workers);
}

inline nlohmann::json to_json(const PhysicalParams& p) {
    return {
        {"zeeman_uev", p.zeeman_energy_uev},
        {"electron_temperature_mk", p.electron_temperature_mk},
        {"fermi_offset_uev", p.fermi_offset_uev},
        {"base_tunnel_rate_hz", p.base_tunnel_rate_hz},
        {"t1_ms", p.t1_ms},
        {"external_field_mt", p.external_field_mt},
        {"sensor_snr", p.sensor_snr},
        {"sensor_bandwidth_hz", p.sensor_bandwidth_hz},
        {"level_occupied_e2h", p.sensor_level_occupied},
        {"level_empty_e2h", p.sensor_level_empty},
        {"sampling_rate_hz", p.sampling_rate_hz},
        {"settle_us", p.settle_time_us},
    };
}

/// Writes `<stem>.f32` (shots back to back, little-endian float32) and a
/// `<stem>.json` sidecar describing layout, parameters and per-shot seeds.
inline void write_trace_batch(const std::filesystem::path& stem, std::span<const ShotTrace> batch,
                              const PhysicalParams& p, std::uint64_t base_seed, const nlohmann::json& extra = {}) {
    if (batch.empty()) throw DomainError("write_trace_batch: empty batch");
    const std::size_t per_shot = batch.front().samples.size();
    std::filesystem::path bin = stem;
    bin += ".f32";
    std::filesystem::path side = stem;
    side += ".json";
    {
        std::ofstream out(bin, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + bin.string());
        for (const auto& shot : batch) {
            if (shot.samples.size() != per_shot) throw DomainError("write_trace_batch: ragged batch");
            for (float v : shot.samples) {
                std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
                if constexpr (std::endian::native == std::endian::big) {
                    bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
                }
                char bytes[4];
                std::memcpy(bytes, &bits, 4);
                out.write(bytes, 4);
            }
        }
    }
    nlohmann::json shots = nlohmann::json::array();
    for (std::size_t k = 0; k < batch.size(); ++k) {
        shots.push_back({{"index", k},
                         {"seed", batch[k].seed},
                         {"prepared", batch[k].prepared == Spin::kUp ? "up" : "down"}});
    }
    nlohmann::json meta = {
        {"schema", "elzsim.traces/1"},
        {"binary", bin.filename().string()},
        {"dtype", "float32-le"},
        {"n_shots", batch.size()},
        {"samples_per_shot", per_shot},
        {"sample_time_us", batch.front().sample_time_us},
        {"settle_samples", batch.front().settle_samples},
        {"base_seed", base_seed},
        {"params", to_json(p)},
        {"shots", std::move(shots)},
    };
    if (!extra.is_null()) meta["extra"] = extra;
    std::ofstream js(side);
    if (!js) throw std::runtime_error("cannot open " + side.string());
    js << meta.dump(2) << '\n';
}

/// Reads back the samples of a batch written by write_trace_batch.
inline std::vector<std::vector<float>> read_trace_batch(const std::filesystem::path& stem) {
    std::filesystem::path side = stem;
    side += ".json";
    std::ifstream js(side);
    if (!js) throw std::runtime_error("cannot open " + side.string());
    const auto meta = nlohmann::json::parse(js);
    const std::size_t n = meta.at("n_shots").get<std::size_t>();
    const std::size_t per = meta.at("samples_per_shot").get<std::size_t>();
    std::ifstream in(stem.parent_path() / meta.at("binary").get<std::string>(), std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace binary for " + stem.string());
    std::vector<std::vector<float>> out(n, std::vector<float>(per));
    for (auto& shot : out) {
        for (auto& v : shot) {
            unsigned char b[4];
            in.read(reinterpret_cast<char*>(b), 4);
            if (!in) throw BoundsError("trace binary shorter than sidecar declares");
            const std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
                                       (std::uint32_t(b[3]) << 24);
            v = std::bit_cast<float>(bits);
        }
    }
    return out;
}

}  // namespace elzsim
