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

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "elzsim/errors.hpp"
#include "elzsim/units.hpp"

namespace elzsim {

/// Device and readout-chain parameters for Elzerman readout of one dot.
///
/// Defaults are the operating point of a 28Si/SiGe single-spin device:
/// E_Z = 79 µeV at 410 mT, T_e = 45 mK, T1 = 31.5 ms, a 1 MHz / 1 MS/s
/// sensing chain with SNR 12.5, and tunnel rates of ~20 kHz.
struct PhysicalParams {
    double zeeman_energy_uev = 79.0;
    double electron_temperature_mk = 45.0;
    /// Depth of the spin-down level below the reservoir Fermi level.
    double fermi_offset_uev = 39.5;
    /// Barrier-set total tunnel rate Γ0.
    double base_tunnel_rate_hz = 20e3;
    double t1_ms = 31.5;
    /// Metadata only; nothing is derived from the field.
    double external_field_mt = 410.0;
    double sensor_snr = 12.5;
    /// -3 dB corner of the single-pole sensing channel.
    double sensor_bandwidth_hz = 1e6;
    double sensor_level_occupied = 0.15;  // e^2/h
    double sensor_level_empty = 0.29;     // e^2/h
    double sampling_rate_hz = 1e6;
    double settle_time_us = 10.0;

    double sample_time_us() const { return 1e6 / sampling_rate_hz; }
    double thermal_energy_uev() const { return units::thermal_energy_uev(electron_temperature_mk); }
    double level_separation() const { return std::abs(sensor_level_empty - sensor_level_occupied); }
    double noise_sigma() const { return level_separation() / sensor_snr; }
};

/// Throws DomainError naming the first violated invariant.
inline void validate(const PhysicalParams& p) {
    auto require_positive = [](double v, std::string_view name) {
        if (!(v > 0.0)) {
            throw DomainError(std::string(name) + " must be strictly positive");
        }
    };
    require_positive(p.zeeman_energy_uev, "zeeman_energy_uev");
    require_positive(p.electron_temperature_mk, "electron_temperature_mk");
    require_positive(p.fermi_offset_uev, "fermi_offset_uev");
    require_positive(p.base_tunnel_rate_hz, "base_tunnel_rate_hz");
    require_positive(p.t1_ms, "t1_ms");
    require_positive(p.external_field_mt, "external_field_mt");
    require_positive(p.sensor_snr, "sensor_snr");
    require_positive(p.sensor_bandwidth_hz, "sensor_bandwidth_hz");
    require_positive(p.sampling_rate_hz, "sampling_rate_hz");
    require_positive(p.settle_time_us, "settle_time_us");
    if (!(p.fermi_offset_uev < p.zeeman_energy_uev)) {
        throw DomainError("fermi_offset_uev must lie below zeeman_energy_uev so both spin levels straddle the Fermi level");
    }
    if (!std::isfinite(p.sensor_level_empty) || !std::isfinite(p.sensor_level_occupied) ||
        p.sensor_level_empty == p.sensor_level_occupied) {
        throw DomainError("sensor_level_empty and sensor_level_occupied must be finite and distinct");
    }
}

/// Tunnel and relaxation rates of the three-state charge/spin machine.
struct RateSet {
    double up_out = 0.0;    // UP -> EMPTY
    double down_in = 0.0;   // EMPTY -> DOWN
    double down_out = 0.0;  // DOWN -> EMPTY, thermal escape
    double up_in = 0.0;     // EMPTY -> UP, thermal mis-load
    double relax = 0.0;     // UP -> DOWN, 1/T1
};

struct ErrorBudget {
    double relaxation_loss = 0.0;
    double missed_bump = 0.0;
    double thermal_escape = 0.0;
    double predicted_f_up = 1.0;
    double predicted_f_down = 1.0;
    double predicted_visibility = 1.0;
};

struct KeithCondition {
    std::string_view name;
    double ratio = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// Zeeman/temperature, T1/tunnel-out and sampling/reload margins, in that order.
using KeithReport = std::array<KeithCondition, 3>;

/// Occupation of a reservoir state at `energy_uev` above the Fermi level.
inline double fermi_occupation(double energy_uev, double temperature_mk) {
    if (!(temperature_mk > 0.0)) {
        throw DomainError("fermi_occupation: temperature must be positive");
    }
    const double x = energy_uev / units::thermal_energy_uev(temperature_mk);
    // Evaluate on the decaying branch so neither tail overflows.
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

inline double zeeman_convert(double frequency_ghz) {
    return units::kPlanckUeVPerGhz * frequency_ghz;
}

/// Single-orbital golden-rule rates with one spin-independent Γ0.
///
/// The spin-down level sits at -Δ and the spin-up level at E_Z - Δ relative
/// to the Fermi level; tunnelling in needs a filled reservoir state at the
/// level energy, tunnelling out an empty one.
inline RateSet derive_rates(const PhysicalParams& p) {
    validate(p);
    const double gamma = p.base_tunnel_rate_hz;
    const double t = p.electron_temperature_mk;
    const double up_level = p.zeeman_energy_uev - p.fermi_offset_uev;
    const double down_level = -p.fermi_offset_uev;
    RateSet r;
    r.up_out = gamma * fermi_occupation(-up_level, t);  // 1 - f(E_Z - Δ)
    r.up_in = gamma * fermi_occupation(up_level, t);
    r.down_in = gamma * fermi_occupation(down_level, t);
    r.down_out = gamma * fermi_occupation(-down_level, t);  // 1 - f(-Δ)
    r.relax = 1.0 / (p.t1_ms * 1e-3);
    return r;
}

inline KeithReport keith_conditions(const PhysicalParams& p, const RateSet& r) {
    KeithReport report{{
        {"zeeman_over_kT", p.zeeman_energy_uev / p.thermal_energy_uev(), 13.0, false},
        {"t1_over_t_up_out", p.t1_ms * 1e-3 * r.up_out, 100.0, false},
        {"sampling_over_reload", p.sampling_rate_hz / r.down_in, 12.0, false},
    }};
    for (auto& c : report) c.pass = c.ratio >= c.threshold;
    return report;
}

/// Spin-up information lost to T1 while the electron waits to tunnel out
/// and while the readout level settles.
inline double relaxation_error(double t_up_out_us, double settle_time_us, double t1_ms) {
    return -std::expm1(-(t_up_out_us + settle_time_us) / units::ms_to_us(t1_ms));
}

/// Probability that a spin bump falls between detection points.
///
/// With R_up = t_s/t_up_out and R_down = t_s/t_down_in the detection
/// probability is
///   R_up (1 - e^{(R_up - R_down)/2}) / ((1 - e^{R_up/2}) (R_up - R_down)),
/// written with expm1 so the R_up == R_down diagonal takes its limit
/// continuously.
namespace detail {
inline double missed_bump_core(double a, double b) {
    if (a == 0.0) return 0.0;
    const double d = a - b;
    const double expm1_ratio = std::abs(d) < 1e-8 ? 1.0 + 0.5 * d : std::expm1(d) / d;
    const double detect = a * expm1_ratio / std::expm1(a);
    const double miss = 1.0 - detect;
    return miss < 0.0 ? 0.0 : (miss > 1.0 ? 1.0 : miss);
}

inline void check_bump_args(double t_up_out_us, double t_down_in_us, double sample_time_us) {
    if (!(t_up_out_us > 0.0) || !(t_down_in_us > 0.0) || !(sample_time_us >= 0.0)) {
        throw DomainError("missed_bump_probability: times must be positive");
    }
}
}  // namespace detail

inline double missed_bump_probability(double t_up_out_us, double t_down_in_us, double sample_time_us) {
    detail::check_bump_args(t_up_out_us, t_down_in_us, sample_time_us);
    return detail::missed_bump_core(0.5 * sample_time_us / t_up_out_us, 0.5 * sample_time_us / t_down_in_us);
}

/// Exact miss probability for a noiseless detector that looks at the
/// occupancy at t = k t_s, k >= 1, with the bump starting at t = 0.
///
/// A bump is missed when tunnel-out and reload land in the same sampling
/// interval. Summing that over intervals gives the expression above with
/// R in place of R/2, so this equals missed_bump_probability at twice the
/// sample time. The half-interval form undercounts misses by about a
/// factor of two when R is small.
inline double sampled_missed_bump_probability(double t_up_out_us, double t_down_in_us, double sample_time_us) {
    detail::check_bump_args(t_up_out_us, t_down_in_us, sample_time_us);
    return detail::missed_bump_core(sample_time_us / t_up_out_us, sample_time_us / t_down_in_us);
}

/// A spin-down electron escaping thermally within the read window,
/// with t_down_out = t_down_in exp(E_Z / 2 k_B T_e).
inline double thermal_escape_probability(double t_down_in_us, double zeeman_uev, double temperature_mk,
                                         double read_window_us) {
    if (!(t_down_in_us > 0.0) || !(temperature_mk > 0.0) || !(read_window_us >= 0.0)) {
        throw DomainError("thermal_escape_probability: arguments must be positive");
    }
    const double t_down_out = t_down_in_us * std::exp(zeeman_uev / (2.0 * units::thermal_energy_uev(temperature_mk)));
    return -std::expm1(-read_window_us / t_down_out);
}

inline ErrorBudget predict_budget(const PhysicalParams& p, const RateSet& r, double read_window_us,
                                  double sample_time_us) {
    const double t_up_out = units::rate_to_time_us(r.up_out);
    const double t_down_in = units::rate_to_time_us(r.down_in);
    ErrorBudget b;
    b.relaxation_loss = relaxation_error(t_up_out, p.settle_time_us, p.t1_ms);
    b.missed_bump = missed_bump_probability(t_up_out, t_down_in, sample_time_us);
    b.thermal_escape =
        thermal_escape_probability(t_down_in, p.zeeman_energy_uev, p.electron_temperature_mk, read_window_us);
    b.predicted_f_up = 1.0 - b.relaxation_loss - b.missed_bump;
    b.predicted_f_down = 1.0 - b.thermal_escape;
    b.predicted_visibility = b.predicted_f_up + b.predicted_f_down - 1.0;
    return b;
}

}  // namespace elzsim
