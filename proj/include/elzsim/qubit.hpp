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
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "elzsim/errors.hpp"
#include "elzsim/fit.hpp"
#include "elzsim/parallel.hpp"
#include "elzsim/rng.hpp"

namespace elzsim {

enum class NoiseModel : std::uint8_t { kNone, kQuasiStatic, kOrnsteinUhlenbeck };

/// Driven spin-1/2 in the rotating frame. Frequencies in MHz, times in µs.
struct QubitParams {
    /// Rabi frequency Ω/2π; a π/2 pulse lasts 1/(4Ω).
    double rabi_frequency_mhz = 2.0;
    double resonance_frequency_ghz = 19.105;  // metadata
    double t2_star_us = 3.2;
    double t2_hahn_us = 139.0;
    NoiseModel noise = NoiseModel::kOrnsteinUhlenbeck;
    /// Standard deviation of the qubit-frequency noise.
    double sigma_f_mhz = 0.0;
    double correlation_time_us = 1e9;
};

inline void validate(const QubitParams& q) {
    if (!(q.rabi_frequency_mhz > 0.0)) throw DomainError("rabi_frequency_mhz must be positive");
    if (!(q.t2_star_us > 0.0) || !(q.t2_hahn_us > 0.0)) throw DomainError("coherence times must be positive");
    if (!(q.t2_star_us <= q.t2_hahn_us)) throw DomainError("t2_star_us must not exceed t2_hahn_us");
    if (!(q.sigma_f_mhz >= 0.0)) throw DomainError("sigma_f_mhz must be non-negative");
    if (q.noise == NoiseModel::kOrnsteinUhlenbeck && !(q.correlation_time_us > 0.0)) {
        throw DomainError("correlation_time_us must be positive");
    }
}

/// Bloch vector. z = +1 is spin-down (the loaded ground state).
struct QubitState {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    static constexpr QubitState down() { return {0.0, 0.0, 1.0}; }
    static constexpr QubitState up() { return {0.0, 0.0, -1.0}; }

    double p_up() const { return 0.5 * (1.0 - z); }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Right-handed rotation of v by `angle` about the unit axis n.
inline QubitState rotate(const QubitState& v, double nx, double ny, double nz, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dot = nx * v.x + ny * v.y + nz * v.z;
    const double cx = ny * v.z - nz * v.y;
    const double cy = nz * v.x - nx * v.z;
    const double cz = nx * v.y - ny * v.x;
    return {v.x * c + cx * s + nx * dot * (1.0 - c), v.y * c + cy * s + ny * dot * (1.0 - c),
            v.z * c + cz * s + nz * dot * (1.0 - c)};
}

/// Constant drive of phase `phase_rad` (0 = +x) at `detuning_mhz`: rotation
/// about (Ω cos φ, Ω sin φ, Δ) by 2π sqrt(Ω² + Δ²) t.
inline QubitState evolve_driven(const QubitState& s, double detuning_mhz, double rabi_mhz, double duration_us,
                                double phase_rad = 0.0) {
    if (!(duration_us >= 0.0)) throw DomainError("evolve_driven: duration must be non-negative");
    const double w = std::hypot(rabi_mhz, detuning_mhz);
    if (w == 0.0 || duration_us == 0.0) return s;
    return rotate(s, rabi_mhz * std::cos(phase_rad) / w, rabi_mhz * std::sin(phase_rad) / w, detuning_mhz / w,
                  2.0 * M_PI * w * duration_us);
}

/// Free precession: rotation about z by 2π ∫ δ dt.
inline QubitState precess(const QubitState& s, double phase_cycles) {
    return rotate(s, 0.0, 0.0, 1.0, 2.0 * M_PI * phase_cycles);
}

/// Closed-form generalised Rabi response from spin-down.
inline double rabi_p_up(double detuning_mhz, double rabi_mhz, double duration_us) {
    const double w2 = rabi_mhz * rabi_mhz + detuning_mhz * detuning_mhz;
    if (w2 == 0.0) return 0.0;
    const double s = std::sin(M_PI * std::sqrt(w2) * duration_us);
    return rabi_mhz * rabi_mhz / w2 * s * s;
}

// ---------------------------------------------------------------------------
// Gates.
// ---------------------------------------------------------------------------

/// Single-qubit primitives: X/Y are π/2 rotations, X2/Y2 are π rotations,
/// I idles for a π/2 duration.
enum class Gate : std::uint8_t { kI, kX, kY, kMinusX, kMinusY, kX2, kY2 };

inline constexpr std::array<Gate, 7> kAllGates = {Gate::kI,      Gate::kX,  Gate::kY, Gate::kMinusX,
                                                  Gate::kMinusY, Gate::kX2, Gate::kY2};

inline constexpr std::string_view gate_name(Gate g) {
    switch (g) {
        case Gate::kI: return "I";
        case Gate::kX: return "X";
        case Gate::kY: return "Y";
        case Gate::kMinusX: return "-X";
        case Gate::kMinusY: return "-Y";
        case Gate::kX2: return "X2";
        case Gate::kY2: return "Y2";
    }
    return "?";
}

inline Gate parse_gate(std::string_view s) {
    for (Gate g : kAllGates) {
        if (gate_name(g) == s) return g;
    }
    if (s == "X^2") return Gate::kX2;
    if (s == "Y^2") return Gate::kY2;
    throw DomainError("unknown gate label: " + std::string(s));
}

inline constexpr bool is_pi_gate(Gate g) { return g == Gate::kX2 || g == Gate::kY2; }

inline double gate_duration_us(Gate g, double rabi_mhz) {
    return is_pi_gate(g) ? 0.5 / rabi_mhz : 0.25 / rabi_mhz;
}

/// Drive phase of a gate; I has no drive.
inline double gate_phase(Gate g) {
    switch (g) {
        case Gate::kX:
        case Gate::kX2: return 0.0;
        case Gate::kY:
        case Gate::kY2: return 0.5 * M_PI;
        case Gate::kMinusX: return M_PI;
        case Gate::kMinusY: return 1.5 * M_PI;
        case Gate::kI: break;
    }
    return 0.0;
}

/// Finite-duration resonant pulse with a frequency offset held for its
/// duration.
inline QubitState apply_gate(const QubitState& s, Gate g, const QubitParams& q, double detuning_mhz) {
    const double t = gate_duration_us(g, q.rabi_frequency_mhz);
    if (g == Gate::kI) return precess(s, detuning_mhz * t);
    return evolve_driven(s, detuning_mhz, q.rabi_frequency_mhz, t, gate_phase(g));
}

/// SO(3) matrix of a gate at a given detuning.
inline Eigen::Matrix3d gate_rotation(Gate g, const QubitParams& q, double detuning_mhz) {
    Eigen::Matrix3d m;
    const QubitState basis[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int c = 0; c < 3; ++c) {
        const QubitState v = apply_gate(basis[c], g, q, detuning_mhz);
        m.col(c) << v.x, v.y, v.z;
    }
    return m;
}

/// Average gate fidelity between two unitaries given as SO(3) matrices:
/// (3 + tr(R_ideal^T R)) / 6.
inline double average_gate_fidelity(const Eigen::Matrix3d& ideal, const Eigen::Matrix3d& actual) {
    return (3.0 + (ideal.transpose() * actual).trace()) / 6.0;
}

// ---------------------------------------------------------------------------
// Frequency noise.
// ---------------------------------------------------------------------------

/// One realisation of the qubit-frequency noise, stepped along a pulse
/// sequence. advance(dt) returns ∫δ dt over the next interval (MHz·µs).
///
/// The OU process is advanced with the exact joint Gaussian law of
/// (δ(t+dt), ∫δ), so no step-size error enters for any dt.
class FrequencyNoise {
public:
    FrequencyNoise(const QubitParams& q, Rng& rng) : q_(q), rng_(&rng) {
        if (q.noise != NoiseModel::kNone && q.sigma_f_mhz > 0.0) delta_ = q.sigma_f_mhz * gauss_();
    }

    double current() const { return delta_; }

    double advance(double dt_us) {
        if (dt_us <= 0.0) return 0.0;
        switch (q_.noise) {
            case NoiseModel::kNone: return 0.0;
            case NoiseModel::kQuasiStatic: return delta_ * dt_us;
            case NoiseModel::kOrnsteinUhlenbeck: break;
        }
        const double sig = q_.sigma_f_mhz;
        if (sig == 0.0) return 0.0;
        const double tau = q_.correlation_time_us;
        const double a = dt_us / tau;
        const double decay = std::exp(-a);
        const double one_minus = -std::expm1(-a);
        const double v_delta = sig * sig * -std::expm1(-2.0 * a);
        const double v_int = sig * sig * tau * tau * integral_variance_factor(a);
        const double cov = sig * sig * tau * one_minus * one_minus;
        const double m_delta = delta_ * decay;
        const double m_int = delta_ * tau * one_minus;
        const double z1 = gauss_(), z2 = gauss_();
        const double sd = std::sqrt(v_delta);
        const double c = sd > 0.0 ? cov / sd : 0.0;
        const double cond = std::max(0.0, v_int - c * c);
        const double integral = m_int + c * z1 + std::sqrt(cond) * z2;
        delta_ = m_delta + sd * z1;
        return integral;
    }

    /// 2a - 3 + 4e^{-a} - e^{-2a}, with its series below a = 1e-2.
    static double integral_variance_factor(double a) {
        if (a < 1e-2) return a * a * a * (2.0 / 3.0 - a / 2.0 + 7.0 * a * a / 30.0 - a * a * a / 12.0);
        return 2.0 * a - 3.0 + 4.0 * std::exp(-a) - std::exp(-2.0 * a);
    }

private:
    double gauss_() { return normal_(*rng_); }

    QubitParams q_;
    Rng* rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double delta_ = 0.0;
};

/// Applies gate g while stepping the noise over its duration.
inline QubitState apply_gate(const QubitState& s, Gate g, const QubitParams& q, FrequencyNoise& noise) {
    const double t = gate_duration_us(g, q.rabi_frequency_mhz);
    const double mean_detuning = noise.advance(t) / t;
    return apply_gate(s, g, q, mean_detuning);
}

// ---------------------------------------------------------------------------
// Coherence experiments.
// ---------------------------------------------------------------------------

/// Analytic dephasing for OU noise: Var of the accumulated phase (cycles²)
/// for a free-induction (Ramsey) or single-echo (Hahn) sequence of total
/// free time t, and the coherence exp(-2π² Var).
struct OuCoherence {
    double sigma_f_mhz;
    double correlation_time_us;

    double ramsey_phase_variance(double t) const {
        const double tau = correlation_time_us;
        return 2.0 * sigma_f_mhz * sigma_f_mhz * tau * tau * ramsey_factor(t / tau);
    }
    double hahn_phase_variance(double t) const {
        const double tau = correlation_time_us;
        return 2.0 * sigma_f_mhz * sigma_f_mhz * tau * tau * hahn_factor(t / tau);
    }
    double ramsey(double t) const { return std::exp(-2.0 * M_PI * M_PI * ramsey_phase_variance(t)); }
    double hahn(double t) const { return std::exp(-2.0 * M_PI * M_PI * hahn_phase_variance(t)); }

    /// x - 1 + e^{-x}
    static double ramsey_factor(double x) {
        if (x < 1e-3) return x * x * (0.5 - x / 6.0 + x * x / 24.0);
        return x - 1.0 + std::exp(-x);
    }
    /// x - 3 + 4e^{-x/2} - e^{-x}
    static double hahn_factor(double x) {
        if (x < 1e-2) return x * x * x * (1.0 / 12.0 - x / 32.0 + 7.0 * x * x / 960.0);
        return x - 3.0 + 4.0 * std::exp(-0.5 * x) - std::exp(-x);
    }

    /// 1/e decay time of a monotone coherence function by bisection.
    template <typename F>
    static double one_over_e_time(F&& coherence, double lo = 1e-6, double hi = 1e9) {
        const double target = std::exp(-1.0);
        for (int i = 0; i < 200; ++i) {
            const double mid = std::sqrt(lo * hi);
            (coherence(mid) > target ? lo : hi) = mid;
            if (hi / lo < 1.0 + 1e-13) break;
        }
        return std::sqrt(lo * hi);
    }
    double ramsey_t2() const { return one_over_e_time([&](double t) { return ramsey(t); }); }
    double hahn_t2() const { return one_over_e_time([&](double t) { return hahn(t); }); }
};

/// Quasi-static Gaussian noise with this sigma gives a Gaussian Ramsey
/// envelope exp(-(t/T2*)^2).
inline double quasi_static_sigma_for_t2_star(double t2_star_us) {
    return std::sqrt(2.0) / (2.0 * M_PI * t2_star_us);
}

/// OU parameters whose analytic Ramsey and Hahn 1/e times equal the
/// targets. Nested bisection: sigma from the Ramsey time at fixed tau,
/// tau from the Hahn time.
inline QubitParams calibrate_ou_noise(QubitParams q) {
    validate(q);
    auto sigma_for = [&](double tau) {
        double lo = 1e-9, hi = 1e3;
        for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-14; ++i) {
            const double mid = std::sqrt(lo * hi);
            const double t2 = OuCoherence{mid, tau}.ramsey_t2();
            (t2 > q.t2_star_us ? lo : hi) = mid;
        }
        return std::sqrt(lo * hi);
    };
    double lo = 1e-3 * q.t2_star_us, hi = 1e9 * q.t2_hahn_us;
    if (OuCoherence{sigma_for(hi), hi}.hahn_t2() < q.t2_hahn_us) {
        throw DomainError("calibrate_ou_noise: Hahn target unreachable for this Ramsey time");
    }
    for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-12; ++i) {
        const double mid = std::sqrt(lo * hi);
        const double t2h = OuCoherence{sigma_for(mid), mid}.hahn_t2();
        (t2h < q.t2_hahn_us ? lo : hi) = mid;
    }
    q.noise = NoiseModel::kOrnsteinUhlenbeck;
    q.correlation_time_us = std::sqrt(lo * hi);
    q.sigma_f_mhz = sigma_for(q.correlation_time_us);
    return q;
}

struct DecayCurve {
    std::vector<double> delays_us;
    std::vector<double> p_up;
    std::vector<double> fit_envelope;  // fitted model at each delay
    double t2_us = 0.0;
    double amplitude = 0.0;  // signed, about 0.5
    double exponent = 2.0;
    bool fit_ok = false;
};

/// Fits p = 0.5 + A exp(-(t/T)^n). The exponent is fixed when
/// `free_exponent` is false.
inline void fit_decay(DecayCurve& c, double exponent, bool free_exponent) {
    const std::size_t n = c.delays_us.size();
    c.fit_envelope.assign(n, 0.5);
    if (n < 3) return;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = c.p_up[i];
    double a0 = y.front() - 0.5;
    if (std::abs(a0) < 1e-6) return;
    // Guess T from the first point below 1/e of the initial amplitude.
    double t0 = c.delays_us.back();
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(y[i] - 0.5) < std::abs(a0) * std::exp(-1.0)) {
            t0 = c.delays_us[i];
            break;
        }
    }
    auto model = [free_exponent](double t, const fit::Params<3>& p, fit::Params<3>* g) {
        const double u = std::max(t, 0.0) / p[1];
        const double un = std::pow(u, p[2]);
        const double e = std::exp(-un);
        if (g) {
            (*g)[0] = e;
            (*g)[1] = p[0] * e * un * p[2] / p[1];
            (*g)[2] = free_exponent && u > 0.0 ? -p[0] * e * un * std::log(u) : 0.0;
        }
        return 0.5 + p[0] * e;
    };
    const double fixed_n = exponent;
    auto project = [&](const fit::Params<3>& p) {
        fit::Params<3> out = p;
        out[1] = std::max(out[1], 1e-9);
        out[2] = free_exponent ? std::clamp(out[2], 0.5, 4.0) : fixed_n;
        return out;
    };
    const auto res =
        fit::levenberg_marquardt<3>(c.delays_us, y, {}, fit::Params<3>(a0, t0, exponent), model, project);
    c.amplitude = res.params[0];
    c.t2_us = res.params[1];
    c.exponent = res.params[2];
    c.fit_ok = res.converged && std::isfinite(c.t2_us);
    for (std::size_t i = 0; i < n; ++i) c.fit_envelope[i] = model(c.delays_us[i], res.params, nullptr);
}

struct ExperimentOptions {
    std::size_t shots = 2000;
    std::uint64_t base_seed = 1;
    unsigned workers = 1;
};

/// π/2 - wait - π/2; each shot is one noise realisation and contributes
/// its exact P↑.
inline DecayCurve run_ramsey(const QubitParams& q, std::span<const double> delays_us, const ExperimentOptions& opt) {
    validate(q);
    for (double d : delays_us) {
        if (!(d > 0.0)) throw DomainError("run_ramsey: delays must be positive");
    }
    DecayCurve c;
    c.delays_us.assign(delays_us.begin(), delays_us.end());
    c.p_up.assign(delays_us.size(), 0.0);
    parallel_for(delays_us.size(), opt.workers, [&](std::size_t i) {
        double sum = 0.0;
        for (std::size_t s = 0; s < opt.shots; ++s) {
            Rng rng = make_rng(opt.base_seed, i * opt.shots + s, stream::kQubit);
            FrequencyNoise noise(q, rng);
            QubitState st = QubitState::down();
            st = apply_gate(st, Gate::kX, q, noise);
            st = precess(st, noise.advance(delays_us[i]));
            st = apply_gate(st, Gate::kX, q, noise);
            sum += st.p_up();
        }
        c.p_up[i] = sum / static_cast<double>(opt.shots);
    });
    fit_decay(c, 2.0, false);
    return c;
}

/// π/2 - τ/2 - π - τ/2 - π/2 under time-correlated noise. Requires the OU
/// model: quasi-static noise refocuses perfectly.
inline DecayCurve run_hahn(const QubitParams& q, std::span<const double> delays_us, const ExperimentOptions& opt) {
    validate(q);
    if (q.noise != NoiseModel::kOrnsteinUhlenbeck) {
        throw DomainError("run_hahn: needs the Ornstein-Uhlenbeck noise model");
    }
    for (double d : delays_us) {
        if (!(d > 0.0)) throw DomainError("run_hahn: delays must be positive");
    }
    DecayCurve c;
    c.delays_us.assign(delays_us.begin(), delays_us.end());
    c.p_up.assign(delays_us.size(), 0.0);
    parallel_for(delays_us.size(), opt.workers, [&](std::size_t i) {
        double sum = 0.0;
        for (std::size_t s = 0; s < opt.shots; ++s) {
            Rng rng = make_rng(opt.base_seed, i * opt.shots + s, stream::kQubit);
            FrequencyNoise noise(q, rng);
            QubitState st = QubitState::down();
            st = apply_gate(st, Gate::kX, q, noise);
            st = precess(st, noise.advance(0.5 * delays_us[i]));
            st = apply_gate(st, Gate::kX2, q, noise);
            st = precess(st, noise.advance(0.5 * delays_us[i]));
            st = apply_gate(st, Gate::kX, q, noise);
            sum += st.p_up();
        }
        c.p_up[i] = sum / static_cast<double>(opt.shots);
    });
    fit_decay(c, 3.0, true);
    return c;
}

struct ChevronPoint {
    double detuning_mhz = 0.0;
    double tau_us = 0.0;
    double p_up = 0.0;
};

/// Rabi chevron from spin-down. With noise the P↑ of each point is
/// averaged over `opt.shots` frequency-noise draws.
inline std::vector<ChevronPoint> run_chevron(const QubitParams& q, std::span<const double> detunings_mhz,
                                             std::span<const double> taus_us, const ExperimentOptions& opt) {
    validate(q);
    std::vector<ChevronPoint> out(detunings_mhz.size() * taus_us.size());
    const bool noisy = q.noise != NoiseModel::kNone && q.sigma_f_mhz > 0.0;
    parallel_for(detunings_mhz.size(), opt.workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < taus_us.size(); ++j) {
            double p = 0.0;
            if (!noisy) {
                p = evolve_driven(QubitState::down(), detunings_mhz[i], q.rabi_frequency_mhz, taus_us[j]).p_up();
            } else {
                for (std::size_t s = 0; s < opt.shots; ++s) {
                    Rng rng = make_rng(opt.base_seed, (i * taus_us.size() + j) * opt.shots + s, stream::kQubit);
                    FrequencyNoise noise(q, rng);
                    const double mean = taus_us[j] > 0.0 ? noise.advance(taus_us[j]) / taus_us[j] : noise.current();
                    p += evolve_driven(QubitState::down(), detunings_mhz[i] + mean, q.rabi_frequency_mhz, taus_us[j])
                             .p_up();
                }
                p /= static_cast<double>(opt.shots);
            }
            out[i * taus_us.size() + j] = {detunings_mhz[i], taus_us[j], p};
        }
    });
    return out;
}

/// Monte Carlo average gate fidelity of one primitive under the frequency
/// noise (quasi-static draw of the stationary distribution per sample).
inline double average_gate_fidelity_under_noise(Gate g, const QubitParams& q, std::size_t samples,
                                                std::uint64_t seed) {
    const Eigen::Matrix3d ideal = gate_rotation(g, q, 0.0);
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        Rng rng = make_rng(seed, s, stream::kQubit);
        FrequencyNoise noise(q, rng);
        const double t = gate_duration_us(g, q.rabi_frequency_mhz);
        sum += average_gate_fidelity(ideal, gate_rotation(g, q, noise.advance(t) / t));
    }
    return sum / static_cast<double>(samples);
}

}  // namespace elzsim
