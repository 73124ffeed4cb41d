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
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "elzsim/errors.hpp"
#include "elzsim/fit.hpp"
#include "elzsim/parallel.hpp"
#include "elzsim/physics.hpp"
#include "elzsim/rng.hpp"
#include "elzsim/trace_sim.hpp"

namespace elzsim {

// ---------------------------------------------------------------------------
// Charge-sensor histogram: two-component Gaussian mixture.
// ---------------------------------------------------------------------------

struct DoubleGaussianFit {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double weight1 = 0.5;
    double snr = 0.0;
    double log_likelihood = 0.0;
    std::size_t iterations = 0;
};

struct MixtureOptions {
    double relative_tolerance = 1e-9;
    std::size_t max_iterations = 10000;
};

/// Maximum-likelihood mixture by EM. Initialised at the 15th/85th
/// percentiles with both widths set to the overall standard deviation, so
/// the result is a deterministic function of the data.
template <std::floating_point T>
DoubleGaussianFit fit_double_gaussian(std::span<const T> samples, const MixtureOptions& opt = {}) {
    const std::size_t n = samples.size();
    if (n < 1000) throw DomainError("fit_double_gaussian: need at least 1000 samples");

    std::vector<double> sorted(samples.begin(), samples.end());
    auto quantile = [&](double q) {
        const auto k = static_cast<std::ptrdiff_t>(q * static_cast<double>(n - 1));
        std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
        return sorted[static_cast<std::size_t>(k)];
    };
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : sorted) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);

    // Work in centred coordinates for the moment sums.
    double mu1 = quantile(0.15) - mean;
    double mu2 = quantile(0.85) - mean;
    if (!(mu2 > mu1) || !(var > 0.0)) {
        throw DegenerateFitError("fit_double_gaussian: data do not separate into two components");
    }
    double v1 = var, v2 = var, w1 = 0.5;
    const double var_floor = 1e-12 * var;

    double prev_ll = -std::numeric_limits<double>::infinity();
    DoubleGaussianFit out;
    for (out.iterations = 1; out.iterations <= opt.max_iterations; ++out.iterations) {
        const double la = std::log(w1) - 0.5 * std::log(v1);
        const double lb = std::log1p(-w1) - 0.5 * std::log(v2);
        const double ia = 0.5 / v1, ib = 0.5 / v2;
        double ll = 0.0, s1 = 0.0, s1x = 0.0, s1xx = 0.0, sx = 0.0, sxx = 0.0;
        for (T raw : samples) {
            const double x = static_cast<double>(raw) - mean;
            const double a = la - (x - mu1) * (x - mu1) * ia;
            const double b = lb - (x - mu2) * (x - mu2) * ib;
            const double m = std::max(a, b);
            const double ea = std::exp(a - m), eb = std::exp(b - m);
            const double r1 = ea / (ea + eb);
            ll += m + std::log(ea + eb);
            s1 += r1;
            s1x += r1 * x;
            s1xx += r1 * x * x;
            sx += x;
            sxx += x * x;
        }
        const double nn = static_cast<double>(n);
        const double s2 = nn - s1, s2x = sx - s1x, s2xx = sxx - s1xx;
        if (s1 <= 0.0 || s2 <= 0.0) {
            throw DegenerateFitError("fit_double_gaussian: one component lost all weight");
        }
        w1 = std::clamp(s1 / nn, 1e-12, 1.0 - 1e-12);
        mu1 = s1x / s1;
        mu2 = s2x / s2;
        v1 = std::max(s1xx / s1 - mu1 * mu1, var_floor);
        v2 = std::max(s2xx / s2 - mu2 * mu2, var_floor);
        ll -= 0.5 * nn * std::log(2.0 * M_PI);
        out.log_likelihood = ll;
        if (std::abs(ll - prev_ll) < opt.relative_tolerance * std::abs(ll)) break;
        prev_ll = ll;
    }
    if (mu1 > mu2) {
        std::swap(mu1, mu2);
        std::swap(v1, v2);
        w1 = 1.0 - w1;
    }
    out.mu1 = mu1 + mean;
    out.mu2 = mu2 + mean;
    out.sigma1 = std::sqrt(v1);
    out.sigma2 = std::sqrt(v2);
    out.weight1 = w1;
    const double pooled = 0.5 * (out.sigma1 + out.sigma2);
    if (!(out.mu2 - out.mu1 > pooled)) {
        throw DegenerateFitError("fit_double_gaussian: component means lie within one pooled sigma");
    }
    out.snr = (out.mu2 - out.mu1) / pooled;
    return out;
}

// ---------------------------------------------------------------------------
// Threshold detection and fidelity scoring.
// ---------------------------------------------------------------------------

/// Which side of the threshold the EMPTY (spin bump) level sits on.
enum class Polarity : std::uint8_t { kEmptyAbove, kEmptyBelow };

inline Polarity polarity_of(const PhysicalParams& p) {
    return p.sensor_level_empty > p.sensor_level_occupied ? Polarity::kEmptyAbove : Polarity::kEmptyBelow;
}

struct DetectionConfig {
    double threshold = 0.22;  // e^2/h
    double read_window_us = 670.0;
    double blank_time_us = 10.0;
    Polarity polarity = Polarity::kEmptyAbove;
};

inline void validate(const DetectionConfig& c) {
    if (!(c.blank_time_us >= 0.0)) throw DomainError("blank_time_us must be non-negative");
    if (!(c.read_window_us > c.blank_time_us)) throw DomainError("read_window_us must exceed blank_time_us");
    if (!std::isfinite(c.threshold)) throw DomainError("threshold must be finite");
}

/// Sample indices [first, last] whose times k*t_s lie in (blank, window].
inline std::pair<std::size_t, std::size_t> window_indices(std::size_t n_samples, double sample_time_us,
                                                          double blank_us, double window_us) {
    if (window_us > static_cast<double>(n_samples) * sample_time_us + 1e-9) {
        throw BoundsError("read window extends past the end of the trace");
    }
    const auto first = static_cast<std::size_t>(std::floor(blank_us / sample_time_us + 1e-9)) + 1;
    auto last = static_cast<std::size_t>(std::floor(window_us / sample_time_us + 1e-9));
    last = std::min(last, n_samples - 1);
    return {first, last};
}

inline bool on_empty_side(double v, double threshold, Polarity pol) {
    return pol == Polarity::kEmptyAbove ? v > threshold : v < threshold;
}

inline Spin detect_spin(std::span<const float> samples, double sample_time_us, const DetectionConfig& cfg) {
    validate(cfg);
    if (samples.empty()) throw BoundsError("detect_spin: empty trace");
    const auto [first, last] = window_indices(samples.size(), sample_time_us, cfg.blank_time_us, cfg.read_window_us);
    for (std::size_t k = first; k <= last; ++k) {
        if (on_empty_side(samples[k], cfg.threshold, cfg.polarity)) return Spin::kUp;
    }
    return Spin::kDown;
}

inline Spin detect_spin(const ShotTrace& trace, const DetectionConfig& cfg) {
    return detect_spin(trace.samples, trace.sample_time_us, cfg);
}

struct ShotOutcome {
    Spin prepared = Spin::kDown;
    Spin detected = Spin::kDown;
};

struct FidelityEstimate {
    double f_up = 0.0;
    double f_down = 0.0;
    double visibility = 0.0;
    double f_measurement = 0.0;
    double ci_up = 0.0;  // one-sigma binomial half-widths
    double ci_down = 0.0;
    std::size_t n_up = 0;
    std::size_t n_down = 0;
};

inline double binomial_sigma(double f, std::size_t n) {
    return std::sqrt(f * (1.0 - f) / static_cast<double>(n));
}

inline FidelityEstimate fidelity_from_counts(std::size_t up_correct, std::size_t n_up, std::size_t down_correct,
                                             std::size_t n_down) {
    if (n_up == 0 || n_down == 0) {
        throw DomainError("score_fidelities: need shots of both prepared states");
    }
    FidelityEstimate e;
    e.n_up = n_up;
    e.n_down = n_down;
    e.f_up = static_cast<double>(up_correct) / static_cast<double>(n_up);
    e.f_down = static_cast<double>(down_correct) / static_cast<double>(n_down);
    e.visibility = e.f_up + e.f_down - 1.0;
    e.f_measurement = 0.5 * (e.f_up + e.f_down);
    e.ci_up = binomial_sigma(e.f_up, n_up);
    e.ci_down = binomial_sigma(e.f_down, n_down);
    return e;
}

inline FidelityEstimate score_fidelities(std::span<const ShotOutcome> shots) {
    std::size_t n_up = 0, n_down = 0, up_ok = 0, down_ok = 0;
    for (const auto& s : shots) {
        if (s.prepared == Spin::kUp) {
            ++n_up;
            up_ok += s.detected == Spin::kUp;
        } else {
            ++n_down;
            down_ok += s.detected == Spin::kDown;
        }
    }
    return fidelity_from_counts(up_ok, n_up, down_ok, n_down);
}

inline FidelityEstimate score_batch(std::span<const ShotTrace> batch, const DetectionConfig& cfg) {
    std::vector<ShotOutcome> outcomes;
    outcomes.reserve(batch.size());
    for (const auto& shot : batch) outcomes.push_back({shot.prepared, detect_spin(shot, cfg)});
    return score_fidelities(outcomes);
}

// ---------------------------------------------------------------------------
// Dwell-time extraction.
// ---------------------------------------------------------------------------

struct DwellSample {
    double duration_us = 0.0;
    bool censored = false;
};

struct DwellFit {
    double rate_hz = 0.0;
    double ci_hz = 0.0;
    std::size_t n_events = 0;  // all intervals, censored included
    std::size_t censored = 0;
};

/// Exponential rate from right-censored dwells:
/// rate = (#uncensored) / (total observed time), sigma = rate / sqrt(#uncensored).
inline DwellFit censored_exponential_mle(std::span<const DwellSample> dwells) {
    DwellFit f;
    double exposure_us = 0.0;
    for (const auto& d : dwells) {
        exposure_us += d.duration_us;
        ++f.n_events;
        f.censored += d.censored;
    }
    const std::size_t observed = f.n_events - f.censored;
    if (observed == 0 || !(exposure_us > 0.0)) {
        throw InsufficientDataError("dwell fit: no uncensored events");
    }
    f.rate_hz = static_cast<double>(observed) / units::us_to_s(exposure_us);
    f.ci_hz = f.rate_hz / std::sqrt(static_cast<double>(observed));
    return f;
}

/// Two-level hysteresis around the midpoint of the sensor levels.
struct Hysteresis {
    double level_occupied = 0.15;
    double level_empty = 0.29;
    /// Entry/exit thresholds sit at midpoint +/- fraction * |gap|.
    double fraction = 0.25;

    static Hysteresis from(const PhysicalParams& p, double fraction = 0.25) {
        return {p.sensor_level_occupied, p.sensor_level_empty, fraction};
    }
};

struct DwellSegments {
    std::vector<DwellSample> tunnel_out;  // window start -> first EMPTY entry
    std::vector<DwellSample> empty;       // EMPTY excursion lengths
};

/// Segments one trace inside (blank, window] and appends its intervals.
inline void segment_dwells(std::span<const float> samples, double sample_time_us, const DetectionConfig& cfg,
                           const Hysteresis& h, DwellSegments& out) {
    const auto [first, last] = window_indices(samples.size(), sample_time_us, cfg.blank_time_us, cfg.read_window_us);
    const double mid = 0.5 * (h.level_occupied + h.level_empty);
    const double dir = h.level_empty > h.level_occupied ? 1.0 : -1.0;
    const double half = h.fraction * std::abs(h.level_empty - h.level_occupied);
    const double enter = mid + dir * half;
    const double leave = mid - dir * half;

    const double start = cfg.blank_time_us;
    const double end = static_cast<double>(last) * sample_time_us;
    bool empty = false;
    bool seen_entry = false;
    double entered_at = 0.0;
    for (std::size_t k = first; k <= last; ++k) {
        const double v = samples[k];
        const double t = static_cast<double>(k) * sample_time_us;
        if (!empty && dir * (v - enter) > 0.0) {
            empty = true;
            entered_at = t;
            if (!seen_entry) {
                out.tunnel_out.push_back({t - start, false});
                seen_entry = true;
            }
        } else if (empty && dir * (v - leave) < 0.0) {
            empty = false;
            out.empty.push_back({t - entered_at, false});
        }
    }
    if (!seen_entry) out.tunnel_out.push_back({end - start, true});
    if (empty) out.empty.push_back({end - entered_at, true});
}

/// Fits (tunnel-out-like, reload-like) rates from a collection of traces.
inline std::pair<DwellFit, DwellFit> extract_dwell_rates(std::span<const ShotTrace> traces, const DetectionConfig& cfg,
                                                         const Hysteresis& h) {
    validate(cfg);
    DwellSegments seg;
    for (const auto& t : traces) segment_dwells(t.samples, t.sample_time_us, cfg, h, seg);
    return {censored_exponential_mle(seg.tunnel_out), censored_exponential_mle(seg.empty)};
}

// ---------------------------------------------------------------------------
// Threshold / window optimisation.
// ---------------------------------------------------------------------------

struct GridSweep {
    std::vector<double> thresholds;
    std::vector<double> windows_us;
    std::vector<FidelityEstimate> cells;  // row-major: [threshold][window]
    std::size_t best_threshold = 0;
    std::size_t best_window = 0;

    const FidelityEstimate& at(std::size_t i, std::size_t j) const { return cells[i * windows_us.size() + j]; }
    const FidelityEstimate& best() const { return at(best_threshold, best_window); }
};

/// Scores every (threshold, window) cell from one pass over the traces:
/// each trace is reduced to its extreme value inside every window, after
/// which a cell is a comparison per trace.
inline GridSweep sweep_threshold_window(std::span<const ShotTrace> batch, std::span<const double> thresholds,
                                        std::span<const double> windows_us, double blank_time_us, Polarity polarity,
                                        unsigned workers = 1) {
    if (thresholds.empty() || windows_us.empty()) throw DomainError("sweep_threshold_window: empty grid");
    const std::size_t nt = thresholds.size(), nw = windows_us.size();
    const double sign = polarity == Polarity::kEmptyAbove ? 1.0 : -1.0;

    // extremes[s * nw + j]: signed max of trace s inside window j.
    std::vector<double> extremes(batch.size() * nw);
    parallel_for(batch.size(), workers, [&](std::size_t s) {
        const auto& tr = batch[s];
        std::vector<std::pair<std::size_t, std::size_t>> ranges(nw);
        for (std::size_t j = 0; j < nw; ++j) {
            if (!(windows_us[j] > blank_time_us)) throw DomainError("window must exceed blank time");
            ranges[j] = window_indices(tr.samples.size(), tr.sample_time_us, blank_time_us, windows_us[j]);
        }
        std::size_t max_last = 0;
        for (const auto& r : ranges) max_last = std::max(max_last, r.second);
        const std::size_t first = ranges.front().first;
        std::vector<double> running(max_last + 1, -std::numeric_limits<double>::infinity());
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t k = first; k <= max_last; ++k) {
            m = std::max(m, sign * static_cast<double>(tr.samples[k]));
            running[k] = m;
        }
        for (std::size_t j = 0; j < nw; ++j) {
            const auto [lo, hi] = ranges[j];
            extremes[s * nw + j] = hi >= lo ? running[hi] : -std::numeric_limits<double>::infinity();
        }
    });

    std::vector<std::size_t> up_ok(nt * nw, 0), down_ok(nt * nw, 0);
    std::size_t n_up = 0, n_down = 0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const bool up = batch[s].prepared == Spin::kUp;
        (up ? n_up : n_down) += 1;
        for (std::size_t i = 0; i < nt; ++i) {
            const double g = sign * thresholds[i];
            for (std::size_t j = 0; j < nw; ++j) {
                const bool detected_up = extremes[s * nw + j] > g;
                if (up && detected_up) ++up_ok[i * nw + j];
                if (!up && !detected_up) ++down_ok[i * nw + j];
            }
        }
    }

    GridSweep out;
    out.thresholds.assign(thresholds.begin(), thresholds.end());
    out.windows_us.assign(windows_us.begin(), windows_us.end());
    out.cells.reserve(nt * nw);
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nw; ++j) {
            out.cells.push_back(fidelity_from_counts(up_ok[i * nw + j], n_up, down_ok[i * nw + j], n_down));
            if (out.cells.back().visibility > best_v) {
                best_v = out.cells.back().visibility;
                out.best_threshold = i;
                out.best_window = j;
            }
        }
    }
    return out;
}

struct DeltaSweepOptions {
    std::vector<double> thresholds;
    std::vector<double> windows_us;
    std::size_t shots_per_point = 2000;
    double blank_time_us = 10.0;
    std::uint64_t base_seed = 1;
    unsigned workers = 1;
    ShotOptions shot;
};

struct DeltaPoint {
    double delta_uev = 0.0;
    FidelityEstimate best;
    double threshold = 0.0;
    double window_us = 0.0;
};

struct DeltaSweep {
    std::vector<DeltaPoint> points;
    std::size_t best = 0;
};

/// For each Fermi offset: rates, an interleaved batch, and the best
/// (threshold, window) cell.
inline DeltaSweep sweep_delta(const PhysicalParams& params, std::span<const double> deltas_uev,
                              const DeltaSweepOptions& opt) {
    if (deltas_uev.empty()) throw DomainError("sweep_delta: empty grid");
    if (opt.windows_us.empty() || opt.thresholds.empty()) throw DomainError("sweep_delta: empty detection grid");
    const double max_window = *std::max_element(opt.windows_us.begin(), opt.windows_us.end());
    DeltaSweep out;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < deltas_uev.size(); ++i) {
        PhysicalParams p = params;
        p.fermi_offset_uev = deltas_uev[i];
        if (!(p.fermi_offset_uev > 0.0 && p.fermi_offset_uev < p.zeeman_energy_uev)) {
            throw DomainError("sweep_delta: offsets must lie in (0, E_Z)");
        }
        BatchSpec spec;
        spec.n_shots = opt.shots_per_point;
        spec.base_seed = derive_seed(opt.base_seed, i, stream::kReadout);
        spec.read_window_us = max_window;
        spec.options = opt.shot;
        const auto batch = generate_batch(p, spec, opt.workers);
        const auto grid =
            sweep_threshold_window(batch, opt.thresholds, opt.windows_us, opt.blank_time_us, polarity_of(p), opt.workers);
        DeltaPoint pt{deltas_uev[i], grid.best(), grid.thresholds[grid.best_threshold],
                      grid.windows_us[grid.best_window]};
        if (pt.best.visibility > best_v) {
            best_v = pt.best.visibility;
            out.best = i;
        }
        out.points.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Electron temperature from a thermally broadened charge transition.
// ---------------------------------------------------------------------------

struct OccupancyPoint {
    double energy_uev = 0.0;  // dot level relative to an arbitrary origin
    double occupancy = 0.0;   // mean electron number, 0..1
};

struct TemperatureFit {
    double temperature_mk = 0.0;
    double ci_mk = 0.0;
    double center_uev = 0.0;
    double center_ci_uev = 0.0;
};

/// Least-squares fit of n(e) = 1 / (1 + exp((e - e0) / k_B T)).
inline TemperatureFit fit_electron_temperature(std::span<const OccupancyPoint> curve) {
    if (curve.size() < 3) throw FitError("fit_electron_temperature: need at least three points");
    std::vector<OccupancyPoint> pts(curve.begin(), curve.end());
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.energy_uev < b.energy_uev; });

    bool above = false, below = false;
    for (const auto& p : pts) {
        above |= p.occupancy > 0.5;
        below |= p.occupancy < 0.5;
    }
    if (!above || !below) throw FitError("fit_electron_temperature: occupancy curve does not cross 0.5");

    // Initial centre: first 0.5 crossing; initial width from the 10-90 % span.
    auto crossing = [&](double level) {
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double a = pts[i - 1].occupancy - level, b = pts[i].occupancy - level;
            if ((a >= 0.0) != (b >= 0.0)) {
                return pts[i - 1].energy_uev + a / (a - b) * (pts[i].energy_uev - pts[i - 1].energy_uev);
            }
        }
        return 0.5 * (pts.front().energy_uev + pts.back().energy_uev);
    };
    const double e0 = crossing(0.5);
    double width = (crossing(0.1) - crossing(0.9)) / (2.0 * std::log(9.0));
    if (!std::isfinite(width) || std::abs(width) < 1e-9) {
        width = 0.05 * (pts.back().energy_uev - pts.front().energy_uev);
    }

    std::vector<double> x, y;
    for (const auto& p : pts) {
        x.push_back(p.energy_uev);
        y.push_back(p.occupancy);
    }
    auto model = [](double e, const fit::Params<2>& th, fit::Params<2>* g) {
        const double z = (e - th[0]) / th[1];
        const double s = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
        const double ds_dz = -s * (1.0 - s);
        if (g) {
            (*g)[0] = ds_dz * (-1.0 / th[1]);
            (*g)[1] = ds_dz * (-z / th[1]);
        }
        return s;
    };
    const auto res = fit::levenberg_marquardt<2>(x, y, {}, fit::Params<2>(e0, width), model);
    const double kt = std::abs(res.params[1]);
    if (!res.converged || !std::isfinite(kt) || kt == 0.0) throw FitError("fit_electron_temperature: did not converge");
    const double s2 = res.reduced_chi2(x.size());
    TemperatureFit out;
    out.temperature_mk = kt / units::kBoltzmannUeVPerMk;
    out.ci_mk = std::sqrt(std::max(0.0, res.covariance(1, 1) * s2)) / units::kBoltzmannUeVPerMk;
    out.center_uev = res.params[0];
    out.center_ci_uev = std::sqrt(std::max(0.0, res.covariance(0, 0) * s2));
    return out;
}

}  // namespace elzsim
