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
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "elzsim/benchmarking.hpp"
#include "elzsim/config.hpp"
#include "elzsim/physics.hpp"
#include "elzsim/qubit.hpp"
#include "elzsim/readout.hpp"
#include "elzsim/trace_sim.hpp"

// Subcommand runners shared by the command-line tool and the tests. Each
// runner writes its artifacts as soon as they are complete, so a later
// failure leaves earlier files in place.

namespace elzsim {

enum class OutputFormat { kCsv, kJson };

struct RunContext {
    ExperimentConfig config;
    unsigned workers = 1;
    std::filesystem::path out_dir = ".";
    OutputFormat format = OutputFormat::kCsv;
    std::ostream* log = nullptr;  // human-readable summary, optional
};

/// Turns off every stochastic error source: qubit frequency noise,
/// injected depolarization, sensor noise, and readout SPAM in RB.
inline void apply_noise_off(ExperimentConfig& c) {
    c.qubit.noise = NoiseModel::kNone;
    c.qubit.sigma_f_mhz = 0.0;
    c.calibrate_noise = false;
    c.traces.sensor_noise = false;
    c.rb.config.depolarizing_per_clifford = 1.0;
    c.rb.config.depolarizing_interleaved = 1.0;
    c.rb.config.readout_channel = ReadoutChannel::kIdeal;
}

namespace io {

inline std::string num(double v) { return fmt::format("{:.10g}", v); }

inline std::string csv_preamble(const ExperimentConfig& c, std::string_view command) {
    return fmt::format("# elzsim {} config_hash={} seed={}\n", command, config_hash(c), c.base_seed);
}

inline nlohmann::json json_preamble(const ExperimentConfig& c, std::string_view command) {
    return {{"command", command}, {"config_hash", config_hash(c)}, {"seed", c.base_seed},
            {"config", to_config_text(c)}};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << bytes;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

inline nlohmann::json to_json(const FidelityEstimate& f) {
    return {{"f_up", f.f_up},     {"f_down", f.f_down},   {"visibility", f.visibility},
            {"ci_up", f.ci_up},   {"ci_down", f.ci_down}, {"f_measurement", f.f_measurement},
            {"n_up", f.n_up},     {"n_down", f.n_down}};
}

inline nlohmann::json to_json(const RBDecayFit& f) {
    return {{"amplitude", f.amplitude},
            {"decay", f.decay},
            {"offset", f.offset},
            {"decay_sigma", f.decay_sigma},
            {"clifford_fidelity", f.clifford_fidelity},
            {"clifford_fidelity_sigma", f.clifford_fidelity_sigma},
            {"gate_fidelity", f.gate_fidelity},
            {"gate_fidelity_sigma", f.gate_fidelity_sigma},
            {"generators_per_clifford", f.generators_per_clifford},
            {"converged", f.converged}};
}

inline std::string curve_csv(const ExperimentConfig& c, std::string_view cmd, const std::vector<RbCurvePoint>& curve) {
    std::string s = csv_preamble(c, cmd) + "m,mean_p_up,scatter_std,n_sequences\n";
    for (const auto& p : curve) s += fmt::format("{},{},{},{}\n", p.m, num(p.mean_p_up), num(p.scatter_std), p.n_sequences);
    return s;
}

inline nlohmann::json curve_json(const std::vector<RbCurvePoint>& curve) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : curve) {
        a.push_back({{"m", p.m}, {"mean_p_up", p.mean_p_up}, {"scatter_std", p.scatter_std}, {"n_sequences", p.n_sequences}});
    }
    return a;
}

}  // namespace io

inline std::filesystem::path artifact_path(const RunContext& ctx, std::string_view stem) {
    return ctx.out_dir / fmt::format("{}.{}", stem, ctx.format == OutputFormat::kCsv ? "csv" : "json");
}

// ---------------------------------------------------------------------------

struct BudgetReport {
    RateSet rates;
    ErrorBudget budget;
    KeithReport keith;
};

inline BudgetReport compute_budget(const ExperimentConfig& c) {
    BudgetReport r;
    r.rates = derive_rates(c.physical);
    r.budget = predict_budget(c.physical, r.rates, c.detection.read_window_us, c.physical.sample_time_us());
    r.keith = keith_conditions(c.physical, r.rates);
    return r;
}

inline std::string format_budget_table(const BudgetReport& r) {
    std::string s;
    s += fmt::format("{:<24} {:>12}\n", "t_up_out_us", io::num(units::rate_to_time_us(r.rates.up_out)));
    s += fmt::format("{:<24} {:>12}\n", "t_down_in_us", io::num(units::rate_to_time_us(r.rates.down_in)));
    s += fmt::format("{:<24} {:>11.4f}%\n", "relaxation_loss", 100.0 * r.budget.relaxation_loss);
    s += fmt::format("{:<24} {:>11.4f}%\n", "missed_bump", 100.0 * r.budget.missed_bump);
    s += fmt::format("{:<24} {:>11.4f}%\n", "thermal_escape", 100.0 * r.budget.thermal_escape);
    s += fmt::format("{:<24} {:>11.4f}%\n", "predicted_f_up", 100.0 * r.budget.predicted_f_up);
    s += fmt::format("{:<24} {:>11.4f}%\n", "predicted_f_down", 100.0 * r.budget.predicted_f_down);
    s += fmt::format("{:<24} {:>11.4f}%\n", "predicted_visibility", 100.0 * r.budget.predicted_visibility);
    for (const auto& k : r.keith) {
        s += fmt::format("{:<24} {:>12} >= {:<6} {}\n", k.name, io::num(k.ratio), io::num(k.threshold),
                         k.pass ? "PASS" : "FAIL");
    }
    return s;
}

inline void run_budget_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const BudgetReport r = compute_budget(c);
    if (ctx.log) *ctx.log << format_budget_table(r);
    if (ctx.format == OutputFormat::kCsv) {
        std::string s = io::csv_preamble(c, "budget") + "quantity,value,threshold,pass\n";
        auto row = [&](std::string_view q, double v) { s += fmt::format("{},{},,\n", q, io::num(v)); };
        row("t_up_out_us", units::rate_to_time_us(r.rates.up_out));
        row("t_down_in_us", units::rate_to_time_us(r.rates.down_in));
        row("relaxation_loss", r.budget.relaxation_loss);
        row("missed_bump", r.budget.missed_bump);
        row("thermal_escape", r.budget.thermal_escape);
        row("predicted_f_up", r.budget.predicted_f_up);
        row("predicted_f_down", r.budget.predicted_f_down);
        row("predicted_visibility", r.budget.predicted_visibility);
        for (const auto& k : r.keith) {
            s += fmt::format("{},{},{},{}\n", k.name, io::num(k.ratio), io::num(k.threshold), k.pass ? "true" : "false");
        }
        io::write_file(artifact_path(ctx, "budget"), s);
    } else {
        nlohmann::json j = io::json_preamble(c, "budget");
        j["rates_hz"] = {{"up_out", r.rates.up_out}, {"down_in", r.rates.down_in}, {"down_out", r.rates.down_out},
                         {"up_in", r.rates.up_in},   {"relax", r.rates.relax}};
        j["budget"] = {{"relaxation_loss", r.budget.relaxation_loss},
                       {"missed_bump", r.budget.missed_bump},
                       {"thermal_escape", r.budget.thermal_escape},
                       {"predicted_f_up", r.budget.predicted_f_up},
                       {"predicted_f_down", r.budget.predicted_f_down},
                       {"predicted_visibility", r.budget.predicted_visibility}};
        nlohmann::json keith = nlohmann::json::array();
        for (const auto& k : r.keith) {
            keith.push_back({{"name", k.name}, {"ratio", k.ratio}, {"threshold", k.threshold}, {"pass", k.pass}});
        }
        j["keith"] = keith;
        io::write_json(artifact_path(ctx, "budget"), j);
    }
}

// ---------------------------------------------------------------------------

inline std::vector<ShotTrace> generate_config_batch(const ExperimentConfig& c, unsigned workers) {
    BatchSpec spec;
    spec.n_shots = c.traces.n_shots;
    spec.pattern = c.traces.pattern;
    spec.base_seed = c.base_seed;
    spec.read_window_us = c.traces.trace_window_us;
    spec.options.thermal_misload = c.traces.thermal_misload;
    spec.options.render.filter = c.traces.sensor_filter;
    spec.options.render.noise = c.traces.sensor_noise;
    return generate_batch(c.physical, spec, workers);
}

inline void run_traces_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto batch = generate_config_batch(c, ctx.workers);
    write_trace_batch(ctx.out_dir / "traces", batch, c.physical, c.base_seed,
                      {{"config_hash", config_hash(c)}, {"config", to_config_text(c)}});
    const auto est = score_batch(batch, c.detection);
    if (ctx.log) {
        *ctx.log << fmt::format("wrote {} shots; at threshold {} and window {} us: F_up {:.4f}% F_down {:.4f}% V {:.4f}%\n",
                                batch.size(), c.detection.threshold, c.detection.read_window_us, 100 * est.f_up,
                                100 * est.f_down, 100 * est.visibility);
    }
}

inline GridSweep run_grid_sweep(const ExperimentConfig& c, unsigned workers) {
    const auto batch = generate_config_batch(c, workers);
    return sweep_threshold_window(batch, c.grid_threshold.values(), c.grid_window_us.values(), c.detection.blank_time_us,
                                  polarity_of(c.physical), workers);
}

inline void run_sweep_grid_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const GridSweep g = run_grid_sweep(c, ctx.workers);
    const auto& best = g.best();
    const double g_best = g.thresholds[g.best_threshold];
    const double t_best = g.windows_us[g.best_window];
    nlohmann::json summary = {{"best_threshold_e2h", g_best}, {"best_window_us", t_best}, {"best", io::to_json(best)}};
    if (ctx.format == OutputFormat::kCsv) {
        std::string s = io::csv_preamble(c, "sweep-grid") + "g_thr,t_r_us,f_up,f_down,visibility\n";
        for (std::size_t i = 0; i < g.thresholds.size(); ++i) {
            for (std::size_t j = 0; j < g.windows_us.size(); ++j) {
                const auto& e = g.at(i, j);
                s += fmt::format("{},{},{},{},{}\n", io::num(g.thresholds[i]), io::num(g.windows_us[j]), io::num(e.f_up),
                                 io::num(e.f_down), io::num(e.visibility));
            }
        }
        io::write_file(artifact_path(ctx, "sweep_grid"), s);
        nlohmann::json j = io::json_preamble(c, "sweep-grid");
        j.update(summary);
        io::write_json(ctx.out_dir / "sweep_grid_summary.json", j);
    } else {
        nlohmann::json j = io::json_preamble(c, "sweep-grid");
        j.update(summary);
        nlohmann::json cells = nlohmann::json::array();
        for (std::size_t i = 0; i < g.thresholds.size(); ++i) {
            for (std::size_t k = 0; k < g.windows_us.size(); ++k) {
                const auto& e = g.at(i, k);
                cells.push_back({g.thresholds[i], g.windows_us[k], e.f_up, e.f_down, e.visibility});
            }
        }
        j["columns"] = {"g_thr", "t_r_us", "f_up", "f_down", "visibility"};
        j["cells"] = cells;
        io::write_json(artifact_path(ctx, "sweep_grid"), j);
    }
    if (ctx.log) {
        *ctx.log << fmt::format("optimum threshold {} e2/h, window {} us: F_up {:.4f}% F_down {:.4f}% V {:.4f}%\n",
                                io::num(g_best), io::num(t_best), 100 * best.f_up, 100 * best.f_down,
                                100 * best.visibility);
    }
}

inline DeltaSweep run_delta_sweep(const ExperimentConfig& c, unsigned workers) {
    DeltaSweepOptions opt;
    opt.thresholds = c.grid_threshold.values();
    opt.windows_us = c.grid_window_us.values();
    opt.shots_per_point = c.delta_shots_per_point;
    opt.blank_time_us = c.detection.blank_time_us;
    opt.base_seed = c.base_seed;
    opt.workers = workers;
    opt.shot.thermal_misload = c.traces.thermal_misload;
    opt.shot.render.filter = c.traces.sensor_filter;
    opt.shot.render.noise = c.traces.sensor_noise;
    return sweep_delta(c.physical, c.delta_uev.values(), opt);
}

inline void run_sweep_delta_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const DeltaSweep d = run_delta_sweep(c, ctx.workers);
    if (ctx.format == OutputFormat::kCsv) {
        std::string s = io::csv_preamble(c, "sweep-delta") + "delta_uev,f_up,f_down,visibility,ci_up,ci_down,g_thr,t_r_us\n";
        for (const auto& p : d.points) {
            s += fmt::format("{},{},{},{},{},{},{},{}\n", io::num(p.delta_uev), io::num(p.best.f_up),
                             io::num(p.best.f_down), io::num(p.best.visibility), io::num(p.best.ci_up),
                             io::num(p.best.ci_down), io::num(p.threshold), io::num(p.window_us));
        }
        io::write_file(artifact_path(ctx, "sweep_delta"), s);
    } else {
        nlohmann::json j = io::json_preamble(c, "sweep-delta");
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : d.points) {
            pts.push_back({{"delta_uev", p.delta_uev}, {"best", io::to_json(p.best)}, {"g_thr", p.threshold},
                           {"t_r_us", p.window_us}});
        }
        j["points"] = pts;
        j["best_delta_uev"] = d.points[d.best].delta_uev;
        io::write_json(artifact_path(ctx, "sweep_delta"), j);
    }
    if (ctx.log) {
        const auto& b = d.points[d.best];
        *ctx.log << fmt::format("best offset {} ueV: V {:.4f}%\n", io::num(b.delta_uev), 100 * b.best.visibility);
    }
}

// ---------------------------------------------------------------------------

inline void run_rabi_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const QubitParams q = resolved_qubit(c);
    const auto pts = run_chevron(q, c.rabi.detuning_mhz.values(), c.rabi.tau_us.values(),
                                 {c.rabi.shots, c.base_seed, ctx.workers});
    if (ctx.format == OutputFormat::kCsv) {
        std::string s = io::csv_preamble(c, "rabi") + "detuning_mhz,tau_us,p_up\n";
        for (const auto& p : pts) s += fmt::format("{},{},{}\n", io::num(p.detuning_mhz), io::num(p.tau_us), io::num(p.p_up));
        io::write_file(artifact_path(ctx, "rabi"), s);
    } else {
        nlohmann::json j = io::json_preamble(c, "rabi");
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& p : pts) rows.push_back({p.detuning_mhz, p.tau_us, p.p_up});
        j["columns"] = {"detuning_mhz", "tau_us", "p_up"};
        j["rows"] = rows;
        io::write_json(artifact_path(ctx, "rabi"), j);
    }
    if (ctx.log) *ctx.log << fmt::format("wrote {} chevron points\n", pts.size());
}

inline void write_decay(const RunContext& ctx, std::string_view cmd, std::string_view stem, const DecayCurve& d,
                        const QubitParams& q) {
    const auto& c = ctx.config;
    nlohmann::json fit = {{"t2_us", d.t2_us},
                          {"amplitude", d.amplitude},
                          {"exponent", d.exponent},
                          {"fit_ok", d.fit_ok},
                          {"sigma_f_mhz", q.sigma_f_mhz},
                          {"correlation_time_us", q.correlation_time_us}};
    if (ctx.format == OutputFormat::kCsv) {
        std::string s = io::csv_preamble(c, cmd) + "delay_us,p_up,fit_envelope\n";
        for (std::size_t i = 0; i < d.delays_us.size(); ++i) {
            s += fmt::format("{},{},{}\n", io::num(d.delays_us[i]), io::num(d.p_up[i]), io::num(d.fit_envelope[i]));
        }
        io::write_file(artifact_path(ctx, stem), s);
        nlohmann::json j = io::json_preamble(c, cmd);
        j["fit"] = fit;
        io::write_json(ctx.out_dir / fmt::format("{}_summary.json", stem), j);
    } else {
        nlohmann::json j = io::json_preamble(c, cmd);
        j["fit"] = fit;
        j["delays_us"] = d.delays_us;
        j["p_up"] = d.p_up;
        j["fit_envelope"] = d.fit_envelope;
        io::write_json(artifact_path(ctx, stem), j);
    }
    if (ctx.log) {
        *ctx.log << fmt::format("{}: T2 = {} us (exponent {}){}\n", cmd, io::num(d.t2_us), io::num(d.exponent),
                                d.fit_ok ? "" : " [fit did not converge]");
    }
    if (!d.fit_ok) throw FitError(fmt::format("{}: decay fit did not converge; raw points written", cmd));
}

inline void run_ramsey_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const QubitParams q = resolved_qubit(c);
    const auto d = run_ramsey(q, c.ramsey.values(), {c.ramsey.shots, c.base_seed, ctx.workers});
    write_decay(ctx, "ramsey", "ramsey", d, q);
}

inline void run_hahn_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const QubitParams q = resolved_qubit(c);
    const auto d = run_hahn(q, c.hahn.values(), {c.hahn.shots, c.base_seed, ctx.workers});
    write_decay(ctx, "hahn", "hahn", d, q);
}

// ---------------------------------------------------------------------------

inline RbReadout readout_of(const ExperimentConfig& c) { return {c.physical, c.detection}; }

inline void run_rb_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const QubitParams q = resolved_qubit(c);
    const RbReadout ro = readout_of(c);
    const RbRunOptions opt{c.base_seed, ctx.workers, c.rb.bootstrap_resamples};
    RbResult r;
    r.data = collect_rb(c.rb.config, q, &ro, opt);
    const auto curve = summarize(r.data);
    // Raw points go out before the fit so they survive a fit failure.
    if (ctx.format == OutputFormat::kCsv) io::write_file(artifact_path(ctx, "rb"), io::curve_csv(c, "rb", curve));
    r.fit = analyze_rb(r.data, opt.bootstrap_resamples, opt.base_seed);
    nlohmann::json j = io::json_preamble(c, "rb");
    j["fit"] = io::to_json(r.fit);
    if (ctx.format == OutputFormat::kCsv) {
        io::write_json(ctx.out_dir / "rb_summary.json", j);
    } else {
        j["curve"] = io::curve_json(curve);
        io::write_json(artifact_path(ctx, "rb"), j);
    }
    if (ctx.log) {
        *ctx.log << fmt::format("p = {} +- {}  A = {}  B = {}  F_clifford = {:.4f}%  F_gate = {:.4f}%\n",
                                io::num(r.fit.decay), io::num(r.fit.decay_sigma), io::num(r.fit.amplitude),
                                io::num(r.fit.offset), 100 * r.fit.clifford_fidelity, 100 * r.fit.gate_fidelity);
    }
    if (!r.fit.converged) throw FitError("rb: decay fit did not converge; raw points written");
}

inline void run_irb_command(const RunContext& ctx) {
    const auto& c = ctx.config;
    const QubitParams q = resolved_qubit(c);
    const RbReadout ro = readout_of(c);
    const std::size_t resamples = std::max<std::size_t>(c.rb.bootstrap_resamples, 100);
    const RbRunOptions opt{c.base_seed, ctx.workers, resamples};
    RBConfig ref_cfg = c.rb.config;
    ref_cfg.interleaved_gate.reset();
    const RbResult ref = run_rb(ref_cfg, q, &ro, opt);

    std::string csv = io::csv_preamble(c, "irb") +
                      "gate,p_ref,p_int,decay_ratio,gate_fidelity,gate_fidelity_sigma,unphysical_ordering\n";
    nlohmann::json j = io::json_preamble(c, "irb");
    j["reference"] = io::to_json(ref.fit);
    j["reference"]["curve"] = io::curve_json(ref.fit.curve);
    j["gates"] = nlohmann::json::array();
    for (Gate g : c.irb.gates) {
        const IrbResult r = run_irb(ref_cfg, g, q, &ro, opt, &ref);
        csv += fmt::format("{},{},{},{},{},{},{}\n", gate_name(g), io::num(ref.fit.decay), io::num(r.interleaved.fit.decay),
                           io::num(r.decay_ratio), io::num(r.gate_fidelity), io::num(r.gate_fidelity_sigma),
                           r.unphysical_ordering ? "true" : "false");
        nlohmann::json gj = {{"gate", gate_name(g)},
                             {"interleaved", io::to_json(r.interleaved.fit)},
                             {"decay_ratio", r.decay_ratio},
                             {"gate_fidelity", r.gate_fidelity},
                             {"gate_fidelity_sigma", r.gate_fidelity_sigma},
                             {"unphysical_ordering", r.unphysical_ordering}};
        gj["interleaved"]["curve"] = io::curve_json(r.interleaved.fit.curve);
        j["gates"].push_back(gj);
        // Rewritten after every gate so finished gates survive a later failure.
        if (ctx.format == OutputFormat::kCsv) {
            io::write_file(artifact_path(ctx, "irb"), csv);
            io::write_json(ctx.out_dir / "irb_summary.json", j);
        } else {
            io::write_json(artifact_path(ctx, "irb"), j);
        }
        if (ctx.log) {
            *ctx.log << fmt::format("{:<3} F = {:.4f}% +- {:.4f}%{}\n", gate_name(g), 100 * r.gate_fidelity,
                                    100 * r.gate_fidelity_sigma,
                                    r.unphysical_ordering ? "  [warning: p_int > p_ref beyond CI]" : "");
        }
    }
}

using CommandFn = void (*)(const RunContext&);

struct CommandInfo {
    std::string_view name;
    std::string_view help;
    CommandFn run;
};

inline constexpr std::array<CommandInfo, 9> kCommands = {{
    {"budget", "closed-form error budget and tunnel-rate margins", run_budget_command},
    {"sweep-delta", "visibility versus Fermi offset", run_sweep_delta_command},
    {"sweep-grid", "fidelities over threshold and read window", run_sweep_grid_command},
    {"rabi", "Rabi chevron", run_rabi_command},
    {"ramsey", "Ramsey decay and T2*", run_ramsey_command},
    {"hahn", "Hahn-echo decay and T2^H", run_hahn_command},
    {"rb", "Clifford randomized benchmarking", run_rb_command},
    {"irb", "interleaved randomized benchmarking", run_irb_command},
    {"traces", "simulated single-shot traces (float32 + JSON sidecar)", run_traces_command},
}};

}  // namespace elzsim
