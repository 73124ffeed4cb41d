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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "elzsim/benchmarking.hpp"
#include "elzsim/errors.hpp"
#include "elzsim/physics.hpp"
#include "elzsim/qubit.hpp"
#include "elzsim/readout.hpp"
#include "elzsim/trace_sim.hpp"

namespace elzsim {

inline constexpr int kConfigSchema = 1;

/// Evenly spaced grid from lo to hi inclusive; hi is kept only if it lies
/// on the step.
struct StepGrid {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::vector<double> values() const {
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
        return v;
    }
};

struct TraceBlock {
    std::size_t n_shots = 20000;
    /// Readout segment simulated per shot; the detection grid may not
    /// reach past it.
    double trace_window_us = 1500.0;
    PreparePattern pattern = PreparePattern::kInterleaved;
    bool thermal_misload = true;
    bool sensor_filter = true;
    bool sensor_noise = true;
};

struct DelaySeries {
    double min_us = 0.0;
    double max_us = 0.0;
    std::size_t points = 0;
    std::size_t shots = 0;

    std::vector<double> values() const {
        std::vector<double> v(points);
        for (std::size_t i = 0; i < points; ++i) {
            v[i] = points == 1 ? min_us
                               : min_us + (max_us - min_us) * static_cast<double>(i) / static_cast<double>(points - 1);
        }
        return v;
    }
};

struct RabiBlock {
    StepGrid detuning_mhz{-4.0, 4.0, 0.1};
    StepGrid tau_us{0.0, 2.0, 0.01};
    std::size_t shots = 1;
};

struct RbBlock {
    RBConfig config;
    std::size_t bootstrap_resamples = 200;
};

struct IrbBlock {
    std::vector<Gate> gates = {Gate::kX, Gate::kX2, Gate::kMinusX, Gate::kY, Gate::kY2, Gate::kMinusY};
};

struct ExperimentConfig {
    int schema = kConfigSchema;
    std::uint64_t base_seed = 2022;
    PhysicalParams physical;
    DetectionConfig detection;
    TraceBlock traces;
    StepGrid grid_threshold{0.16, 0.28, 0.0025};
    StepGrid grid_window_us{50.0, 1500.0, 10.0};
    StepGrid delta_uev{20.0, 60.0, 2.0};
    std::size_t delta_shots_per_point = 4000;
    QubitParams qubit;
    /// sigma_f / correlation time are solved from T2* and T2^H when unset.
    bool calibrate_noise = true;
    RabiBlock rabi;
    DelaySeries ramsey{0.2, 8.0, 40, 2000};
    DelaySeries hahn{5.0, 400.0, 40, 2000};
    RbBlock rb;
    IrbBlock irb;
};

namespace config_detail {

struct Entry {
    std::string value;
    int line = 0;
};

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] inline void fail(const std::string& source, int line, const std::string& what) {
    throw ConfigError(fmt::format("{}:{}: {}", source, line, what));
}

inline double to_double(const std::string& source, const std::string& key, const Entry& e) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        fail(source, e.line, fmt::format("{}: expected a number, got '{}'", key, e.value));
    }
    return v;
}

inline std::uint64_t to_uint(const std::string& source, const std::string& key, const Entry& e) {
    std::uint64_t v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        fail(source, e.line, fmt::format("{}: expected a non-negative integer, got '{}'", key, e.value));
    }
    return v;
}

inline bool to_bool(const std::string& source, const std::string& key, const Entry& e) {
    if (e.value == "true" || e.value == "on" || e.value == "1") return true;
    if (e.value == "false" || e.value == "off" || e.value == "0") return false;
    fail(source, e.line, fmt::format("{}: expected true or false, got '{}'", key, e.value));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

}  // namespace config_detail

/// Parses the sectioned `key = value` format.
///
/// Lines are `[section]`, `key = value` or blank; `#` starts a comment.
/// Keys carry their unit in the name. Unknown keys, duplicates and
/// malformed values are errors reported with their line number; a
/// missing key keeps its default. `schema` must be present at top level.
inline ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>") {
    using namespace config_detail;
    std::map<std::string, Entry> entries;
    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(source, line_no, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) fail(source, line_no, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(source, line_no, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) fail(source, line_no, "missing key before '='");
        if (value.empty()) fail(source, line_no, fmt::format("{}: missing value", key));
        const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (auto it = entries.find(full); it != entries.end()) {
            fail(source, line_no, fmt::format("duplicate key '{}' (first set on line {})", full, it->second.line));
        }
        entries[full] = {std::string(value), line_no};
    }

    ExperimentConfig c;
    auto schema_it = entries.find("schema");
    if (schema_it == entries.end()) fail(source, 1, "missing top-level 'schema' key");
    const auto schema = to_uint(source, "schema", schema_it->second);
    if (schema != kConfigSchema) {
        fail(source, schema_it->second.line, fmt::format("unsupported schema {} (expected {})", schema, kConfigSchema));
    }

    using Setter = std::function<void(const std::string&, const Entry&)>;
    auto num = [&](double& dst) -> Setter {
        return [&dst, &source](const std::string& k, const Entry& e) { dst = to_double(source, k, e); };
    };
    auto count = [&](std::size_t& dst) -> Setter {
        return [&dst, &source](const std::string& k, const Entry& e) { dst = to_uint(source, k, e); };
    };
    auto flag = [&](bool& dst) -> Setter {
        return [&dst, &source](const std::string& k, const Entry& e) { dst = to_bool(source, k, e); };
    };
    std::optional<double> sigma_f, corr_time;
    auto optional_num = [&](std::optional<double>& dst) -> Setter {
        return [&dst, &source](const std::string& k, const Entry& e) {
            if (e.value == "auto") {
                dst.reset();
            } else {
                dst = to_double(source, k, e);
            }
        };
    };

    auto& p = c.physical;
    auto& q = c.qubit;
    auto& rb = c.rb.config;
    const std::map<std::string, Setter> setters = {
        {"schema", [](const std::string&, const Entry&) {}},
        {"base_seed", [&](const std::string& k, const Entry& e) { c.base_seed = to_uint(source, k, e); }},

        {"physical.zeeman_uev", num(p.zeeman_energy_uev)},
        {"physical.electron_temperature_mk", num(p.electron_temperature_mk)},
        {"physical.fermi_offset_uev", num(p.fermi_offset_uev)},
        {"physical.tunnel_rate_hz", num(p.base_tunnel_rate_hz)},
        {"physical.t1_ms", num(p.t1_ms)},
        {"physical.field_mt", num(p.external_field_mt)},
        {"physical.sensor_snr", num(p.sensor_snr)},
        {"physical.sensor_bandwidth_hz", num(p.sensor_bandwidth_hz)},
        {"physical.level_occupied_e2h", num(p.sensor_level_occupied)},
        {"physical.level_empty_e2h", num(p.sensor_level_empty)},
        {"physical.sampling_rate_hz", num(p.sampling_rate_hz)},
        {"physical.settle_us", num(p.settle_time_us)},

        {"detection.threshold_e2h", num(c.detection.threshold)},
        {"detection.read_window_us", num(c.detection.read_window_us)},
        {"detection.blank_us", num(c.detection.blank_time_us)},

        {"traces.n_shots", count(c.traces.n_shots)},
        {"traces.trace_window_us", num(c.traces.trace_window_us)},
        {"traces.pattern",
         [&](const std::string& k, const Entry& e) {
             if (e.value == "interleaved") {
                 c.traces.pattern = PreparePattern::kInterleaved;
             } else if (e.value == "up") {
                 c.traces.pattern = PreparePattern::kAllUp;
             } else if (e.value == "down") {
                 c.traces.pattern = PreparePattern::kAllDown;
             } else {
                 fail(source, e.line, fmt::format("{}: expected interleaved, up or down", k));
             }
         }},
        {"traces.thermal_misload", flag(c.traces.thermal_misload)},
        {"traces.sensor_filter", flag(c.traces.sensor_filter)},
        {"traces.sensor_noise", flag(c.traces.sensor_noise)},

        {"sweep_grid.threshold_min_e2h", num(c.grid_threshold.lo)},
        {"sweep_grid.threshold_max_e2h", num(c.grid_threshold.hi)},
        {"sweep_grid.threshold_step_e2h", num(c.grid_threshold.step)},
        {"sweep_grid.window_min_us", num(c.grid_window_us.lo)},
        {"sweep_grid.window_max_us", num(c.grid_window_us.hi)},
        {"sweep_grid.window_step_us", num(c.grid_window_us.step)},

        {"sweep_delta.delta_min_uev", num(c.delta_uev.lo)},
        {"sweep_delta.delta_max_uev", num(c.delta_uev.hi)},
        {"sweep_delta.delta_step_uev", num(c.delta_uev.step)},
        {"sweep_delta.shots_per_point", count(c.delta_shots_per_point)},

        {"qubit.rabi_mhz", num(q.rabi_frequency_mhz)},
        {"qubit.resonance_ghz", num(q.resonance_frequency_ghz)},
        {"qubit.t2_star_us", num(q.t2_star_us)},
        {"qubit.t2_hahn_us", num(q.t2_hahn_us)},
        {"qubit.noise",
         [&](const std::string& k, const Entry& e) {
             if (e.value == "ou") {
                 q.noise = NoiseModel::kOrnsteinUhlenbeck;
             } else if (e.value == "quasi_static") {
                 q.noise = NoiseModel::kQuasiStatic;
             } else if (e.value == "none") {
                 q.noise = NoiseModel::kNone;
             } else {
                 fail(source, e.line, fmt::format("{}: expected ou, quasi_static or none", k));
             }
         }},
        {"qubit.sigma_f_mhz", optional_num(sigma_f)},
        {"qubit.correlation_time_us", optional_num(corr_time)},

        {"rabi.detuning_min_mhz", num(c.rabi.detuning_mhz.lo)},
        {"rabi.detuning_max_mhz", num(c.rabi.detuning_mhz.hi)},
        {"rabi.detuning_step_mhz", num(c.rabi.detuning_mhz.step)},
        {"rabi.tau_max_us", num(c.rabi.tau_us.hi)},
        {"rabi.tau_step_us", num(c.rabi.tau_us.step)},
        {"rabi.shots", count(c.rabi.shots)},

        {"ramsey.delay_min_us", num(c.ramsey.min_us)},
        {"ramsey.delay_max_us", num(c.ramsey.max_us)},
        {"ramsey.points", count(c.ramsey.points)},
        {"ramsey.shots", count(c.ramsey.shots)},
        {"hahn.delay_min_us", num(c.hahn.min_us)},
        {"hahn.delay_max_us", num(c.hahn.max_us)},
        {"hahn.points", count(c.hahn.points)},
        {"hahn.shots", count(c.hahn.shots)},

        {"rb.lengths",
         [&](const std::string& k, const Entry& e) {
             rb.sequence_lengths.clear();
             for (const auto& item : split_list(e.value)) {
                 rb.sequence_lengths.push_back(to_uint(source, k, Entry{item, e.line}));
             }
         }},
        {"rb.sequences_per_length", count(rb.sequences_per_length)},
        {"rb.shots_per_sequence", count(rb.shots_per_sequence)},
        {"rb.readout",
         [&](const std::string& k, const Entry& e) {
             if (e.value == "ideal") {
                 rb.readout_channel = ReadoutChannel::kIdeal;
             } else if (e.value == "pipeline") {
                 rb.readout_channel = ReadoutChannel::kTracePipeline;
             } else {
                 fail(source, e.line, fmt::format("{}: expected ideal or pipeline", k));
             }
         }},
        {"rb.depolarizing_per_clifford", num(rb.depolarizing_per_clifford)},
        {"rb.bootstrap_resamples", count(c.rb.bootstrap_resamples)},

        {"irb.gates",
         [&](const std::string& k, const Entry& e) {
             c.irb.gates.clear();
             for (const auto& item : split_list(e.value)) {
                 try {
                     c.irb.gates.push_back(parse_gate(item));
                 } catch (const DomainError& err) {
                     fail(source, e.line, fmt::format("{}: {}", k, err.what()));
                 }
             }
         }},
        {"irb.depolarizing_interleaved", num(rb.depolarizing_interleaved)},
    };

    for (const auto& [key, entry] : entries) {
        const auto it = setters.find(key);
        if (it == setters.end()) fail(source, entry.line, fmt::format("unknown key '{}'", key));
        it->second(key, entry);
    }
    c.calibrate_noise = !sigma_f && !corr_time;
    if (sigma_f.has_value() != corr_time.has_value()) {
        fail(source, entries.count("qubit.sigma_f_mhz") ? entries["qubit.sigma_f_mhz"].line
                                                         : entries["qubit.correlation_time_us"].line,
             "qubit.sigma_f_mhz and qubit.correlation_time_us must both be set or both be auto");
    }
    if (sigma_f) {
        q.sigma_f_mhz = *sigma_f;
        q.correlation_time_us = *corr_time;
    }
    return c;
}

/// Checks every block against its module's invariants. Diagnostics name
/// the block; the first violation wins.
inline void validate(const ExperimentConfig& c) {
    auto guard = [](const char* block, auto&& fn) {
        try {
            fn();
        } catch (const DomainError& e) {
            throw ConfigError(fmt::format("[{}] {}", block, e.what()));
        }
    };
    guard("physical", [&] { validate(c.physical); });
    guard("detection", [&] { validate(c.detection); });
    guard("traces", [&] {
        if (c.traces.n_shots == 0) throw DomainError("n_shots must be positive");
        if (!(c.traces.trace_window_us + c.physical.settle_time_us >= c.detection.read_window_us)) {
            throw DomainError("trace_window_us plus settle_us must cover detection.read_window_us");
        }
    });
    auto check_grid = [](const StepGrid& g, const char* name) {
        if (!(g.step > 0.0) || !(g.hi >= g.lo)) {
            throw DomainError(fmt::format("{}: need step > 0 and max >= min", name));
        }
    };
    guard("sweep_grid", [&] {
        check_grid(c.grid_threshold, "threshold");
        check_grid(c.grid_window_us, "window");
        if (!(c.grid_window_us.lo > c.detection.blank_time_us)) {
            throw DomainError("window_min_us must exceed detection.blank_us");
        }
        if (c.grid_window_us.hi > c.traces.trace_window_us + c.physical.settle_time_us) {
            throw DomainError("window_max_us reaches past the simulated trace");
        }
    });
    guard("sweep_delta", [&] {
        check_grid(c.delta_uev, "delta");
        if (!(c.delta_uev.lo > 0.0) || !(c.delta_uev.hi < c.physical.zeeman_energy_uev)) {
            throw DomainError("offsets must lie strictly between 0 and zeeman_uev");
        }
        if (c.delta_shots_per_point < 2) throw DomainError("shots_per_point must be at least 2");
    });
    guard("qubit", [&] { validate(c.qubit); });
    guard("rabi", [&] {
        check_grid(c.rabi.detuning_mhz, "detuning");
        check_grid(c.rabi.tau_us, "tau");
        if (c.rabi.shots == 0) throw DomainError("shots must be positive");
    });
    auto check_series = [](const DelaySeries& s) {
        if (!(s.min_us > 0.0) || !(s.max_us > s.min_us)) throw DomainError("need 0 < delay_min_us < delay_max_us");
        if (s.points < 3) throw DomainError("points must be at least 3");
        if (s.shots == 0) throw DomainError("shots must be positive");
    };
    guard("ramsey", [&] { check_series(c.ramsey); });
    guard("hahn", [&] { check_series(c.hahn); });
    guard("rb", [&] {
        validate(c.rb.config);
        if (c.rb.config.sequence_lengths.size() < 3) throw DomainError("need at least three lengths to fit");
        if (c.rb.bootstrap_resamples != 0 && c.rb.bootstrap_resamples < 100) {
            throw DomainError("bootstrap_resamples must be 0 or at least 100");
        }
    });
    guard("irb", [&] {
        if (c.irb.gates.empty()) throw DomainError("gates must not be empty");
    });
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path));
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig c = parse_config(ss.str(), path);
    validate(c);
    return c;
}

/// Qubit parameters actually simulated: calibrated when requested.
inline QubitParams resolved_qubit(const ExperimentConfig& c) {
    if (c.calibrate_noise && c.qubit.noise == NoiseModel::kOrnsteinUhlenbeck) {
        return calibrate_ou_noise(c.qubit);
    }
    if (c.calibrate_noise && c.qubit.noise == NoiseModel::kQuasiStatic) {
        QubitParams q = c.qubit;
        q.sigma_f_mhz = quasi_static_sigma_for_t2_star(q.t2_star_us);
        return q;
    }
    return c.qubit;
}

/// Canonical text of a resolved config. Parsing it back yields the same
/// config, and its hash identifies a run.
inline std::string to_config_text(const ExperimentConfig& c) {
    std::string s;
    auto kv = [&](std::string_view k, const auto& v) { s += fmt::format("{} = {}\n", k, v); };
    auto kd = [&](std::string_view k, double v) { s += fmt::format("{} = {:.17g}\n", k, v); };
    auto kb = [&](std::string_view k, bool v) { kv(k, v ? "true" : "false"); };
    const auto& p = c.physical;
    kv("schema", c.schema);
    kv("base_seed", c.base_seed);
    s += "\n[physical]\n";
    kd("zeeman_uev", p.zeeman_energy_uev);
    kd("electron_temperature_mk", p.electron_temperature_mk);
    kd("fermi_offset_uev", p.fermi_offset_uev);
    kd("tunnel_rate_hz", p.base_tunnel_rate_hz);
    kd("t1_ms", p.t1_ms);
    kd("field_mt", p.external_field_mt);
    kd("sensor_snr", p.sensor_snr);
    kd("sensor_bandwidth_hz", p.sensor_bandwidth_hz);
    kd("level_occupied_e2h", p.sensor_level_occupied);
    kd("level_empty_e2h", p.sensor_level_empty);
    kd("sampling_rate_hz", p.sampling_rate_hz);
    kd("settle_us", p.settle_time_us);
    s += "\n[detection]\n";
    kd("threshold_e2h", c.detection.threshold);
    kd("read_window_us", c.detection.read_window_us);
    kd("blank_us", c.detection.blank_time_us);
    s += "\n[traces]\n";
    kv("n_shots", c.traces.n_shots);
    kd("trace_window_us", c.traces.trace_window_us);
    kv("pattern", c.traces.pattern == PreparePattern::kInterleaved ? "interleaved"
                  : c.traces.pattern == PreparePattern::kAllUp      ? "up"
                                                                     : "down");
    kb("thermal_misload", c.traces.thermal_misload);
    kb("sensor_filter", c.traces.sensor_filter);
    kb("sensor_noise", c.traces.sensor_noise);
    s += "\n[sweep_grid]\n";
    kd("threshold_min_e2h", c.grid_threshold.lo);
    kd("threshold_max_e2h", c.grid_threshold.hi);
    kd("threshold_step_e2h", c.grid_threshold.step);
    kd("window_min_us", c.grid_window_us.lo);
    kd("window_max_us", c.grid_window_us.hi);
    kd("window_step_us", c.grid_window_us.step);
    s += "\n[sweep_delta]\n";
    kd("delta_min_uev", c.delta_uev.lo);
    kd("delta_max_uev", c.delta_uev.hi);
    kd("delta_step_uev", c.delta_uev.step);
    kv("shots_per_point", c.delta_shots_per_point);
    s += "\n[qubit]\n";
    kd("rabi_mhz", c.qubit.rabi_frequency_mhz);
    kd("resonance_ghz", c.qubit.resonance_frequency_ghz);
    kd("t2_star_us", c.qubit.t2_star_us);
    kd("t2_hahn_us", c.qubit.t2_hahn_us);
    kv("noise", c.qubit.noise == NoiseModel::kOrnsteinUhlenbeck ? "ou"
                : c.qubit.noise == NoiseModel::kQuasiStatic     ? "quasi_static"
                                                                : "none");
    if (c.calibrate_noise) {
        kv("sigma_f_mhz", "auto");
        kv("correlation_time_us", "auto");
    } else {
        kd("sigma_f_mhz", c.qubit.sigma_f_mhz);
        kd("correlation_time_us", c.qubit.correlation_time_us);
    }
    s += "\n[rabi]\n";
    kd("detuning_min_mhz", c.rabi.detuning_mhz.lo);
    kd("detuning_max_mhz", c.rabi.detuning_mhz.hi);
    kd("detuning_step_mhz", c.rabi.detuning_mhz.step);
    kd("tau_max_us", c.rabi.tau_us.hi);
    kd("tau_step_us", c.rabi.tau_us.step);
    kv("shots", c.rabi.shots);
    for (const auto& [name, series] : {std::pair{"ramsey", &c.ramsey}, std::pair{"hahn", &c.hahn}}) {
        s += fmt::format("\n[{}]\n", name);
        kd("delay_min_us", series->min_us);
        kd("delay_max_us", series->max_us);
        kv("points", series->points);
        kv("shots", series->shots);
    }
    s += "\n[rb]\n";
    std::string lengths;
    for (auto m : c.rb.config.sequence_lengths) lengths += (lengths.empty() ? "" : ", ") + std::to_string(m);
    kv("lengths", lengths);
    kv("sequences_per_length", c.rb.config.sequences_per_length);
    kv("shots_per_sequence", c.rb.config.shots_per_sequence);
    kv("readout", c.rb.config.readout_channel == ReadoutChannel::kIdeal ? "ideal" : "pipeline");
    kd("depolarizing_per_clifford", c.rb.config.depolarizing_per_clifford);
    kv("bootstrap_resamples", c.rb.bootstrap_resamples);
    s += "\n[irb]\n";
    std::string gates;
    for (Gate g : c.irb.gates) gates += (gates.empty() ? "" : ", ") + std::string(gate_name(g));
    kv("gates", gates);
    kd("depolarizing_interleaved", c.rb.config.depolarizing_interleaved);
    return s;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
    return fmt::format("{:016x}", fnv1a64(to_config_text(c)));
}

}  // namespace elzsim
