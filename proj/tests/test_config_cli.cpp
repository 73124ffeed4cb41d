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


#include "elzsim/config.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "nlohmann/json.hpp"

using namespace elzsim;
namespace fs = std::filesystem;

namespace {

const std::string kPaperCfg = std::string(ELZSIM_SOURCE_DIR) + "/configs/paper.cfg";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// paper.cfg with `key = value` lines replaced (matched on the bare key).
std::string paper_with(const std::map<std::string, std::string>& overrides) {
    std::string text = slurp(kPaperCfg);
    for (const auto& [k, v] : overrides) {
        const std::regex re("(^|\n)" + k + " *=[^\n]*");
        EXPECT_TRUE(std::regex_search(text, re)) << k;
        text = std::regex_replace(text, re, "$1" + k + " = " + v);
    }
    return text;
}

std::string expect_config_error(const std::string& text) {
    try {
        validate(parse_config(text, "t.cfg"));
    } catch (const ConfigError& e) {
        return e.what();
    }
    ADD_FAILURE() << "no ConfigError for:\n" << text;
    return {};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("elzsim_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path_ / name, std::ios::binary) << text;
        return path_ / name;
    }

private:
    fs::path path_;
};

#ifdef ELZSIM_CLI
int run_cli(const std::string& args) {
    const std::string cmd = std::string(ELZSIM_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Small RB block so CLI runs finish in seconds.
std::map<std::string, std::string> small_rb() {
    return {{"lengths", "1, 4, 16, 64"},
            {"sequences_per_length", "5"},
            {"shots_per_sequence", "10"},
            {"readout", "ideal"},
            {"bootstrap_resamples", "100"}};
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}
#endif

}  // namespace

TEST(Config, paper_config_loads) {
    const ExperimentConfig c = load_config(kPaperCfg);
    EXPECT_EQ(c.base_seed, 2022u);
    EXPECT_DOUBLE_EQ(c.physical.zeeman_energy_uev, 79.0);
    EXPECT_DOUBLE_EQ(c.physical.electron_temperature_mk, 45.0);
    EXPECT_DOUBLE_EQ(c.physical.t1_ms, 31.5);
    EXPECT_DOUBLE_EQ(c.detection.threshold, 0.22);
    EXPECT_DOUBLE_EQ(c.detection.read_window_us, 670.0);
    EXPECT_EQ(c.rb.config.sequence_lengths.back(), 4096u);
    EXPECT_EQ(c.rb.config.readout_channel, ReadoutChannel::kTracePipeline);
    EXPECT_EQ(c.irb.gates.size(), 6u);
    EXPECT_TRUE(c.calibrate_noise);
    const QubitParams q = resolved_qubit(c);
    EXPECT_GT(q.sigma_f_mhz, 0.0);
    EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, errors_carry_source_and_line) {
    EXPECT_THAT(expect_config_error("schema = 1\n[physical]\nbogus = 3\n"), ::testing::HasSubstr("t.cfg:3:"));
    EXPECT_THAT(expect_config_error("schema = 1\n\n[physical]\nt1_ms = 1\nt1_ms = 2\n"),
                ::testing::AllOf(::testing::HasSubstr("t.cfg:5:"), ::testing::HasSubstr("duplicate")));
    EXPECT_THAT(expect_config_error("schema = 1\n[physical]\nt1_ms = fast\n"), ::testing::HasSubstr("t.cfg:3:"));
    EXPECT_THAT(expect_config_error("schema = 1\n[physical\n"), ::testing::HasSubstr("t.cfg:2:"));
    EXPECT_THAT(expect_config_error("schema = 1\njust words\n"), ::testing::HasSubstr("t.cfg:2:"));
    EXPECT_THAT(expect_config_error("[physical]\nt1_ms = 1\n"), ::testing::HasSubstr("schema"));
    EXPECT_THAT(expect_config_error("schema = 2\n"), ::testing::HasSubstr("unsupported schema"));
    EXPECT_THAT(expect_config_error("schema = 1\n[qubit]\nnoise = pink\n"), ::testing::HasSubstr("t.cfg:3:"));
    EXPECT_THAT(expect_config_error("schema = 1\n[irb]\ngates = X, Z\n"), ::testing::HasSubstr("t.cfg:3:"));
}

TEST(Config, validation_names_the_block) {
    EXPECT_THAT(expect_config_error(paper_with({{"fermi_offset_uev", "90"}})), ::testing::HasSubstr("[physical]"));
    EXPECT_THAT(expect_config_error(paper_with({{"t1_ms", "-1"}})), ::testing::HasSubstr("[physical]"));
    EXPECT_THAT(expect_config_error(paper_with({{"lengths", "1, 8, 4"}})), ::testing::HasSubstr("[rb]"));
    EXPECT_THAT(expect_config_error(paper_with({{"bootstrap_resamples", "50"}})), ::testing::HasSubstr("[rb]"));
    EXPECT_THAT(expect_config_error(paper_with({{"t2_star_us", "500"}})), ::testing::HasSubstr("[qubit]"));
    EXPECT_THAT(expect_config_error(paper_with({{"window_max_us", "5000"}})), ::testing::HasSubstr("[sweep_grid]"));
}

TEST(Config, explicit_noise_disables_calibration) {
    const auto c = parse_config(paper_with({{"sigma_f_mhz", "0.05"}, {"correlation_time_us", "1000"}}));
    EXPECT_FALSE(c.calibrate_noise);
    EXPECT_DOUBLE_EQ(resolved_qubit(c).sigma_f_mhz, 0.05);
    EXPECT_DOUBLE_EQ(resolved_qubit(c).correlation_time_us, 1000.0);
}

TEST(Config, canonical_text_round_trips) {
    const ExperimentConfig c = load_config(kPaperCfg);
    const std::string text = to_config_text(c);
    const ExperimentConfig back = parse_config(text, "canonical");
    EXPECT_EQ(to_config_text(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));

    ExperimentConfig changed = c;
    changed.physical.t1_ms = 31.6;
    EXPECT_NE(config_hash(changed), config_hash(c));
    // Comments and whitespace do not affect the hash.
    EXPECT_EQ(config_hash(parse_config(slurp(kPaperCfg) + "\n# trailing\n")), config_hash(c));
}

TEST(Config, fnv_reference_values) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

#ifdef ELZSIM_CLI

TEST(Cli, budget_reports_margins) {
    TempDir d;
    ASSERT_EQ(run_cli("budget --config " + kPaperCfg + " --out " + d.path().string()), 0);
    const auto rows = csv_rows(d.path() / "budget.csv");
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows[0], (std::vector<std::string>{"quantity", "value", "threshold", "pass"}));
    int keith = 0;
    for (const auto& r : rows) {
        if (r.size() == 4 && (r[3] == "true" || r[3] == "false")) {
            ++keith;
            EXPECT_EQ(r[3], "true") << r[0];
        }
    }
    EXPECT_EQ(keith, 3);
    const std::string csv = slurp(d.path() / "budget.csv");
    EXPECT_THAT(csv, ::testing::StartsWith("# elzsim budget config_hash="));

    ASSERT_EQ(run_cli("budget --format json --config " + kPaperCfg + " --out " + d.path().string()), 0);
    const auto j = nlohmann::json::parse(slurp(d.path() / "budget.json"));
    EXPECT_NEAR(j["budget"]["predicted_visibility"].get<double>(), 0.9926, 5e-5);
}

TEST(Cli, hot_electrons_fail_the_zeeman_margin) {
    TempDir d;
    const auto cfg = d.write("hot.cfg", paper_with({{"electron_temperature_mk", "200"}}));
    ASSERT_EQ(run_cli("budget --config " + cfg.string() + " --out " + d.path().string()), 0);
    bool saw_fail = false;
    for (const auto& r : csv_rows(d.path() / "budget.csv")) {
        if (r[0] == "zeeman_over_kT") saw_fail = r[3] == "false";
    }
    EXPECT_TRUE(saw_fail);
}

TEST(Cli, exit_codes) {
    TempDir d;
    const auto bad = d.write("bad.cfg", "schema = 1\n[physical]\nt1_ms = soon\n");
    EXPECT_EQ(run_cli("budget --config " + bad.string() + " --out " + d.path().string()), 2);
    EXPECT_EQ(run_cli("budget --config " + (d.path() / "missing.cfg").string()), 2);
    EXPECT_EQ(run_cli("budget"), 2);
    EXPECT_EQ(run_cli("budget --config " + kPaperCfg + " --format xml"), 2);
    EXPECT_EQ(run_cli("teleport --config " + kPaperCfg), 2);
    const auto invalid = d.write("invalid.cfg", paper_with({{"fermi_offset_uev", "100"}}));
    EXPECT_EQ(run_cli("budget --config " + invalid.string() + " --out " + d.path().string()), 2);
}

TEST(Cli, rb_without_noise_stays_at_one) {
    TempDir d;
    const auto cfg = d.write("rb.cfg", paper_with(small_rb()));
    ASSERT_EQ(run_cli("rb --noise off --config " + cfg.string() + " --out " + d.path().string()), 0);
    const auto rows = csv_rows(d.path() / "rb.csv");
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"m", "mean_p_up", "scatter_std", "n_sequences"}));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][1], "1");
        EXPECT_EQ(rows[i][2], "0");
    }
    const auto summary = nlohmann::json::parse(slurp(d.path() / "rb_summary.json"));
    EXPECT_DOUBLE_EQ(summary["fit"]["decay"].get<double>(), 1.0);
}

TEST(Cli, reruns_are_byte_identical) {
    TempDir a, b;
    const auto cfg = a.write("rb.cfg", paper_with(small_rb()));
    ASSERT_EQ(run_cli("rb --workers 1 --config " + cfg.string() + " --out " + a.path().string()), 0);
    ASSERT_EQ(run_cli("rb --workers 3 --config " + cfg.string() + " --out " + b.path().string()), 0);
    EXPECT_EQ(slurp(a.path() / "rb.csv"), slurp(b.path() / "rb.csv"));
    EXPECT_EQ(slurp(a.path() / "rb_summary.json"), slurp(b.path() / "rb_summary.json"));
    // A different seed changes the data.
    ASSERT_EQ(run_cli("rb --seed 5 --config " + cfg.string() + " --out " + b.path().string()), 0);
    EXPECT_NE(slurp(a.path() / "rb.csv"), slurp(b.path() / "rb.csv"));
}

TEST(Cli, sweep_grid_optimum_is_interior) {
    TempDir d;
    const auto cfg = d.write("grid.cfg", paper_with({{"n_shots", "4000"},
                                                     {"threshold_step_e2h", "0.01"},
                                                     {"window_step_us", "50"}}));
    ASSERT_EQ(run_cli("sweep-grid --config " + cfg.string() + " --out " + d.path().string()), 0);
    const auto s = nlohmann::json::parse(slurp(d.path() / "sweep_grid_summary.json"));
    const double g = s["best_threshold_e2h"].get<double>();
    const double t = s["best_window_us"].get<double>();
    EXPECT_GT(g, 0.16);
    EXPECT_LT(g, 0.28);
    EXPECT_GT(t, 50.0);
    EXPECT_LT(t, 1500.0);
    const auto rows = csv_rows(d.path() / "sweep_grid.csv");
    EXPECT_EQ(rows[0], (std::vector<std::string>{"g_thr", "t_r_us", "f_up", "f_down", "visibility"}));
    EXPECT_EQ(rows.size(), 1u + 13u * 30u);
}

#endif
