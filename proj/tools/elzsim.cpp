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

// Command-line front end. Exit codes: 0 success, 2 configuration or usage
// error, 3 runtime or fit failure (files written so far are kept).

#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "elzsim/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Elzerman readout and randomized-benchmarking simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string out_dir = ".";
    std::string format = "csv";
    std::string noise = "on";

    for (const auto& cmd : elzsim::kCommands) {
        CLI::App* sub = app.add_subcommand(std::string(cmd.name), std::string(cmd.help));
        sub->add_option("--config", config_path, "config file")->required();
        sub->add_option("--seed", seed, "override base_seed");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--noise", noise, "off disables every stochastic error source")
            ->check(CLI::IsMember({"on", "off"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const elzsim::CommandInfo* command = nullptr;
    for (const auto& cmd : elzsim::kCommands) {
        if (cmd.name == chosen->get_name()) command = &cmd;
    }

    elzsim::RunContext ctx;
    try {
        ctx.config = elzsim::load_config(config_path);
        if (chosen->count("--seed") > 0) ctx.config.base_seed = seed;
        if (noise == "off") elzsim::apply_noise_off(ctx.config);
        elzsim::validate(ctx.config);
    } catch (const elzsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    ctx.workers = workers;
    ctx.out_dir = out_dir;
    ctx.format = format == "json" ? elzsim::OutputFormat::kJson : elzsim::OutputFormat::kCsv;
    ctx.log = &std::cout;

    try {
        command->run(ctx);
    } catch (const elzsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << command->name << " failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
