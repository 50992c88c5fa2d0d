/*
 Copyright 2026 The phobs Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "phobs_cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace phobs::cli;
    CLI::App app{"Observer synthesis and simulation for port-Hamiltonian plants"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    double lambda = 0.0;
    std::string mode;

    using Command = int (*)(const Config&, const CommandOptions&, std::ostream&);
    const std::pair<const char*, Command> table[] = {
        {"domain", cmd_domain},       {"synthesize", cmd_synthesize}, {"simulate", cmd_simulate},
        {"verify", cmd_verify},       {"report", cmd_report},
    };
    const char* help[] = {
        "Operating box from the config, or from an open-loop run, with the amplitude sweep",
        "Observer gains at fixed or largest certifiable decay rates",
        "Run the scenarios and write trajectories and metrics",
        "Re-check identities, stored certificates and the exponential bound",
        "Consolidate the result files into one report",
    };
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(table); ++i) {
        CLI::App* sub = app.add_subcommand(table[i].first, help[i]);
        sub->add_option("--config", config_path, "Config file (JSON)")->required();
        sub->add_option("--out", out, "Output directory (default: output.directory of the config)");
        sub->add_option("--lambda", lambda, "Decay rate for every selected design [1/s]")->check(CLI::NonNegativeNumber);
        sub->add_option("--mode", mode, "Restrict to one gain structure")->check(CLI::IsMember({"const", "sched"}));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadConfig;
    }

    CommandOptions opt;
    opt.out_dir = out;
    opt.threads = thread_limit();
    Config cfg;
    try {
        cfg = load_config(config_path);
        for (auto* sub : subs) {
            if (!sub->parsed())
                continue;
            if (sub->count("--lambda") > 0)
                opt.lambda = lambda;
            if (!mode.empty())
                opt.mode = phobs::gain_mode_from_string(mode);
        }
    } catch (const std::exception& e) {
        std::cerr << "phobs: " << e.what() << '\n';
        return kExitBadConfig;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed())
            continue;
        try {
            return table[i].second(cfg, opt, std::cout);
        } catch (const std::exception& e) {
            std::cerr << "phobs " << table[i].first << ": " << e.what() << '\n';
            return kExitError;
        }
    }
    return kExitError;
}
