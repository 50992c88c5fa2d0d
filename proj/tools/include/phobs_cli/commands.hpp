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

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>

#include "phobs/embedding.hpp"
#include "phobs/lmi.hpp"
#include "phobs/simulator.hpp"
#include "phobs_cli/config.hpp"
#include "phobs_cli/results.hpp"

namespace phobs::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitInfeasible = 2,
    kExitVerifyFailed = 3,
    kExitBadConfig = 4,
};

struct CommandOptions {
    std::filesystem::path out_dir;
    std::optional<double> lambda;  // overrides every selected design
    std::optional<GainMode> mode;  // restricts the designs
    unsigned threads = 1;
};

/// Worker count from PHOBS_THREADS, else the hardware concurrency; at least 1.
unsigned thread_limit();

/// Runs fn(0..count-1) on at most `threads` workers. The first exception is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

struct ResolvedDomain {
    OperatingDomain box;
    std::optional<AmplitudeSweep> sweep;
};

/// Frozen box as given, or derived from the configured open-loop run. The sweep runs only when
/// `with_sweep` is set.
ResolvedDomain resolve_domain(const Config& cfg, bool with_sweep);

int cmd_domain(const Config& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_synthesize(const Config& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_simulate(const Config& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_verify(const Config& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_report(const Config& cfg, const CommandOptions& opt, std::ostream& out);

}  // namespace phobs::cli
