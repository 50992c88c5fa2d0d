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

#include <benchmark/benchmark.h>

#include "phobs/embedding.hpp"
#include "phobs/lmi.hpp"
#include "phobs/metrics.hpp"
#include "phobs/simulator.hpp"
#include "phobs/synthesis.hpp"

namespace {

using namespace phobs;

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

OperatingDomain dea_box() {
    OperatingDomain d;
    d.q_min = v1(-8.1257e-6);
    d.q_max = v1(4.67546e-4);
    d.p_min = v1(-6.3029e-3);
    d.p_max = v1(2.228856e-3);
    d.u_min = v1(0.0);
    d.u_max = v1(2.64196e7);
    return d;
}

Scenario step_scenario(double horizon) {
    Scenario sc;
    sc.x0 = StateVec::zero(1);
    sc.xhat0 = {v1(2e-4), v1(-2e-3)};
    sc.input = InputSignal::step(0.1, 2.64196e7);
    sc.horizon = horizon;
    return sc;
}

void BM_ParameterBounds(benchmark::State& state) {
    const PHSystem sys = PHSystem::dea({});
    const OperatingDomain box = dea_box();
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_parameter_bounds(sys, box));
}
BENCHMARK(BM_ParameterBounds);

void BM_Vertices(benchmark::State& state) {
    const PHSystem sys = PHSystem::dea({});
    const ParameterBounds b = compute_parameter_bounds(sys, dea_box());
    for (auto _ : state)
        benchmark::DoNotOptimize(enumerate_vertices(sys, b));
}
BENCHMARK(BM_Vertices);

void BM_Synthesize(benchmark::State& state) {
    const PHSystem sys = PHSystem::dea({});
    const VertexSet V = enumerate_vertices(sys, compute_parameter_bounds(sys, dea_box()));
    const GainMode mode = state.range(0) == 0 ? GainMode::Constant : GainMode::Scheduled;
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize(V, 0.0897, mode));
}
BENCHMARK(BM_Synthesize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Integrate(benchmark::State& state) {
    const PHSystem sys = PHSystem::dea({});
    const VertexSet V = enumerate_vertices(sys, compute_parameter_bounds(sys, dea_box()));
    const GainMode mode = state.range(0) == 0 ? GainMode::Constant : GainMode::Scheduled;
    const SynthesisResult r = *synthesize(V, 0.0897, mode).result;
    const Scenario sc = step_scenario(0.2);
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate(sys, &r, sc));
    state.SetItemsProcessed(state.iterations() * sc.steps());
}
BENCHMARK(BM_Integrate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
    const PHSystem sys = PHSystem::dea({});
    const VertexSet V = enumerate_vertices(sys, compute_parameter_bounds(sys, dea_box()));
    const SynthesisResult r = *synthesize(V, 0.0897, GainMode::Constant).result;
    const Trajectory tr = integrate(sys, &r, step_scenario(1.0));
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_metrics(tr));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tr.size()));
}
BENCHMARK(BM_Metrics);

}  // namespace

BENCHMARK_MAIN();
