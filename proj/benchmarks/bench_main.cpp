#include <benchmark/benchmark.h>

#include <cmath>

#include "pxa/anchors.hpp"
#include "pxa/geometry.hpp"
#include "pxa/postprocess.hpp"
#include "pxa/synthetic.hpp"

namespace {

void BM_QuadIou(benchmark::State& state) {
    pxa::CounterRng rng(1);
    const auto cands = pxa::random_candidates(rng, 256, 512, 512);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& a = cands[i % cands.size()];
        const auto& b = cands[(i * 7 + 3) % cands.size()];
        benchmark::DoNotOptimize(pxa::quad_iou(a.quad, b.quad));
        ++i;
    }
}
BENCHMARK(BM_QuadIou);

void BM_Nms(benchmark::State& state, bool cascade) {
    pxa::CounterRng rng(2);
    const auto cands = pxa::random_candidates(rng, static_cast<std::size_t>(state.range(0)), 1024, 1024);
    pxa::FusionConfig cfg;
    cfg.cascade = cascade;
    std::size_t evals = 0;
    for (auto _ : state) {
        pxa::FusionDiagnostics diag;
        benchmark::DoNotOptimize(pxa::cascaded_nms(cands, cfg, &diag));
        evals = diag.quad_iou_evals;
    }
    state.counters["quad_iou_evals"] = static_cast<double>(evals);
}
BENCHMARK_CAPTURE(BM_Nms, cascade, true)->Arg(1000)->Arg(5000);
BENCHMARK_CAPTURE(BM_Nms, single_stage, false)->Arg(1000)->Arg(5000);

void BM_BuildLattice(benchmark::State& state) {
    const auto cfg = pxa::APLConfig::defaults();
    const auto side = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pxa::build_lattice(cfg, side, side));
    }
}
BENCHMARK(BM_BuildLattice)->Arg(256)->Arg(640);

void BM_TrimLattice(benchmark::State& state) {
    const auto lat = pxa::build_lattice(pxa::APLConfig::defaults(), 640, 640);
    for (auto _ : state) benchmark::DoNotOptimize(pxa::trim_for_inference(lat));
}
BENCHMARK(BM_TrimLattice);

}  // namespace

BENCHMARK_MAIN();
