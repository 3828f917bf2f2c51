#include <benchmark/benchmark.h>

#include "dsukit/dsu_codec.hpp"
#include "dsukit/rng.hpp"

using namespace dsukit;

namespace {

DsuSequence frames_like(std::size_t n) {
  Rng r(3);
  DsuSequence s;
  UnitId cur = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (r.below(3) == 0) cur = static_cast<UnitId>(r.below(5000));
    s.ids.push_back(cur);
  }
  s.source_frame_count = n;
  return s;
}

void BM_DedupRender(benchmark::State& state) {
  const auto s = frames_like(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(render_tokens(dedup(s)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DedupRender)->Arg(1000)->Arg(100000);

void BM_Parse(benchmark::State& state) {
  const auto text = render_tokens(dedup(frames_like(100000)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_tokens(text, 0, 5000));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Parse);

}  // namespace
