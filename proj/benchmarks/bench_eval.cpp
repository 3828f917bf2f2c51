#include <benchmark/benchmark.h>

#include "dsukit/eval.hpp"
#include "dsukit/rng.hpp"

using namespace dsukit;

namespace {

std::vector<std::string> corpus(std::uint64_t seed, std::size_t n) {
  static const char* w[] = {"the", "a", "cat", "dog", "sat", "ran", "on", "mat", "home", "far", "big", "red"};
  Rng r(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (int k = 0; k < 20; ++k) s += std::string(k ? " " : "") + w[r.below(12)];
    out.push_back(s);
  }
  return out;
}

void BM_Wer(benchmark::State& state) {
  const auto refs = corpus(1, 1000), hyps = corpus(2, 1000);
  std::vector<EvalPair> pairs;
  for (std::size_t i = 0; i < refs.size(); ++i) pairs.push_back({refs[i], hyps[i]});
  for (auto _ : state) benchmark::DoNotOptimize(wer(pairs));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Wer)->Unit(benchmark::kMillisecond);

void BM_Bleu(benchmark::State& state) {
  const auto refs = corpus(1, 1000), hyps = corpus(2, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(bleu(refs, hyps));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Bleu)->Unit(benchmark::kMillisecond);

void BM_Bootstrap(benchmark::State& state) {
  const auto refs = corpus(1, 500), a = corpus(2, 500), b = corpus(3, 500);
  BootstrapOptions o;
  o.n_resamples = 1000;
  o.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(paired_bootstrap_bleu(a, b, refs, o));
}
BENCHMARK(BM_Bootstrap)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
