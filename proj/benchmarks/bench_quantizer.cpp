#include <benchmark/benchmark.h>

#include "dsukit/quantizer.hpp"
#include "dsukit/rng.hpp"

using namespace dsukit;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng r(seed);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = static_cast<float>(r.normal());
  return m;
}

// frames/s for nearest-centroid search; args: k, dim, workers
void BM_Assign(benchmark::State& state) {
  Codebook cb;
  cb.centroids = gaussian(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 1);
  FeatureSequence seq;
  seq.frames = gaussian(2000, cb.dim(), 2);
  const auto workers = static_cast<unsigned>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(assign(cb, seq, workers));
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_Assign)->Args({500, 64, 1})->Args({5000, 64, 1})->Args({5000, 64, 4})->Unit(benchmark::kMillisecond);

void BM_TrainIteration(benchmark::State& state) {
  std::vector<FeatureSequence> data(4);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].frames = gaussian(5000, 32, 10 + i);
  KMeansOptions o;
  o.k = static_cast<std::size_t>(state.range(0));
  o.max_iters = 1;
  o.init = KMeansInit::random;
  for (auto _ : state) benchmark::DoNotOptimize(train_kmeans(InMemoryFeatures(data), o));
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_TrainIteration)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
