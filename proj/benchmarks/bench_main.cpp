#include <benchmark/benchmark.h>

// libbenchmark_main ships LTO objects from a different compiler patch
// release on some distributions, so main lives here.
BENCHMARK_MAIN();
