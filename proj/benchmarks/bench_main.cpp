#include <benchmark/benchmark.h>

// The distro's benchmark_main archive is LTO bytecode from another compiler
// release, so main is provided here.
BENCHMARK_MAIN();
