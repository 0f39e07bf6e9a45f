// Compares the OpenMP subdivision kernel against the serial reference on
// fixed random networks. Run: ./bench_enumeration [gbench flags]

#include <benchmark/benchmark.h>

#include "cpageo/enumeration.hpp"
#include "cpageo/trainer.hpp"

namespace {

using namespace cpageo;

Network make_net(const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  Network net = Network::mlp(2, hidden, 2, CpaActivation::relu(), false);
  init_kaiming_uniform(net, seed);
  return net;
}

const Window kWindow{{0.0, 0.0}, 1.5};

void bench_parallel(benchmark::State& state, const std::vector<std::size_t>& hidden) {
  const Network net = make_net(hidden, 7);
  EnumerationOptions opt;
  opt.parallel = true;
  std::size_t cells = 0;
  for (auto _ : state) {
    const EnumerationResult res =
        enumerate_regions(net, EvalMode::no_bn(), kWindow, opt);
    cells = res.cells.size();
    benchmark::DoNotOptimize(cells);
  }
  state.counters["cells"] = static_cast<double>(cells);
}

void bench_serial_reference(benchmark::State& state,
                            const std::vector<std::size_t>& hidden) {
  const Network net = make_net(hidden, 7);
  std::size_t cells = 0;
  for (auto _ : state) {
    const EnumerationResult res = enumerate_on_slice_reference(
        net, EvalMode::no_bn(), SliceMap::identity2(), kWindow);
    cells = res.cells.size();
    benchmark::DoNotOptimize(cells);
  }
  state.counters["cells"] = static_cast<double>(cells);
}

void BM_parallel_single64(benchmark::State& state) { bench_parallel(state, {64}); }
void BM_serial_single64(benchmark::State& state) {
  bench_serial_reference(state, {64});
}
void BM_parallel_single128(benchmark::State& state) { bench_parallel(state, {128}); }
void BM_serial_single128(benchmark::State& state) {
  bench_serial_reference(state, {128});
}
void BM_parallel_deep32x3(benchmark::State& state) {
  bench_parallel(state, {32, 32, 32});
}
void BM_serial_deep32x3(benchmark::State& state) {
  bench_serial_reference(state, {32, 32, 32});
}

BENCHMARK(BM_parallel_single64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_serial_single64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_parallel_single128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_serial_single128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_parallel_deep32x3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_serial_deep32x3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
