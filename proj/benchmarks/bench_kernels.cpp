#include <benchmark/benchmark.h>

#include <random>

#include "tgclstm/forecaster.hpp"
#include "tgclstm/gradient_suite.hpp"
#include "tgclstm/graph.hpp"
#include "tgclstm/tgc_lstm.hpp"

using namespace tgclstm;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = u(rng);
  return m;
}

TGCLSTMCell make_cell(std::size_t n, int k, Rng& rng) {
  const auto gm = build_graph_matrices(random_connected_graph(n, rng), GraphOptions{k, k, 5.0});
  const auto structure = make_structure(ModelKind::kTgcLstm, gm, k);
  TGCLSTMCell cell(structure.hop_masks);
  cell.init(rng);
  return cell;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_TgcForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto cell = make_cell(n, 3, rng);
  const Matrix x = random_matrix(1, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(tgc_forward(cell.tgc, x.row(0)));
}
BENCHMARK(BM_TgcForward)->Arg(20)->Arg(60)->Arg(150);

void BM_SequenceForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const auto cell = make_cell(n, 3, rng);
  const Matrix x = random_matrix(10, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward_sequence(cell, x));
}
BENCHMARK(BM_SequenceForward)->Arg(20)->Arg(60)->Arg(150);

void BM_SequenceBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  auto cell = make_cell(n, 3, rng);
  const Matrix x = random_matrix(10, n, rng);
  const Vector upstream(n, 1.0);
  for (auto _ : state) {
    state.PauseTiming();
    auto tape = forward_sequence(cell, x);
    state.ResumeTiming();
    benchmark::DoNotOptimize(backward_sequence(cell, tape, upstream));
  }
}
BENCHMARK(BM_SequenceBackward)->Arg(20)->Arg(60);

}  // namespace

BENCHMARK_MAIN();
