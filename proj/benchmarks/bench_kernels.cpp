#include <vector>

#include <benchmark/benchmark.h>

#include "randent/randent.hpp"

using namespace randent;

static void BM_TwoQubitGate(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    qsim::RngStream rng(1, 0);
    auto s = qsim::haar_state(n, rng);
    const auto u = qsim::haar_u4(rng);
    for (auto _ : state) {
        s.apply_two_qubit(0, n - 1, u);
        benchmark::DoNotOptimize(s.amplitudes().data());
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_TwoQubitGate)->DenseRange(8, 20, 4);

static void BM_Purity(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    qsim::RngStream rng(2, 0);
    const auto s = qsim::haar_state(n, rng);
    const auto cut = ent::Bipartition::symmetric(n);
    for (auto _ : state)
        benchmark::DoNotOptimize(ent::fast_purity(s, cut));
}
BENCHMARK(BM_Purity)->DenseRange(8, 16, 4);

static void BM_ChainMatvec(benchmark::State &state, const char *gate) {
    const int n = static_cast<int>(state.range(0));
    const chain::ChainOperator op(chain::kernel_for(gates::parse_gate_spec(gate)), n, chain::Coupling::Random);
    std::vector<double> in = chain::initial_dist_product_state(n).weights, out(op.dim());
    for (auto _ : state) {
        op.apply(in, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(op.dim()));
}
BENCHMARK_CAPTURE(BM_ChainMatvec, cnot, "cnot")->DenseRange(6, 10, 2);
BENCHMARK_CAPTURE(BM_ChainMatvec, u4, "u4")->DenseRange(6, 10, 2);

static void BM_LumpedMatvec(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const chain::LumpedChain op(chain::kernel_for(gates::parse_gate_spec("xy")), n, chain::Coupling::Random);
    std::vector<double> in(op.dim(), 1.0 / static_cast<double>(op.dim())), out(op.dim());
    for (auto _ : state) {
        op.apply(in, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_LumpedMatvec)->DenseRange(10, 20, 5);

static void BM_ProtocolReplica(benchmark::State &state) {
    protocol::ProtocolConfig cfg;
    cfg.n = static_cast<int>(state.range(0));
    cfg.gate = gates::parse_gate_spec("xy");
    cfg.steps = 50;
    cfg.replicas = 1;
    cfg.threads = 1;
    cfg.measures = {true, false, false};
    for (auto _ : state) {
        cfg.seed += 1;
        benchmark::DoNotOptimize(protocol::run_protocol(cfg).purity_sum.data());
    }
}
BENCHMARK(BM_ProtocolReplica)->Arg(8)->Arg(12);

static void BM_Gap(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const chain::ChainOperator op(chain::kernel_for(gates::parse_gate_spec("cnot")), n, chain::Coupling::NnPbc);
    for (auto _ : state)
        benchmark::DoNotOptimize(spectral::top_eigenvalues(op, 4).gap);
}
BENCHMARK(BM_Gap)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
