#include <benchmark/benchmark.h>

#include <sbvar/ansatz.hpp>
#include <sbvar/fock.hpp>
#include <sbvar/model.hpp>
#include <sbvar/tdvp.hpp>

namespace {

sbvar::SpinBosonParams ohmic_params(int n_modes) {
    return sbvar::ohmic_discretization(0.1, 10.0, n_modes);
}

void bm_gram_matrix(benchmark::State& state) {
    const int n_modes = static_cast<int>(state.range(0));
    const int n_polarons = static_cast<int>(state.range(1));
    const auto vs = sbvar::seed_random(n_polarons, n_modes, sbvar::SpinInit::minus, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(sbvar::gram_matrix(vs));
}
BENCHMARK(bm_gram_matrix)->Args({4, 3})->Args({11, 10});

void bm_eom_rhs(benchmark::State& state) {
    const int n_modes = static_cast<int>(state.range(0));
    const int n_polarons = static_cast<int>(state.range(1));
    const auto p = ohmic_params(n_modes);
    const auto vs = sbvar::seed_random(n_polarons, n_modes, sbvar::SpinInit::minus, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sbvar::eom_rhs(vs, p, 1.0, sbvar::TdvpMode::imaginary));
}
BENCHMARK(bm_eom_rhs)->Args({4, 3})->Args({11, 10});

void bm_fock_matvec(benchmark::State& state) {
    const int n_modes = static_cast<int>(state.range(0));
    const int cutoff = static_cast<int>(state.range(1));
    const auto p = ohmic_params(n_modes);
    const sbvar::FockSpace space(n_modes, cutoff);
    const auto h = sbvar::build_hamiltonian(p, space, 1.0);
    Eigen::VectorXd v = Eigen::VectorXd::Random(space.dim());
    Eigen::VectorXd w(space.dim());
    for (auto _ : state) {
        w.noalias() = h * v;
        benchmark::DoNotOptimize(w);
    }
}
BENCHMARK(bm_fock_matvec)->Args({2, 12})->Args({4, 8});

} // namespace
