// Timing harness for the OpenMP kernels against their serial references.
// Each section reports wall time per call and the maximum absolute
// difference between the two code paths, which must be exactly zero.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <vector>

#include "nqs/ansatz.hpp"
#include "nqs/oracle.hpp"
#include "nqs/parallel.hpp"
#include "nqs/pauli.hpp"
#include "nqs/sampler.hpp"
#include "nqs/vmc.hpp"

namespace {

using nqs::oracle::cdouble;

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

nqs::pauli::Hamiltonian random_hamiltonian(int n_qubits, int n_terms, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 3);
    std::normal_distribution<double> coeff(0.0, 0.5);
    nqs::pauli::Hamiltonian h;
    h.n_qubits = n_qubits;
    h.name = "bench";
    const char symbols[] = "IXYZ";
    for (int t = 0; t < n_terms; ++t) {
        nqs::pauli::PauliTerm term;
        term.coeff = coeff(rng);
        term.ops.resize(static_cast<size_t>(n_qubits), 'I');
        for (int q = 0; q < n_qubits; ++q) {
            const char c = symbols[pick(rng)];
            term.ops[static_cast<size_t>(q)] = c;
            if (c == 'X' || c == 'Y') term.x_mask |= 1ULL << q;
            if (c == 'Y' || c == 'Z') term.z_mask |= 1ULL << q;
        }
        h.terms.push_back(std::move(term));
    }
    return h;
}

double max_abs_diff(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs_diff(const std::vector<std::complex<double>>& a,
                    const std::vector<std::complex<double>>& b, bool) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

void report(const char* name, double serial_ms, double parallel_ms, double diff) {
    std::printf("%-24s %10.2f ms %10.2f ms   speedup %5.2fx   max|diff| %.3g\n", name, serial_ms,
                parallel_ms, serial_ms / std::max(parallel_ms, 1e-9), diff);
}

}  // namespace

int main() {
    const int threads = nqs::parallel::max_threads();
    std::printf("threads available: %d\n\n", threads);

    // Sparse matrix-vector product: dedicated serial implementation vs the
    // row-parallel one.
    {
        const auto h = random_hamiltonian(12, 60, 7);
        const auto op = nqs::oracle::build_operator(h, false);
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<cdouble> x(static_cast<size_t>(op.dim));
        for (auto& v : x) v = {g(rng), g(rng)};
        std::vector<cdouble> ys(x.size()), yp(x.size());

        const int reps = 200;
        double t0 = now_ms();
        for (int r = 0; r < reps; ++r) nqs::oracle::matvec_serial(op, x.data(), ys.data());
        double t1 = now_ms();
        for (int r = 0; r < reps; ++r) nqs::oracle::matvec(op, x.data(), yp.data());
        double t2 = now_ms();
        report("sparse_matvec", (t1 - t0) / reps, (t2 - t1) / reps, max_abs_diff(ys, yp));
    }

    // Batched local energies and the stochastic gradient: the same parallel
    // kernel pinned to one thread is the reference, and the per-slot write
    // discipline must make the outputs bit-identical at any thread count.
    {
        const auto h = random_hamiltonian(12, 40, 19);
        const auto groups = nqs::pauli::flip_groups(h);
        nqs::ansatz::AnsatzConfig cfg;
        cfg.architecture = nqs::ansatz::Architecture::made;
        cfg.n_qubits = 12;
        cfg.seed = 3;
        nqs::ansatz::Ansatz a(cfg);
        nqs::ansatz::ConstrainedWavefunction wf(a, std::nullopt);

        std::vector<uint64_t> configs;
        for (uint64_t x = 0; x < 512; ++x) configs.push_back(x * 8 + 1);
        std::vector<double> weights(configs.size(), 1.0 / static_cast<double>(configs.size()));

        nqs::parallel::set_threads(1);
        double t0 = now_ms();
        const auto locals_s = nqs::vmc::local_energies(wf, h, groups, configs);
        double t1 = now_ms();
        nqs::parallel::set_threads(threads);
        const auto locals_p = nqs::vmc::local_energies(wf, h, groups, configs);
        double t2 = now_ms();
        report("local_energies", t1 - t0, t2 - t1, max_abs_diff(locals_s, locals_p, true));

        const double baseline = nqs::vmc::energy_and_variance(locals_s, weights).energy;
        nqs::parallel::set_threads(1);
        t0 = now_ms();
        const auto grad_s = nqs::vmc::gradient(a, std::nullopt, configs, weights, locals_s, baseline);
        t1 = now_ms();
        nqs::parallel::set_threads(threads);
        const auto grad_p = nqs::vmc::gradient(a, std::nullopt, configs, weights, locals_s, baseline);
        t2 = now_ms();
        report("gradient", t1 - t0, t2 - t1, max_abs_diff(grad_s, grad_p));

        nqs::parallel::set_threads(1);
        t0 = now_ms();
        const auto lp_s = nqs::sampler::batch_log_probs(wf, configs);
        t1 = now_ms();
        nqs::parallel::set_threads(threads);
        const auto lp_p = nqs::sampler::batch_log_probs(wf, configs);
        t2 = now_ms();
        report("batch_log_probs", t1 - t0, t2 - t1, max_abs_diff(lp_s, lp_p));
    }

    return 0;
}
