#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nqs/flops.hpp"

namespace {

using nqs::ansatz::Architecture;
using nqs::flops::FlopInputs;
using nqs::flops::ForwardMode;

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-30});
}

double log4(double b) { return std::log(b) / std::log(4.0); }

// Continuous-log sampling cost: the closed-form substitution that replaces
// the discrete frontier sum with B/3 and the floored log with log4(B).
double smooth_sampling(double f_mod, double t, double b, double n) {
    const double lg = b > 1.0 ? log4(b) : 0.0;
    return f_mod * t * (b / 3.0 + b * (n / 2.0 - lg));
}

FlopInputs molecule_like(double n, double b, double t, double m, double n_mod, double n_ph,
                         double n_blocks, double d_model) {
    FlopInputs in;
    in.n_qubits = n;
    in.b_mean = b;
    in.t_steps = t;
    in.m_groups = m;
    in.n_mod = n_mod;
    in.n_ph = n_ph;
    in.n_blocks = n_blocks;
    in.d_model = d_model;
    return in;
}

}  // namespace

TEST_SUITE("flops") {

TEST_CASE("forward pass costs") {
    SUBCASE("made full pass") {
        CHECK(nqs::flops::forward_flops(Architecture::made, ForwardMode::full, 1000, 0, 0, 0) ==
              3000.0);
    }
    SUBCASE("transformer parallel pass") {
        CHECK(nqs::flops::forward_flops(Architecture::transformer, ForwardMode::parallel, 1000, 10,
                                        1, 8) == 23200.0);
    }
    SUBCASE("retnet recurrent pass") {
        CHECK(nqs::flops::forward_flops(Architecture::retnet, ForwardMode::recurrent, 1000, 10, 1,
                                        8) == 10.0 * (2000.0 + 5.0 * 64.0));
    }
    SUBCASE("invalid architecture and mode pairs are rejected") {
        CHECK_THROWS_AS((void)nqs::flops::forward_flops(Architecture::made, ForwardMode::parallel,
                                                        10, 1, 1, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)nqs::flops::forward_flops(Architecture::made, ForwardMode::recurrent,
                                                        10, 1, 1, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)nqs::flops::forward_flops(Architecture::transformer,
                                                        ForwardMode::full, 10, 1, 1, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)nqs::flops::forward_flops(Architecture::transformer,
                                                        ForwardMode::recurrent, 10, 1, 1, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)nqs::flops::forward_flops(Architecture::retnet, ForwardMode::full,
                                                        10, 1, 1, 1),
                        std::invalid_argument);
    }
    SUBCASE("recurrent beats parallel once the sequence outgrows the width") {
        for (double d : {4.0, 8.0, 16.0, 64.0}) {
            const double n_seq = 1.75 * d + 1.0;
            const double rec = nqs::flops::forward_flops(Architecture::retnet,
                                                         ForwardMode::recurrent, 5e4, n_seq, 2, d);
            const double par = nqs::flops::forward_flops(Architecture::retnet,
                                                         ForwardMode::parallel, 5e4, n_seq, 2, d);
            CHECK(rec < par);
        }
        SUBCASE("the actual break-even point sits at n_seq = 1.25 d_attn") {
            const double d = 16.0;
            const double rec = nqs::flops::forward_flops(Architecture::retnet,
                                                         ForwardMode::recurrent, 5e4, 1.25 * d, 2, d);
            const double par = nqs::flops::forward_flops(Architecture::retnet,
                                                         ForwardMode::parallel, 5e4, 1.25 * d, 2, d);
            CHECK(rec == par);
        }
    }
}

TEST_CASE("per-token modulus costs") {
    CHECK(nqs::flops::per_token_modulus_flops(Architecture::made, 700, 14, 1, 8) == 300.0);
    CHECK(nqs::flops::per_token_modulus_flops(Architecture::retnet, 700, 14, 2, 8) ==
          2.0 * 700.0 + 5.0 * 2.0 * 64.0);
    CHECK_THROWS_AS((void)nqs::flops::per_token_modulus_flops(Architecture::transformer, 700, 14,
                                                              1, 8),
                    std::invalid_argument);
}

TEST_CASE("ancestral sampling cost") {
    SUBCASE("four branches over four qubits") {
        CHECK(nqs::flops::sampling_flops(1.0, 1.0, 4.0, 4.0) == 5.0);
    }
    SUBCASE("a single branch never pays the frontier sum") {
        CHECK(nqs::flops::sampling_flops(7.0, 3.0, 1.0, 12.0) == 7.0 * 3.0 * 6.0);
    }
    SUBCASE("linear in the step count") {
        const double one = nqs::flops::sampling_flops(2.5, 1.0, 100.0, 20.0);
        CHECK(nqs::flops::sampling_flops(2.5, 2.0, 100.0, 20.0) == 2.0 * one);
    }
    SUBCASE("exact powers of four land on the saturated branch count") {
        // frontier 1 + 4 + 16, then 64 branches over the remaining sites
        CHECK(nqs::flops::sampling_flops(1.0, 1.0, 64.0, 14.0) == 21.0 + 64.0 * (7.0 - 3.0));
    }
    SUBCASE("sub-unit batch sizes are rejected") {
        CHECK_THROWS_AS((void)nqs::flops::sampling_flops(1.0, 1.0, 0.5, 4.0),
                        std::invalid_argument);
    }
}

TEST_CASE("transformer incremental sampling cost") {
    SUBCASE("single branch sums the growing prefix costs") {
        // positions 1 and 2: b * (2N + 4 m n_b d) each
        const double expect = (2.0 * 500.0 + 4.0 * 1.0 * 1.0 * 8.0) +
                              (2.0 * 500.0 + 4.0 * 2.0 * 1.0 * 8.0);
        CHECK(nqs::flops::transformer_sampling_flops(1.0, 1.0, 4.0, 500.0, 1.0, 8.0) == expect);
    }
    SUBCASE("saturated frontier weights early positions by branch count") {
        // B = 4: position 1 on one branch, positions 2..n/2 on four branches
        const double pos1 = 1.0 * (2.0 * 500.0 + 4.0 * 1.0 * 1.0 * 8.0);
        double tail = 0.0;
        for (int m = 2; m <= 3; ++m) tail += 4.0 * (2.0 * 500.0 + 4.0 * m * 1.0 * 8.0);
        CHECK(nqs::flops::transformer_sampling_flops(2.0, 4.0, 6.0, 500.0, 1.0, 8.0) ==
              2.0 * (pos1 + tail));
    }
    SUBCASE("sub-unit batch sizes are rejected") {
        CHECK_THROWS_AS((void)nqs::flops::transformer_sampling_flops(1.0, 0.0, 4.0, 10.0, 1.0,
                                                                     8.0),
                        std::invalid_argument);
    }
}

TEST_CASE("loss construction cost") {
    CHECK(nqs::flops::loss_flops(100.0, 50.0, 16.0, 1.0, 2.0, 4.0) == 20000.0);
    SUBCASE("denominator and backward sweep only") {
        CHECK(nqs::flops::loss_flops(10.0, 0.0, 1.0, 1.0, 0.0, 6.0) == 3.0 * 3.0 * 10.0);
    }
    SUBCASE("linear in batch and steps") {
        const double base = nqs::flops::loss_flops(8.0, 4.0, 2.0, 3.0, 5.0, 10.0);
        CHECK(nqs::flops::loss_flops(8.0, 4.0, 4.0, 3.0, 5.0, 10.0) == 2.0 * base);
        CHECK(nqs::flops::loss_flops(8.0, 4.0, 2.0, 6.0, 5.0, 10.0) == 2.0 * base);
    }
}

TEST_CASE("training totals reproduce the worked evaluations") {
    const FlopInputs in = molecule_like(4, 16, 1, 2, 100, 50, 1, 8);
    CHECK(nqs::flops::training_flops(Architecture::made, in) == 33600.0);
    CHECK(rel_close(nqs::flops::training_flops(Architecture::transformer, in), 5.283e4, 1e-3));
    CHECK(nqs::flops::training_flops(Architecture::retnet, in) == 66624.0);
}

TEST_CASE("training totals at unit batch have no log terms") {
    const double n = 12, t = 7, m = 9, n_mod = 4000, n_ph = 1500, n_b = 2, d = 16;
    const FlopInputs in = molecule_like(n, 1, t, m, n_mod, n_ph, n_b, d);
    CHECK(nqs::flops::training_flops(Architecture::made, in) ==
          t * ((1.5 * n + 3.0 * m + 10.0) * n_mod + 2.0 * (m + 3.0) * n_ph));
    CHECK(nqs::flops::training_flops(Architecture::retnet, in) ==
          t * ((m + 4.0) * n * n_mod + 2.0 * (m + 3.0) * n_ph +
               n_b * d * (2.5 * d * (m + 1.0) * n + 3.0 * n * n)));
    CHECK(nqs::flops::training_flops(Architecture::transformer, in) ==
          t * ((m + 4.0) * n * n_mod + 2.0 * (m + 3.0) * n_ph +
               n_b * d * (m + 3.5) * n * n));
}

TEST_CASE("assembling sampling and loss passes reproduces the closed totals") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double n = 2.0 * (2 + static_cast<long>(un(rng) * 13));  // even, 4..28
        const double b = std::pow(10.0, 0.5 + 4.0 * un(rng));
        const double t = 1.0 + std::floor(un(rng) * 1000.0);
        const double m = 10.0 + std::floor(un(rng) * 990.0);
        const double n_mod = std::pow(10.0, 4.0 + 3.0 * un(rng));
        const double n_ph = 0.5 * n_mod;
        const double n_b = 1.0 + std::floor(un(rng) * 4.0);
        const double d = 8.0 * (1 + static_cast<long>(un(rng) * 15));
        const FlopInputs in = molecule_like(n, b, t, m, n_mod, n_ph, n_b, d);

        CAPTURE(n);
        CAPTURE(b);
        CAPTURE(m);

        // made: full pass per frontier site, per-token share inside the loss
        const double made_assembled =
            smooth_sampling(3.0 * n_mod, t, b, n) +
            nqs::flops::loss_flops(6.0 * n_mod / n, 2.0 * n_ph, b, t, m, n);
        CHECK(rel_close(made_assembled, nqs::flops::training_flops(Architecture::made, in),
                        1e-12));

        // retnet: recurrent form for sampling and the m connected passes,
        // parallel form for the denominator and backward passes; the closed
        // total drops one third of a recurrent pass per sample
        const double f_rec = 2.0 * n_mod + 5.0 * n_b * d * d;
        const double f_par = 2.0 * n_mod + 2.0 * n * n_b * d;
        const double retnet_assembled = smooth_sampling(f_rec, t, b, n) +
                                        b * t * m * (n / 2.0) * f_rec +
                                        b * t * 3.0 * (n / 2.0) * f_par +
                                        b * t * (m + 3.0) * 2.0 * n_ph;
        const double dropped = b * t * f_rec / 3.0;
        CHECK(rel_close(retnet_assembled - dropped,
                        nqs::flops::training_flops(Architecture::retnet, in), 1e-12));
    }
}

TEST_CASE("discrete pass accounting stays within ten percent of the closed totals") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const double n = 2.0 * (4 + static_cast<long>(un(rng) * 11));  // even, 8..28
        const double b = std::pow(4.0, 3.0 + 5.0 * un(rng));           // 64 .. 65536
        const double t = 1.0 + std::floor(un(rng) * 300.0);
        const double m = 10.0 + std::floor(un(rng) * 990.0);
        const double n_mod = std::pow(10.0, 4.0 + 3.0 * un(rng));
        const double n_ph = n_mod * (0.1 + 0.9 * un(rng));
        const double n_b = 1.0 + std::floor(un(rng) * 4.0);
        const double d = 8.0 * (1 + static_cast<long>(un(rng) * 15));
        const FlopInputs in = molecule_like(n, b, t, m, n_mod, n_ph, n_b, d);
        CAPTURE(n);
        CAPTURE(b);
        CAPTURE(m);

        const double made_discrete =
            nqs::flops::sampling_flops(3.0 * n_mod, t, b, n) +
            nqs::flops::loss_flops(6.0 * n_mod / n, 2.0 * n_ph, b, t, m, n);
        CHECK(rel_close(made_discrete, nqs::flops::training_flops(Architecture::made, in), 0.10));

        const double f_rec = nqs::flops::per_token_modulus_flops(Architecture::retnet, n_mod, n,
                                                                 n_b, d);
        const double f_par = 2.0 * n_mod + 2.0 * n * n_b * d;
        const double retnet_discrete = nqs::flops::sampling_flops(f_rec, t, b, n) +
                                       b * t * m * (n / 2.0) * f_rec +
                                       b * t * 3.0 * (n / 2.0) * f_par +
                                       b * t * (m + 3.0) * 2.0 * n_ph;
        CHECK(rel_close(retnet_discrete, nqs::flops::training_flops(Architecture::retnet, in),
                        0.10));

        const double transformer_discrete =
            nqs::flops::transformer_sampling_flops(t, b, n, n_mod, n_b, d) +
            b * t * (m + 3.0) * ((n / 2.0) * f_par + 2.0 * n_ph);
        CHECK(rel_close(transformer_discrete,
                        nqs::flops::training_flops(Architecture::transformer, in), 0.10));
    }
}

TEST_CASE("training totals are monotone in every count") {
    const std::vector<double> b_grid = {1, 4, 16, 64, 256, 4096, 65536};
    const std::vector<double> t_grid = {1, 10, 100, 1000};
    const std::vector<double> m_grid = {10, 50, 200, 1000, 4508};
    const std::vector<double> nm_grid = {1e3, 1e4, 1e5, 1e6};
    const std::vector<double> np_grid = {0, 1e3, 1e5};
    const FlopInputs base = molecule_like(14, 16, 100, 190, 5e4, 2e4, 2, 32);
    for (Architecture arch :
         {Architecture::made, Architecture::retnet, Architecture::transformer}) {
        double prev = 0.0;
        for (double b : b_grid) {
            FlopInputs in = base;
            in.b_mean = b;
            const double f = nqs::flops::training_flops(arch, in);
            CHECK(f >= prev);
            prev = f;
        }
        prev = 0.0;
        for (double t : t_grid) {
            FlopInputs in = base;
            in.t_steps = t;
            const double f = nqs::flops::training_flops(arch, in);
            CHECK(f >= prev);
            prev = f;
        }
        prev = 0.0;
        for (double m : m_grid) {
            FlopInputs in = base;
            in.m_groups = m;
            const double f = nqs::flops::training_flops(arch, in);
            CHECK(f >= prev);
            prev = f;
        }
        prev = 0.0;
        for (double nm : nm_grid) {
            FlopInputs in = base;
            in.n_mod = nm;
            const double f = nqs::flops::training_flops(arch, in);
            CHECK(f >= prev);
            prev = f;
        }
        prev = -1.0;
        for (double np : np_grid) {
            FlopInputs in = base;
            in.n_ph = np;
            const double f = nqs::flops::training_flops(arch, in);
            CHECK(f >= prev);
            prev = f;
        }
    }
}

TEST_CASE("simplified constrained-analysis forms") {
    CHECK(nqs::flops::simplified_flops(Architecture::made, 10, 14, 8, 441, 100, 1000) == 1.323e9);
    SUBCASE("all forms are linear in the compute product") {
        for (Architecture arch :
             {Architecture::made, Architecture::retnet, Architecture::transformer}) {
            const double one = nqs::flops::simplified_flops(arch, 190, 14, 32, 441, 50, 2e4);
            CHECK(rel_close(nqs::flops::simplified_flops(arch, 190, 14, 32, 441, 100, 2e4),
                            2.0 * one, 1e-12));
            CHECK(rel_close(nqs::flops::simplified_flops(arch, 190, 14, 32, 441, 50, 4e4),
                            2.0 * one, 1e-12));
        }
    }
    SUBCASE("retnet form matches its written coefficients") {
        const double m = 446, n = 20, d = 64, s = 14400, dp = 3.5, nr = 1e5;
        CHECK(rel_close(nqs::flops::simplified_flops(Architecture::retnet, m, n, d, s, dp, nr),
                        (15.5 * m * n + 3.0 * n * n / d) / 13.0 * s * dp * nr, 1e-12));
    }
    SUBCASE("wide transformers approach the dominant linear term") {
        const double m = 190, n = 14, d = 4096, s = 441, dp = 10, nr = 1e5;
        const double full = nqs::flops::simplified_flops(Architecture::transformer, m, n, d, s, dp,
                                                         nr);
        CHECK(rel_close(full, m * n * s * dp * nr, 0.01));
    }
}

}  // TEST_SUITE
