#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "nqs/ansatz.hpp"
#include "nqs/oracle.hpp"
#include "nqs/pauli.hpp"
#include "nqs/vmc.hpp"

namespace {

using nqs::ansatz::Ansatz;
using nqs::ansatz::AnsatzConfig;
using nqs::ansatz::Architecture;
using nqs::ansatz::ConstrainedWavefunction;
using nqs::oracle::TableWavefunction;
using nqs::pauli::Hamiltonian;
using nqs::pauli::parse_hamiltonian;
using cdouble = std::complex<double>;

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Equal-amplitude real state over the full n-qubit space.
TableWavefunction uniform_table(int n) {
    const uint64_t dim = 1ULL << n;
    std::vector<uint64_t> basis(dim);
    for (uint64_t x = 0; x < dim; ++x) basis[x] = x;
    const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
    return TableWavefunction(basis, std::vector<cdouble>(dim, cdouble(amp, 0.0)));
}

Hamiltonian random_dense_terms(int n, int terms, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    const char alphabet[4] = {'I', 'X', 'Y', 'Z'};
    std::string text = "%n_qubits " + std::to_string(n) + "\n";
    for (int t = 0; t < terms; ++t) {
        std::string word(static_cast<size_t>(n), 'I');
        for (int q = 0; q < n; ++q) word[static_cast<size_t>(q)] = alphabet[rng() % 4];
        text += std::to_string(coeff(rng)) + " " + word + "\n";
    }
    return parse_hamiltonian(text, "random");
}

std::vector<uint64_t> feasible_configs(const nqs::Wavefunction& wf, int n) {
    std::vector<uint64_t> out;
    for (uint64_t x = 0; x < (1ULL << n); ++x)
        if (wf.feasible(x)) out.push_back(x);
    return out;
}

// Born weights of a normalized ansatz over its feasible configs.
std::vector<double> born_weights(const nqs::Wavefunction& wf, const std::vector<uint64_t>& configs) {
    std::vector<double> w(configs.size());
    for (size_t i = 0; i < configs.size(); ++i)
        w[i] = std::exp(2.0 * wf.log_amplitude(configs[i]).real());
    return w;
}

double batch_energy(const std::vector<cdouble>& locals, const std::vector<double>& weights) {
    double e = 0.0;
    for (size_t i = 0; i < locals.size(); ++i) e += weights[i] * locals[i].real();
    return e;
}

void nudge_params(Ansatz& a, double scale, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> dir(static_cast<size_t>(a.params().total_scalars()));
    for (double& d : dir) d = scale * gauss(rng);
    a.params().axpy_flat(1.0, dir);
}

// Exact variational energy as a function of the flattened parameters.
double exact_energy_at(Ansatz& a, const std::optional<nqs::pauli::Sector>& sector,
                       const Hamiltonian& h, const std::vector<double>& flat) {
    a.params().assign_flat(flat);
    const ConstrainedWavefunction wf(a, sector);
    return nqs::oracle::exact_expectation(wf, h).energy;
}

}  // namespace

TEST_SUITE("vmc") {

TEST_CASE("local energy of an off-diagonal term on the uniform state") {
    const Hamiltonian h = parse_hamiltonian("%n_qubits 1\n1.0 X\n");
    const auto groups = nqs::pauli::flip_groups(h);
    const TableWavefunction wf = uniform_table(1);
    const auto locals = nqs::vmc::local_energies(wf, h, groups, {0});
    CHECK(close(locals[0].real(), 1.0, 1e-12));
    CHECK(close(locals[0].imag(), 0.0, 1e-12));
}

TEST_CASE("local energy of a diagonal term is the matrix element itself") {
    const Hamiltonian h = parse_hamiltonian("%n_qubits 1\n0.7 Z\n");
    const auto groups = nqs::pauli::flip_groups(h);
    const TableWavefunction wf = uniform_table(1);
    const auto locals = nqs::vmc::local_energies(wf, h, groups, {0, 1});
    CHECK(close(locals[0].real(), 0.7, 1e-12));
    CHECK(close(locals[1].real(), -0.7, 1e-12));
}

TEST_CASE("weighted local-energy mean equals the exact expectation") {
    const Hamiltonian h = random_dense_terms(4, 12, 77);
    const auto groups = nqs::pauli::flip_groups(h);
    AnsatzConfig cfg;
    cfg.architecture = Architecture::made;
    cfg.n_qubits = 4;
    cfg.made_hidden_dims = {12};
    cfg.phase_hidden_dims = {8};
    cfg.seed = 5;
    Ansatz a(cfg);
    nudge_params(a, 0.2, 31);
    const ConstrainedWavefunction wf(a, std::nullopt);

    const std::vector<uint64_t> configs = feasible_configs(wf, 4);
    const std::vector<double> weights = born_weights(wf, configs);
    const auto locals = nqs::vmc::local_energies(wf, h, groups, configs);
    const double mean = batch_energy(locals, weights);
    const double exact = nqs::oracle::exact_expectation(wf, h).energy;
    CHECK(close(mean, exact, 1e-10));
}

TEST_CASE("local energy rejects a reference config with zero amplitude") {
    const Hamiltonian h = parse_hamiltonian("%n_qubits 1\n1.0 Z\n");
    const auto groups = nqs::pauli::flip_groups(h);
    const TableWavefunction wf({0}, {cdouble(1.0, 0.0)});
    CHECK_THROWS_AS((void)nqs::vmc::local_energies(wf, h, groups, {1}), std::runtime_error);
}

TEST_CASE("energy and variance of hand batches") {
    SUBCASE("constant locals have zero variance") {
        const std::vector<cdouble> locals(5, cdouble(-2.5, 0.0));
        const std::vector<double> weights(5, 0.2);
        const auto est = nqs::vmc::energy_and_variance(locals, weights);
        CHECK(close(est.energy, -2.5, 1e-12));
        CHECK(close(est.variance, 0.0, 1e-12));
        CHECK(est.unique_count == 5);
    }
    SUBCASE("two equally weighted locals 0 and 2") {
        const auto est = nqs::vmc::energy_and_variance({cdouble(0.0, 0.0), cdouble(2.0, 0.0)},
                                                       {0.5, 0.5});
        CHECK(close(est.energy, 1.0, 1e-12));
        CHECK(close(est.variance, 1.0, 1e-12));
    }
    SUBCASE("imaginary spread counts toward the variance") {
        const auto est = nqs::vmc::energy_and_variance({cdouble(1.0, 1.0), cdouble(1.0, -1.0)},
                                                       {0.5, 0.5});
        CHECK(close(est.energy, 1.0, 1e-12));
        CHECK(close(est.variance, 1.0, 1e-12));
    }
    SUBCASE("splitting a config's weight across duplicates changes nothing") {
        const std::vector<cdouble> merged = {cdouble(0.3, 0.1), cdouble(-1.2, 0.0)};
        const std::vector<cdouble> split = {cdouble(0.3, 0.1), cdouble(0.3, 0.1),
                                            cdouble(-1.2, 0.0)};
        const auto est_m = nqs::vmc::energy_and_variance(merged, {0.6, 0.4});
        const auto est_s = nqs::vmc::energy_and_variance(split, {0.45, 0.15, 0.4});
        CHECK(close(est_m.energy, est_s.energy, 1e-14));
        CHECK(close(est_m.variance, est_s.variance, 1e-14));
    }
    SUBCASE("empty or misaligned batches are rejected") {
        CHECK_THROWS_AS((void)nqs::vmc::energy_and_variance({}, {}), std::invalid_argument);
        CHECK_THROWS_AS((void)nqs::vmc::energy_and_variance({cdouble(1.0, 0.0)}, {0.5, 0.5}),
                        std::invalid_argument);
    }
}

TEST_CASE("exact eigenstates have vanishing local-energy variance") {
    const Hamiltonian h = random_dense_terms(4, 10, 911);
    const auto op = nqs::oracle::build_operator(h, false);
    const auto gs = nqs::oracle::ground_state(op);
    const TableWavefunction wf(op.basis, gs.vector);
    const auto groups = nqs::pauli::flip_groups(h);

    std::vector<uint64_t> configs;
    std::vector<double> weights;
    for (size_t i = 0; i < op.basis.size(); ++i) {
        if (std::norm(gs.vector[i]) < 1e-20) continue;
        configs.push_back(op.basis[i]);
        weights.push_back(std::norm(gs.vector[i]));
    }
    const auto locals = nqs::vmc::local_energies(wf, h, groups, configs);
    const auto est = nqs::vmc::energy_and_variance(locals, weights);
    CHECK(close(est.energy, gs.energy, 1e-9));
    CHECK(est.variance < 1e-12);
}

TEST_CASE("v-score hand values") {
    SUBCASE("zero variance gives zero") {
        nqs::vmc::EnergyEstimate est;
        est.energy = -1.0;
        est.variance = 0.0;
        const auto v = nqs::vmc::v_score(6, est, 0.0);
        REQUIRE(v.has_value());
        CHECK(*v == 0.0);
    }
    SUBCASE("tilted single-qubit state against Z scores exactly one") {
        const Hamiltonian h = parse_hamiltonian("%n_qubits 1\n1.0 Z\n");
        const double c = std::cos(std::acos(-1.0) / 8.0);
        const double s = std::sin(std::acos(-1.0) / 8.0);
        const TableWavefunction wf({0, 1}, {cdouble(c, 0.0), cdouble(s, 0.0)});
        const auto groups = nqs::pauli::flip_groups(h);
        const auto locals = nqs::vmc::local_energies(wf, h, groups, {0, 1});
        const auto est = nqs::vmc::energy_and_variance(locals, {c * c, s * s});
        const auto v = nqs::vmc::v_score(1, est, h.identity_weight());
        REQUIRE(v.has_value());
        CHECK(close(est.energy, std::cos(std::acos(-1.0) / 4.0), 1e-12));
        CHECK(close(*v, 1.0, 1e-10));
    }
    SUBCASE("fourteen-qubit arithmetic example") {
        nqs::vmc::EnergyEstimate est;
        est.energy = -2.1;
        est.variance = 4.41e-4;
        const auto v = nqs::vmc::v_score(14, est, 0.0);
        REQUIRE(v.has_value());
        CHECK(close(*v, 1.4e-3, 1e-12));
    }
    SUBCASE("zero denominator is reported as undefined") {
        nqs::vmc::EnergyEstimate est;
        est.energy = 0.25;
        est.variance = 1.0;
        CHECK_FALSE(nqs::vmc::v_score(4, est, 0.25).has_value());
    }
    SUBCASE("oracle ground state scores below 1e-10") {
        const Hamiltonian h = random_dense_terms(4, 10, 911);
        const auto op = nqs::oracle::build_operator(h, false);
        const auto gs = nqs::oracle::ground_state(op);
        const TableWavefunction wf(op.basis, gs.vector);
        const auto groups = nqs::pauli::flip_groups(h);
        std::vector<double> weights(op.basis.size());
        for (size_t i = 0; i < weights.size(); ++i) weights[i] = std::norm(gs.vector[i]);
        const auto locals = nqs::vmc::local_energies(wf, h, groups, op.basis);
        const auto est = nqs::vmc::energy_and_variance(locals, weights);
        const auto v = nqs::vmc::v_score(4, est, h.identity_weight());
        REQUIRE(v.has_value());
        CHECK(*v >= 0.0);
        CHECK(*v < 1e-10);
    }
}

TEST_CASE("cosine learning-rate schedule hits its pinned points") {
    const double peak = 2.5e-3;
    const double floor_v = 5e-8;
    SUBCASE("linear warmup reaches the peak at the warmup boundary") {
        CHECK(nqs::vmc::cosine_lr(0, 100, peak, floor_v, 0.04) == 0.0);
        CHECK(nqs::vmc::cosine_lr(1, 100, peak, floor_v, 0.04) == peak * 0.25);
        CHECK(nqs::vmc::cosine_lr(4, 100, peak, floor_v, 0.04) == peak);
    }
    SUBCASE("final step sits on the floor") {
        CHECK(nqs::vmc::cosine_lr(99, 100, peak, floor_v, 0.04) == floor_v);
    }
    SUBCASE("decay midpoint without warmup is the arithmetic mean") {
        CHECK(nqs::vmc::cosine_lr(0, 11, peak, floor_v, 0.0) == peak);
        CHECK(close(nqs::vmc::cosine_lr(5, 11, peak, floor_v, 0.0), 0.5 * (peak + floor_v),
                    1e-15));
        CHECK(nqs::vmc::cosine_lr(10, 11, peak, floor_v, 0.0) == floor_v);
    }
    SUBCASE("schedule is nonincreasing after warmup and stays in range") {
        double prev = std::numeric_limits<double>::infinity();
        for (long s = 4; s < 100; ++s) {
            const double lr = nqs::vmc::cosine_lr(s, 100, peak, floor_v, 0.04);
            CHECK(lr <= prev);
            CHECK(lr >= floor_v);
            CHECK(lr <= peak);
            prev = lr;
        }
    }
    SUBCASE("out-of-range steps are rejected") {
        CHECK_THROWS_AS((void)nqs::vmc::cosine_lr(-1, 100, peak, floor_v, 0.04),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)nqs::vmc::cosine_lr(100, 100, peak, floor_v, 0.04),
                        std::invalid_argument);
    }
}

TEST_CASE("geometric draw schedule spans its endpoints") {
    CHECK(nqs::vmc::geometric_draws(0, 2000, 1e4, 1e12) == 10000);
    CHECK(nqs::vmc::geometric_draws(1999, 2000, 1e4, 1e12) == 1000000000000LL);
    CHECK(nqs::vmc::geometric_draws(1, 3, 1e4, 1e12) == 100000000LL);
    CHECK(nqs::vmc::geometric_draws(0, 1, 1e4, 1e12) == 1000000000000LL);
    SUBCASE("counts never decrease along the schedule") {
        long long prev = 0;
        for (long s = 0; s < 50; ++s) {
            const long long d = nqs::vmc::geometric_draws(s, 50, 1e4, 1e12);
            CHECK(d >= prev);
            prev = d;
        }
    }
}

TEST_CASE("adam optimizer basics") {
    SUBCASE("zero gradient leaves parameters untouched") {
        nqs::vmc::AdamState st(3);
        std::vector<double> params = {1.0, -2.0, 0.5};
        const std::vector<double> before = params;
        nqs::vmc::adam_step(st, params, {0.0, 0.0, 0.0}, 1e-3);
        CHECK(params == before);
    }
    SUBCASE("first-step displacement is close to the learning rate") {
        for (double g : {1e-4, 0.5, 30.0}) {
            nqs::vmc::AdamState st(1);
            std::vector<double> params = {0.0};
            nqs::vmc::adam_step(st, params, {g}, 1e-3);
            CHECK(close(std::abs(params[0]), 1e-3 * g / (g + 1e-8), 1e-12));
        }
    }
    SUBCASE("same inputs give bit-identical trajectories") {
        nqs::vmc::AdamState s1(2), s2(2);
        std::vector<double> p1 = {0.3, -0.7}, p2 = {0.3, -0.7};
        for (int t = 0; t < 20; ++t) {
            const std::vector<double> g = {0.1 * (t + 1), -0.05 * t};
            nqs::vmc::adam_step(s1, p1, g, 2.5e-3);
            nqs::vmc::adam_step(s2, p2, g, 2.5e-3);
        }
        CHECK(p1 == p2);
    }
    SUBCASE("size mismatches are rejected") {
        nqs::vmc::AdamState st(2);
        std::vector<double> params = {1.0, 2.0};
        CHECK_THROWS_AS(nqs::vmc::adam_step(st, params, {1.0}, 1e-3), std::invalid_argument);
        std::vector<double> wrong = {1.0};
        CHECK_THROWS_AS(nqs::vmc::adam_step(st, wrong, {1.0}, 1e-3), std::invalid_argument);
    }
}

TEST_CASE("gradient vanishes when every local energy equals the baseline") {
    AnsatzConfig cfg;
    cfg.architecture = Architecture::made;
    cfg.n_qubits = 4;
    cfg.made_hidden_dims = {8};
    cfg.phase_hidden_dims = {6};
    Ansatz a(cfg);
    nudge_params(a, 0.1, 3);
    const std::vector<uint64_t> configs = {0, 3, 9};
    const std::vector<double> weights = {0.5, 0.25, 0.25};
    const std::vector<cdouble> locals(3, cdouble(-1.5, 0.0));
    const auto g = nqs::vmc::gradient(a, std::nullopt, configs, weights, locals, -1.5);
    for (double gi : g) CHECK(gi == 0.0);
}

TEST_CASE("full-enumeration gradient matches finite differences of the exact energy") {
    const Hamiltonian h = random_dense_terms(4, 10, 2024);
    const auto groups = nqs::pauli::flip_groups(h);

    AnsatzConfig cfg;
    cfg.architecture = Architecture::made;
    cfg.n_qubits = 4;
    cfg.made_hidden_dims = {10};
    cfg.phase_hidden_dims = {8};
    cfg.seed = 9;
    Ansatz a(cfg);
    nudge_params(a, 0.15, 17);
    const std::vector<double> theta = a.params().flatten();

    const ConstrainedWavefunction wf(a, std::nullopt);
    const std::vector<uint64_t> configs = feasible_configs(wf, 4);
    const std::vector<double> weights = born_weights(wf, configs);
    const auto locals = nqs::vmc::local_energies(wf, h, groups, configs);
    const double baseline = batch_energy(locals, weights);
    const auto grad = nqs::vmc::gradient(a, std::nullopt, configs, weights, locals, baseline);
    REQUIRE(grad.size() == theta.size());

    std::mt19937_64 rng(555);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double step = 1e-5;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> dir(theta.size());
        double norm = 0.0;
        for (double& d : dir) {
            d = gauss(rng);
            norm += d * d;
        }
        norm = std::sqrt(norm);
        double analytic = 0.0;
        std::vector<double> plus = theta, minus = theta;
        for (size_t i = 0; i < theta.size(); ++i) {
            dir[i] /= norm;
            analytic += grad[i] * dir[i];
            plus[i] += step * dir[i];
            minus[i] -= step * dir[i];
        }
        const double e_plus = exact_energy_at(a, std::nullopt, h, plus);
        const double e_minus = exact_energy_at(a, std::nullopt, h, minus);
        const double numeric = (e_plus - e_minus) / (2.0 * step);
        const double scale = std::max(std::abs(numeric), 1e-6);
        CHECK(std::abs(analytic - numeric) / scale < 1e-4);
    }
    a.params().assign_flat(theta);
}

TEST_CASE("sector-constrained gradient matches finite differences") {
    const Hamiltonian h = nqs::pauli::load_hamiltonian(std::string(NQS_DATA_DIR) +
                                                       "/h2_sto3g.ham");
    REQUIRE(h.constrained());
    const std::optional<nqs::pauli::Sector> sector =
        nqs::pauli::sector_of(h.n_qubits, h.n_electrons, h.multiplicity);
    const auto groups = nqs::pauli::flip_groups(h);

    AnsatzConfig cfg;
    cfg.architecture = Architecture::transformer;
    cfg.n_qubits = 4;
    cfg.d_model = 16;
    cfg.n_heads = 2;
    cfg.d_attn = 8;
    cfg.n_blocks = 1;
    cfg.seed = 3;
    Ansatz a(cfg);
    nudge_params(a, 0.1, 29);
    const std::vector<double> theta = a.params().flatten();

    const ConstrainedWavefunction wf(a, sector);
    const std::vector<uint64_t> configs = nqs::pauli::enumerate_sector(4, *sector);
    const std::vector<double> weights = born_weights(wf, configs);
    const auto locals = nqs::vmc::local_energies(wf, h, groups, configs);
    const double baseline = batch_energy(locals, weights);
    const auto grad = nqs::vmc::gradient(a, sector, configs, weights, locals, baseline);

    std::mt19937_64 rng(808);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double step = 1e-5;
    for (int trial = 0; trial < 12; ++trial) {
        std::vector<double> dir(theta.size());
        double norm = 0.0;
        for (double& d : dir) {
            d = gauss(rng);
            norm += d * d;
        }
        norm = std::sqrt(norm);
        double analytic = 0.0;
        std::vector<double> plus = theta, minus = theta;
        for (size_t i = 0; i < theta.size(); ++i) {
            dir[i] /= norm;
            analytic += grad[i] * dir[i];
            plus[i] += step * dir[i];
            minus[i] -= step * dir[i];
        }
        const double e_plus = exact_energy_at(a, sector, h, plus);
        const double e_minus = exact_energy_at(a, sector, h, minus);
        const double numeric = (e_plus - e_minus) / (2.0 * step);
        const double scale = std::max(std::abs(numeric), 1e-6);
        CHECK(std::abs(analytic - numeric) / scale < 1e-4);
    }
    a.params().assign_flat(theta);
}

TEST_CASE("doubling the hamiltonian doubles the gradient") {
    const Hamiltonian h1 = random_dense_terms(4, 8, 4242);
    std::string doubled = "%n_qubits 4\n";
    for (const auto& t : h1.terms)
        doubled += std::to_string(2.0 * t.coeff) + " " + t.ops + "\n";
    const Hamiltonian h2 = parse_hamiltonian(doubled, "doubled");

    AnsatzConfig cfg;
    cfg.architecture = Architecture::made;
    cfg.n_qubits = 4;
    cfg.made_hidden_dims = {8};
    cfg.phase_hidden_dims = {6};
    Ansatz a(cfg);
    nudge_params(a, 0.2, 71);
    const ConstrainedWavefunction wf(a, std::nullopt);
    const std::vector<uint64_t> configs = feasible_configs(wf, 4);
    const std::vector<double> weights = born_weights(wf, configs);

    const auto g1 = nqs::pauli::flip_groups(h1);
    const auto g2 = nqs::pauli::flip_groups(h2);
    const auto l1 = nqs::vmc::local_energies(wf, h1, g1, configs);
    const auto l2 = nqs::vmc::local_energies(wf, h2, g2, configs);
    const double b1 = batch_energy(l1, weights);
    const double b2 = batch_energy(l2, weights);
    CHECK(close(b2, 2.0 * b1, 1e-10));

    const auto grad1 = nqs::vmc::gradient(a, std::nullopt, configs, weights, l1, b1);
    const auto grad2 = nqs::vmc::gradient(a, std::nullopt, configs, weights, l2, b2);
    for (size_t i = 0; i < grad1.size(); ++i)
        CHECK(close(grad2[i], 2.0 * grad1[i], 1e-8 * std::max(1.0, std::abs(grad1[i]))));
}

TEST_CASE("non-finite local energies poison the gradient loudly") {
    AnsatzConfig cfg;
    cfg.architecture = Architecture::made;
    cfg.n_qubits = 4;
    cfg.made_hidden_dims = {8};
    cfg.phase_hidden_dims = {6};
    Ansatz a(cfg);
    const std::vector<uint64_t> configs = {0, 1};
    const std::vector<double> weights = {0.5, 0.5};
    const std::vector<cdouble> locals = {cdouble(std::numeric_limits<double>::quiet_NaN(), 0.0),
                                         cdouble(1.0, 0.0)};
    CHECK_THROWS_AS((void)nqs::vmc::gradient(a, std::nullopt, configs, weights, locals, 0.0),
                    std::runtime_error);
    CHECK_THROWS_AS((void)nqs::vmc::gradient(a, std::nullopt, {0}, weights, locals, 0.0),
                    std::invalid_argument);
}

TEST_CASE("training config validation") {
    nqs::vmc::TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("steps") {
        cfg.steps = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("max unique") {
        cfg.max_unique = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("draw schedule order") {
        cfg.draw_start = 1e6;
        cfg.draw_end = 1e4;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("warmup fraction bounds") {
        cfg.warmup_fraction = 0.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg.warmup_fraction = 1.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("recompute stride") {
        cfg.recompute_stride = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("training drives a single-qubit state onto the Z ground state") {
    const Hamiltonian h = nqs::pauli::load_hamiltonian(std::string(NQS_DATA_DIR) +
                                                       "/single_z.ham");
    AnsatzConfig acfg;
    acfg.architecture = Architecture::made;
    acfg.n_qubits = 1;
    acfg.made_hidden_dims = {16};
    acfg.phase_hidden_dims = {4};
    acfg.seed = 11;

    nqs::vmc::TrainConfig tcfg;
    tcfg.steps = 500;
    tcfg.max_unique = 2;
    tcfg.seed = 4;
    // The exact ground state is a corner of the simplex, so the logit gap
    // must grow past ~28 for the sampler to drop the excited config. Adam
    // moves each scalar by at most the learning rate per step, hence a hot
    // peak; the production schedule targets states far from the corner.
    tcfg.lr_peak = 4.0;

    Ansatz a(acfg);
    const auto rec = nqs::vmc::train(a, h, tcfg);
    CHECK(rec.status == "ok");
    CHECK(rec.steps == 500);
    CHECK(rec.steps_completed == 500);
    CHECK(close(rec.energy, -1.0, 1e-6));
    REQUIRE(rec.vscore.has_value());
    CHECK(*rec.vscore < 1e-10);
    REQUIRE(rec.abs_error.has_value());
    CHECK(*rec.abs_error <= 1e-6);

    CHECK(rec.n_raw == a.params().total_scalars());
    CHECK(close(rec.n_thousand, static_cast<double>(rec.n_raw) / 1000.0, 1e-15));
    CHECK(rec.b_mean >= 1.0);
    CHECK(rec.b_mean <= 2.0);
    CHECK(close(rec.scale_factor, rec.b_mean / 2.0, 1e-12));
    CHECK(close(rec.d_prime, rec.scale_factor * 500.0, 1e-9));
    CHECK(rec.flops_table1 > 0.0);
    // A purely diagonal Hamiltonian has no bit-flip groups, and the
    // simplified cost model is proportional to their count.
    CHECK(rec.flops_simplified == 0.0);
    CHECK(rec.seed == 4);

    SUBCASE("the same seed reproduces the record exactly") {
        Ansatz b(acfg);
        const auto rec2 = nqs::vmc::train(b, h, tcfg);
        CHECK(rec2.energy == rec.energy);
        CHECK(rec2.variance == rec.variance);
        CHECK(rec2.b_mean == rec.b_mean);
        CHECK(rec2.flops_table1 == rec.flops_table1);
    }
}

TEST_CASE("training rejects mismatched qubit counts") {
    const Hamiltonian h = parse_hamiltonian("%n_qubits 2\n1.0 ZZ\n");
    AnsatzConfig acfg;
    acfg.architecture = Architecture::made;
    acfg.n_qubits = 4;
    Ansatz a(acfg);
    nqs::vmc::TrainConfig tcfg;
    tcfg.steps = 5;
    CHECK_THROWS_AS((void)nqs::vmc::train(a, h, tcfg), std::invalid_argument);
}

}  // TEST_SUITE
