#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nqs/ansatz.hpp"
#include "nqs/pauli.hpp"
#include "nqs/sampler.hpp"

namespace nqs::vmc {

// Local energies for a batch of unique configurations, evaluated in parallel
// with per-slot writes so the result is independent of the thread count.
std::vector<std::complex<double>> local_energies(const Wavefunction& wf,
                                                 const pauli::Hamiltonian& h,
                                                 const pauli::FlipGroups& groups,
                                                 const std::vector<uint64_t>& configs);

struct EnergyEstimate {
    double energy = 0.0;       // weighted mean of Re(l)
    double variance = 0.0;     // weighted modulus-squared spread, clamped >= 0
    long unique_count = 0;
};

// Count-weighted mean and population variance of the local energies; weights
// must sum to 1.
EnergyEstimate energy_and_variance(const std::vector<std::complex<double>>& locals,
                                   const std::vector<double>& weights);

// n * variance / (energy - identity_weight)^2; empty when the denominator is
// exactly zero.
std::optional<double> v_score(int n_qubits, const EnergyEstimate& est, double identity_weight);

// Weighted stochastic gradient 2 Re E[(l - b) conj(grad log psi)]: the real
// part of (l - b) drives the log-probability term, the imaginary part drives
// the phase term, and nothing flows through the local energies themselves.
std::vector<double> gradient(const ansatz::Ansatz& a, const std::optional<pauli::Sector>& sector,
                             const std::vector<uint64_t>& configs,
                             const std::vector<double>& weights,
                             const std::vector<std::complex<double>>& locals, double baseline);

// Linear ramp 0 -> peak over the first warmup fraction of steps, cosine decay
// to the floor at step total-1.
double cosine_lr(long step, long total_steps, double peak, double floor_value,
                 double warmup_fraction);

// Geometric interpolation of the per-step draw count between the schedule
// endpoints.
long long geometric_draws(long step, long total_steps, double start, double end);

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    explicit AdamState(size_t size) : m(size, 0.0), v(size, 0.0) {}
};

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               double lr);

struct TrainConfig {
    long steps = 2000;
    long max_unique = 16;
    double draw_start = 1e4;
    double draw_end = 1e12;
    double lr_peak = 2.5e-3;
    double lr_floor = 5e-8;
    double warmup_fraction = 0.04;
    long recompute_stride = 10;      // batch/local reuse during the early phase
    double stride_phase_end = 0.9;   // fraction of steps after which every step resamples
    uint64_t seed = 1;

    void validate() const;
};

struct RunRecord {
    long n_raw = 0;            // total trainable scalars
    double n_thousand = 0.0;   // n_raw / 1000
    long steps = 0;
    long steps_completed = 0;
    long max_unique = 0;
    double b_mean = 0.0;       // mean unique batch size over all steps
    double scale_factor = 0.0; // b_mean / search space size
    double d_prime = 0.0;      // steps * scale_factor
    double energy = 0.0;
    double variance = 0.0;
    std::optional<double> vscore;
    std::optional<double> abs_error;
    double flops_table1 = 0.0;
    double flops_simplified = 0.0;
    std::string status = "ok";
    uint64_t seed = 0;
};

// Full variational training loop: geometric draw schedule, batch reuse on the
// given stride for the first 90% of steps, gradient step every step, and a
// fresh full evaluation at the final draw count for the reported energy.
// Divergence (any non-finite value) stops early with status "diverged".
RunRecord train(ansatz::Ansatz& a, const pauli::Hamiltonian& h, const TrainConfig& cfg);

}  // namespace nqs::vmc
