#include "nqs/vmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nqs/flops.hpp"
#include "nqs/oracle.hpp"
#include "nqs/parallel.hpp"
#include "nqs/wavefunction.hpp"

namespace nqs::vmc {

namespace {

constexpr size_t kGradBlock = 8;

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double weighted_real_mean(const std::vector<std::complex<double>>& locals,
                          const std::vector<double>& weights) {
    double e = 0.0;
    for (size_t i = 0; i < locals.size(); ++i) e += weights[i] * locals[i].real();
    return e;
}

}  // namespace

std::vector<std::complex<double>> local_energies(const Wavefunction& wf,
                                                 const pauli::Hamiltonian& h,
                                                 const pauli::FlipGroups& groups,
                                                 const std::vector<uint64_t>& configs) {
    std::vector<std::complex<double>> out(configs.size());
    parallel::parallel_for(configs.size(), [&](size_t i) { out[i] = local_energy(wf, h, groups, configs[i]); });
    return out;
}

EnergyEstimate energy_and_variance(const std::vector<std::complex<double>>& locals,
                                   const std::vector<double>& weights) {
    if (locals.empty() || locals.size() != weights.size())
        throw std::invalid_argument("locals and weights must be non-empty and aligned");
    std::complex<double> mean(0.0, 0.0);
    for (size_t i = 0; i < locals.size(); ++i) mean += weights[i] * locals[i];
    double var = 0.0;
    for (size_t i = 0; i < locals.size(); ++i) var += weights[i] * std::norm(locals[i] - mean);
    EnergyEstimate est;
    est.energy = weighted_real_mean(locals, weights);
    est.variance = std::max(0.0, var);
    est.unique_count = static_cast<long>(locals.size());
    return est;
}

std::optional<double> v_score(int n_qubits, const EnergyEstimate& est, double identity_weight) {
    const double gap = est.energy - identity_weight;
    if (gap * gap == 0.0) return std::nullopt;
    return static_cast<double>(n_qubits) * est.variance / (gap * gap);
}

std::vector<double> gradient(const ansatz::Ansatz& a, const std::optional<pauli::Sector>& sector,
                             const std::vector<uint64_t>& configs,
                             const std::vector<double>& weights,
                             const std::vector<std::complex<double>>& locals, double baseline) {
    if (configs.size() != weights.size() || configs.size() != locals.size())
        throw std::invalid_argument("gradient inputs must be aligned");
    const size_t p = static_cast<size_t>(a.params().total_scalars());
    std::vector<double> total(p, 0.0);

    // Per-sample tapes run in parallel inside fixed-size blocks; block sums
    // are folded serially in sample order so the result does not depend on
    // the thread count.
    std::vector<std::vector<double>> slot(kGradBlock);
    for (size_t start = 0; start < configs.size(); start += kGradBlock) {
        const size_t len = std::min(kGradBlock, configs.size() - start);
        for (size_t j = 0; j < len; ++j) slot[j].clear();
        parallel::parallel_for(len, [&](size_t j) {
            const size_t i = start + j;
            const double alpha = weights[i] * (locals[i].real() - baseline);
            const double gamma = 2.0 * weights[i] * locals[i].imag();
            if (alpha == 0.0 && gamma == 0.0) return;
            Tape tape;
            ParamBinding binding = ParamBinding::bind(tape, a.params());
            const ansatz::SampleGraph g = a.build_sample_graph(tape, binding.node_ids, configs[i], sector);
            const int scalar = tape.add(tape.scale(g.log_prob, alpha), tape.scale(g.phase, gamma));
            tape.backward(scalar);
            slot[j] = binding.gather_grad(tape, a.params());
        });
        for (size_t j = 0; j < len; ++j) {
            if (slot[j].empty()) continue;
            for (size_t k = 0; k < p; ++k) total[k] += slot[j][k];
        }
    }
    for (double g : total)
        if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient");
    return total;
}

double cosine_lr(long step, long total_steps, double peak, double floor_value,
                 double warmup_fraction) {
    if (step < 0 || step >= total_steps) throw std::invalid_argument("step out of range");
    const double w = warmup_fraction * static_cast<double>(total_steps);
    const double s = static_cast<double>(step);
    if (s <= w) return w > 0.0 ? peak * s / w : peak;
    const double span = static_cast<double>(total_steps - 1) - w;
    if (span <= 0.0 || s - w >= span) return floor_value;
    constexpr double pi = 3.141592653589793238462643383279502884;
    return floor_value + (peak - floor_value) * 0.5 * (1.0 + std::cos(pi * (s - w) / span));
}

long long geometric_draws(long step, long total_steps, double start, double end) {
    if (total_steps <= 1) return static_cast<long long>(std::llround(end));
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps - 1);
    return static_cast<long long>(std::llround(start * std::pow(end / start, frac)));
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               double lr) {
    if (state.m.size() != params.size() || grad.size() != params.size())
        throw std::invalid_argument("optimizer state size mismatch");
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    state.t += 1;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
        params[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + eps);
    }
}

void TrainConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("steps must be positive");
    if (max_unique < 1) throw std::invalid_argument("max_unique must be positive");
    if (draw_start < 1.0 || draw_end < draw_start)
        throw std::invalid_argument("draw schedule must be increasing and at least 1");
    if (warmup_fraction <= 0.0 || warmup_fraction >= 1.0)
        throw std::invalid_argument("warmup fraction must lie in (0,1)");
    if (recompute_stride < 1) throw std::invalid_argument("recompute stride must be positive");
}

RunRecord train(ansatz::Ansatz& a, const pauli::Hamiltonian& h, const TrainConfig& cfg) {
    cfg.validate();
    if (a.config().n_qubits != h.n_qubits)
        throw std::invalid_argument("ansatz and hamiltonian qubit counts differ");
    const std::optional<pauli::Sector> sector =
        h.constrained() ? std::optional<pauli::Sector>(
                              pauli::sector_of(h.n_qubits, h.n_electrons, h.multiplicity))
                        : std::nullopt;
    const ansatz::ConstrainedWavefunction wf(a, sector);
    const pauli::FlipGroups groups = pauli::flip_groups(h);
    ParameterStore& store = a.params();

    std::vector<double> flat = store.flatten();
    AdamState opt(flat.size());

    RunRecord rec;
    rec.steps = cfg.steps;
    rec.max_unique = cfg.max_unique;
    rec.seed = cfg.seed;
    rec.n_raw = store.total_scalars();
    rec.n_thousand = static_cast<double>(rec.n_raw) / 1000.0;

    sampler::SampleBatch batch;
    std::vector<std::complex<double>> locals;
    std::vector<double> weights;
    double baseline = 0.0;
    EnergyEstimate last_estimate;
    bool have_estimate = false;
    double unique_sum = 0.0;

    const double tail_start = cfg.stride_phase_end * static_cast<double>(cfg.steps);
    try {
        for (long t = 0; t < cfg.steps; ++t) {
            const bool tail = static_cast<double>(t) >= tail_start;
            if (t == 0 || tail || t % cfg.recompute_stride == 0) {
                const long long draws = geometric_draws(t, cfg.steps, cfg.draw_start, cfg.draw_end);
                batch = sampler::sample_unique(wf, draws, cfg.max_unique, mix_seed(cfg.seed, t));
                locals = local_energies(wf, h, groups, batch.configs);
                weights = batch.weights();
                baseline = weighted_real_mean(locals, weights);
                last_estimate = energy_and_variance(locals, weights);
                have_estimate = true;
                if (!std::isfinite(baseline)) throw std::runtime_error("non-finite energy");
            }
            unique_sum += static_cast<double>(batch.unique_count());
            const std::vector<double> g = gradient(a, sector, batch.configs, weights, locals, baseline);
            adam_step(opt, flat, g, cosine_lr(t, cfg.steps, cfg.lr_peak, cfg.lr_floor, cfg.warmup_fraction));
            store.assign_flat(flat);
            rec.steps_completed = t + 1;
        }
    } catch (const std::runtime_error&) {
        rec.status = "diverged";
    }

    if (rec.status == "ok") {
        try {
            const long long draws =
                geometric_draws(cfg.steps - 1, cfg.steps, cfg.draw_start, cfg.draw_end);
            batch = sampler::sample_unique(wf, draws, cfg.max_unique,
                                           mix_seed(cfg.seed, static_cast<uint64_t>(cfg.steps)));
            locals = local_energies(wf, h, groups, batch.configs);
            last_estimate = energy_and_variance(locals, batch.weights());
            have_estimate = true;
        } catch (const std::runtime_error&) {
            rec.status = "diverged";
        }
    }

    rec.b_mean = unique_sum / static_cast<double>(std::max(rec.steps_completed, 1L));
    if (have_estimate) {
        rec.energy = last_estimate.energy;
        rec.variance = last_estimate.variance;
        if (rec.status == "ok")
            rec.vscore = v_score(h.n_qubits, last_estimate, h.identity_weight());
    } else {
        rec.energy = std::nan("");
        rec.variance = std::nan("");
    }

    const double space =
        h.constrained()
            ? static_cast<double>(pauli::search_space_size(h.n_qubits, h.n_electrons, h.multiplicity))
            : std::pow(2.0, h.n_qubits);
    rec.scale_factor = rec.b_mean / space;
    rec.d_prime = static_cast<double>(cfg.steps) * rec.scale_factor;

    if (rec.status == "ok") {
        if (h.fci) {
            rec.abs_error = std::abs(rec.energy - *h.fci);
        } else if (h.n_qubits <= 20) {
            try {
                rec.abs_error = std::abs(rec.energy - oracle::reference_ground_energy(h, cfg.seed));
            } catch (const std::exception&) {
                rec.abs_error = std::nullopt;
            }
        }
    }

    flops::FlopInputs fin;
    fin.n_qubits = static_cast<double>(h.n_qubits);
    fin.b_mean = std::max(1.0, rec.b_mean);
    fin.t_steps = static_cast<double>(cfg.steps);
    fin.m_groups = static_cast<double>(groups.group_count());
    fin.n_mod = static_cast<double>(a.mod_param_count());
    fin.n_ph = static_cast<double>(a.phase_param_count());
    fin.n_blocks = static_cast<double>(a.config().n_blocks);
    fin.d_model = static_cast<double>(a.config().d_model);
    rec.flops_table1 = flops::training_flops(a.config().architecture, fin);
    rec.flops_simplified =
        flops::simplified_flops(a.config().architecture, fin.m_groups, fin.n_qubits, fin.d_model,
                                space, rec.d_prime, static_cast<double>(rec.n_raw));
    return rec;
}

}  // namespace nqs::vmc
