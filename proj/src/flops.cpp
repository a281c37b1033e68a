#include "nqs/flops.hpp"

#include <cmath>
#include <stdexcept>

namespace nqs::flops {

namespace {

double log4(double b) { return std::log(b) / std::log(4.0); }

// floor(log4(b)) computed by integer multiplication so exact powers of four
// land on the right side of the boundary.
long floor_log4(double b) {
    long k = 0;
    double p = 4.0;
    while (p <= b) {
        ++k;
        p *= 4.0;
    }
    return k;
}

}  // namespace

double forward_flops(ansatz::Architecture arch, ForwardMode mode, double n_total, double n_seq,
                     double n_blocks, double d_attn) {
    switch (arch) {
        case ansatz::Architecture::made:
            if (mode != ForwardMode::full)
                throw std::invalid_argument("made has only a full forward pass");
            return 3.0 * n_total;
        case ansatz::Architecture::transformer:
            if (mode != ForwardMode::parallel)
                throw std::invalid_argument("transformer has only a parallel forward pass");
            return n_seq * (2.0 * n_total + 4.0 * n_blocks * n_seq * d_attn);
        case ansatz::Architecture::retnet:
            if (mode == ForwardMode::parallel)
                return n_seq * (2.0 * n_total + 4.0 * n_blocks * n_seq * d_attn);
            if (mode == ForwardMode::recurrent)
                return n_seq * (2.0 * n_total + 5.0 * n_blocks * d_attn * d_attn);
            throw std::invalid_argument("retnet forward is parallel or recurrent");
    }
    throw std::invalid_argument("unknown architecture");
}

double per_token_modulus_flops(ansatz::Architecture arch, double n_mod, double n_qubits,
                               double n_blocks, double d_model) {
    switch (arch) {
        case ansatz::Architecture::made: return 6.0 * n_mod / n_qubits;
        case ansatz::Architecture::retnet: return 2.0 * n_mod + 5.0 * n_blocks * d_model * d_model;
        case ansatz::Architecture::transformer:
            throw std::invalid_argument("transformer per-token cost depends on the prefix length");
    }
    throw std::invalid_argument("unknown architecture");
}

double sampling_flops(double f_mod, double t_steps, double b_mean, double n_qubits) {
    if (b_mean < 1.0) throw std::invalid_argument("b_mean must be at least 1");
    const long kmax = floor_log4(b_mean);
    double frontier_sum = 0.0;
    double pow4 = 1.0;
    for (long m = 0; m < kmax; ++m) {
        frontier_sum += pow4;
        pow4 *= 4.0;
    }
    return f_mod * t_steps * (frontier_sum + b_mean * (n_qubits / 2.0 - static_cast<double>(kmax)));
}

double transformer_sampling_flops(double t_steps, double b_mean, double n_qubits, double n_mod,
                                  double n_blocks, double d_model) {
    if (b_mean < 1.0) throw std::invalid_argument("b_mean must be at least 1");
    const long kmax = floor_log4(b_mean);
    double total = 0.0;
    double pow4 = 1.0;
    for (long m = 0; m < kmax; ++m) {
        total += static_cast<double>(m + 1) * pow4 *
                 (2.0 * n_mod + 4.0 * static_cast<double>(m + 1) * n_blocks * d_model);
        pow4 *= 4.0;
    }
    const long half = static_cast<long>(n_qubits / 2.0);
    for (long m = kmax + 1; m <= half; ++m)
        total += b_mean * (2.0 * n_mod + 4.0 * static_cast<double>(m) * n_blocks * d_model);
    return t_steps * total;
}

double loss_flops(double f_mod, double f_ph, double b_mean, double t_steps, double m_groups,
                  double n_qubits) {
    return b_mean * t_steps * (m_groups + 3.0) * ((n_qubits / 2.0) * f_mod + f_ph);
}

double training_flops(ansatz::Architecture arch, const FlopInputs& in) {
    const double n = in.n_qubits, b = in.b_mean, t = in.t_steps, m = in.m_groups;
    const double lg = b > 1.0 ? log4(b) : 0.0;
    switch (arch) {
        case ansatz::Architecture::made:
            return b * t * ((1.5 * n + 3.0 * m + 10.0 - 3.0 * lg) * in.n_mod +
                            2.0 * (m + 3.0) * in.n_ph);
        case ansatz::Architecture::retnet:
            return b * t *
                   (((m + 4.0) * n - 2.0 * lg) * in.n_mod + 2.0 * (m + 3.0) * in.n_ph +
                    in.n_blocks * in.d_model *
                        (2.5 * in.d_model * ((m + 1.0) * n - 2.0 * lg) + 3.0 * n * n));
        case ansatz::Architecture::transformer:
            return b * t *
                   (((m + 4.0) * n - (4.0 / 3.0) * lg) * in.n_mod + 2.0 * (m + 3.0) * in.n_ph +
                    in.n_blocks * in.d_model *
                        ((m + 3.5) * n * n - (8.0 / 9.0) * lg - (2.0 / 3.0) * lg * lg));
    }
    throw std::invalid_argument("unknown architecture");
}

double simplified_flops(ansatz::Architecture arch, double m_groups, double n_qubits,
                        double d_model, double search_space, double d_prime, double n_raw) {
    const double scale = search_space * d_prime * n_raw;
    switch (arch) {
        case ansatz::Architecture::made: return 3.0 * m_groups * scale;
        case ansatz::Architecture::retnet:
            return (15.5 * m_groups * n_qubits + 3.0 * n_qubits * n_qubits / d_model) / 13.0 * scale;
        case ansatz::Architecture::transformer:
            return m_groups * (n_qubits + n_qubits * n_qubits / (12.0 * d_model)) * scale;
    }
    throw std::invalid_argument("unknown architecture");
}

}  // namespace nqs::flops
