#pragma once

#include "nqs/ansatz.hpp"

namespace nqs::flops {

enum class ForwardMode { full, parallel, recurrent };

// Cost of one forward pass over a whole configuration. n_total is the full
// parameter count the pass touches (modulus or modulus + phase, caller's
// choice); d_attn is the model width in these estimates.
double forward_flops(ansatz::Architecture arch, ForwardMode mode, double n_total, double n_seq,
                     double n_blocks, double d_attn);

// Per-token modulus forward cost entering the sampling estimate. The
// transformer has no flat per-token cost (its incremental pass grows with the
// prefix); use transformer_sampling_flops for it.
double per_token_modulus_flops(ansatz::Architecture arch, double n_mod, double n_qubits,
                               double n_blocks, double d_model);

// Ancestral-sampling cost for a flat per-token forward cost f_mod: the
// frontier saturates at b_mean unique branches after log4(b_mean) sites.
double sampling_flops(double f_mod, double t_steps, double b_mean, double n_qubits);

// Incremental-pass sampling cost for the transformer, excluding padding
// tokens: position m costs 2*N_mod + 4*m*n_blocks*d_model per branch.
double transformer_sampling_flops(double t_steps, double b_mean, double n_qubits, double n_mod,
                                  double n_blocks, double d_model);

// Cost of building and backpropagating the stochastic loss: M + 3 full
// forward-scale passes per sample (M connected passes, one denominator, two
// for the backward sweep).
double loss_flops(double f_mod, double f_ph, double b_mean, double t_steps, double m_groups,
                  double n_qubits);

struct FlopInputs {
    double n_qubits = 0;
    double b_mean = 1;   // mean unique batch size
    double t_steps = 1;
    double m_groups = 0;  // off-diagonal flip groups
    double n_mod = 0;
    double n_ph = 0;
    double n_blocks = 1;
    double d_model = 8;
};

// Closed-form total training cost per architecture; log means log base 4 and
// is kept real (not floored).
double training_flops(ansatz::Architecture arch, const FlopInputs& in);

// Reduced forms for sector-constrained scaling analysis, linear in D' and in
// the raw parameter count.
double simplified_flops(ansatz::Architecture arch, double m_groups, double n_qubits,
                        double d_model, double search_space, double d_prime, double n_raw);

}  // namespace nqs::flops
