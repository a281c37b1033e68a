#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nqs/params.hpp"
#include "nqs/pauli.hpp"
#include "nqs/tape.hpp"
#include "nqs/wavefunction.hpp"

namespace nqs::ansatz {

enum class Architecture { made, transformer, retnet };

Architecture parse_architecture(const std::string& name);
std::string architecture_name(Architecture a);

struct AnsatzConfig {
    Architecture architecture = Architecture::made;
    int n_qubits = 0;
    long d_model = 16;
    long n_blocks = 1;
    long n_heads = 2;
    long d_attn = 8;  // per head; d_model = n_heads * d_attn
    long feedforward_dim = 0;  // 0 resolves to 4 * d_model
    std::vector<long> made_hidden_dims = {64};
    std::vector<long> phase_hidden_dims = {64};
    uint64_t seed = 1;

    long sites() const { return (n_qubits + 1) / 2; }
    void validate() const;
};

// Per-position categorical log-probabilities. MADE rows hold two entries
// (qubit unoccupied/occupied); transformer and retnet rows hold four orbital
// outcomes (empty, up, down, double). Unused tail entries are -inf.
struct ConditionalDistribution {
    int outcomes = 0;
    std::vector<std::array<double, 4>> rows;
};

// Outcome feasibility at one orbital site given electrons already placed.
std::array<bool, 4> feasible_outcomes(const pauli::Sector& s, long sites_total, long site,
                                      long up_used, long down_used);

// Masks the infeasible entries of a 1x4 logit row to near -inf and returns
// renormalized log-probabilities. Throws if the partial placement can no
// longer reach the target counts at all.
Tensor apply_particle_constraint(const Tensor& logits_row, const pauli::Sector& s,
                                 long sites_total, long site, long up_used, long down_used);

// Per-branch cursor over the masked conditional chain, used both by the
// sampler's breadth-first expansion and by sequential log-prob evaluation.
// Outcomes are orbital tokens; a trailing half site (odd n_qubits) exposes
// only outcomes {0, 1}, interpreted as the final qubit value.
class ConditionalStream {
public:
    virtual ~ConditionalStream() = default;
    virtual std::array<double, 4> next_log_conditionals() = 0;
    virtual void advance(int outcome) = 0;
    virtual std::unique_ptr<ConditionalStream> clone() const = 0;
    virtual long site() const = 0;
    virtual uint64_t partial_config() const = 0;
};

// Recurrent retention state: one d_attn x d_attn accumulator per (block,
// head) plus the absolute position of the next token to be consumed.
struct RetnetState {
    std::vector<Tensor> s;
    long t = 0;
};

// Node ids of the scalar outputs of one per-sample tape graph.
struct SampleGraph {
    int log_prob = -1;  // log Pr(x) under the (optionally masked) chain
    int phase = -1;     // real phase output
};

class Ansatz {
public:
    explicit Ansatz(const AnsatzConfig& cfg);

    const AnsatzConfig& config() const { return cfg_; }
    ParameterStore& params() { return store_; }
    const ParameterStore& params() const { return store_; }

    long mod_param_count() const;    // closed form; asserted against the store
    long phase_param_count() const;

    // Unmasked conditional tables. `tokens` are realized orbital outcomes;
    // row j of the result conditions on tokens[0..j-1].
    ConditionalDistribution made_forward(uint64_t x) const;
    ConditionalDistribution transformer_forward(const std::vector<int>& tokens) const;
    ConditionalDistribution retnet_forward_parallel(const std::vector<int>& tokens) const;

    RetnetState retnet_start() const;
    // Consumes one token (4 = begin marker) and returns the unmasked log
    // conditionals for the position after it.
    std::array<double, 4> retnet_forward_recurrent(RetnetState& state, int next_token) const;

    double phase_forward(uint64_t x) const;

    // Full per-sample graph on an external tape with bound parameter nodes
    // (one per store item, in order). Masking follows `sector` when present.
    SampleGraph build_sample_graph(Tape& tape, const std::vector<int>& param_nodes, uint64_t x,
                                   const std::optional<pauli::Sector>& sector) const;

    std::unique_ptr<ConditionalStream> stream(const std::optional<pauli::Sector>& sector) const;

private:
    friend class MadeStream;
    friend class TransformerStream;
    friend class RetnetStream;
    friend class ConstrainedWavefunction;

    void init_params();
    // Shared forward builders; param node ids align with store items.
    int modulus_logits(Tape& tape, const std::vector<int>& pnodes, uint64_t x) const;  // MADE, 1 x n
    int sequence_logits(Tape& tape, const std::vector<int>& pnodes,
                        const std::vector<int>& tokens) const;  // rows x 4
    int retnet_step(Tape& tape, const std::vector<int>& pnodes, int token, long position,
                    std::vector<Tensor>& s_inout) const;  // 1 x 4 logits
    int phase_node(Tape& tape, const std::vector<int>& pnodes, uint64_t x) const;
    std::vector<int> constant_binding(Tape& tape) const;
    int pnode(const std::vector<int>& pnodes, const std::string& name) const;

    AnsatzConfig cfg_;
    ParameterStore store_;
    std::vector<Tensor> made_masks_;   // one per layer, constant
    std::vector<double> gammas_;       // per-head retention decay
    Tensor rot_theta_;                 // fixed per-pair rotation angles, 1 x d_attn/2
};

// Ansatz plus optional particle-number sector; the Wavefunction the sampler,
// trainer, and oracle all consume.
class ConstrainedWavefunction final : public Wavefunction {
public:
    ConstrainedWavefunction(const Ansatz& a, std::optional<pauli::Sector> sector);

    std::complex<double> log_amplitude(uint64_t x) const override;
    bool feasible(uint64_t x) const override;
    double log_prob(uint64_t x) const;  // 2 * Re(log_amplitude), same chain

    std::unique_ptr<ConditionalStream> stream() const;
    const Ansatz& underlying() const { return *ansatz_; }
    const std::optional<pauli::Sector>& sector() const { return sector_; }

private:
    const Ansatz* ansatz_;
    std::optional<pauli::Sector> sector_;
};

}  // namespace nqs::ansatz
