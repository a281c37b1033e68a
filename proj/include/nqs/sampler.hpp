#pragma once

#include <cstdint>
#include <vector>

#include "nqs/ansatz.hpp"

namespace nqs::sampler {

// Result of one ancestral sampling pass: unique configurations in ascending
// order with their multiplicities. counts sum to total_draws.
struct SampleBatch {
    std::vector<uint64_t> configs;
    std::vector<long long> counts;
    long long total_draws = 0;

    size_t unique_count() const { return configs.size(); }
    std::vector<double> weights() const;  // counts / total_draws
};

// Breadth-first exact multinomial sampling over the masked conditional chain.
// Every partial branch carries an integer multiplicity; at each orbital site
// the multiplicity is split across outcomes by sequential binomial draws, so
// no amplitude is ever evaluated twice for the same prefix. When the frontier
// exceeds max_unique it is truncated to the heaviest branches and the dropped
// multiplicity is redistributed proportionally (largest remainder).
SampleBatch sample_unique(const ansatz::ConstrainedWavefunction& wf, long long total_draws,
                          long max_unique, uint64_t seed);

// log Pr(x) for each configuration under the same masked chain the sampler
// walks; equals 2 * Re(log_amplitude).
std::vector<double> batch_log_probs(const ansatz::ConstrainedWavefunction& wf,
                                    const std::vector<uint64_t>& configs);

}  // namespace nqs::sampler
