#include "nqs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nqs/parallel.hpp"

namespace nqs::sampler {

namespace {

struct Branch {
    std::unique_ptr<ansatz::ConditionalStream> stream;
    long long count = 0;
    uint64_t config = 0;
};

// Keep the heaviest max_unique branches and hand the dropped multiplicity
// back to the survivors in proportion to their weight, largest remainder
// first so the total is conserved exactly.
void truncate_frontier(std::vector<Branch>& frontier, long max_unique) {
    if (static_cast<long>(frontier.size()) <= max_unique) return;
    std::sort(frontier.begin(), frontier.end(), [](const Branch& a, const Branch& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.config < b.config;
    });
    long long dropped = 0;
    for (size_t i = static_cast<size_t>(max_unique); i < frontier.size(); ++i)
        dropped += frontier[i].count;
    frontier.resize(static_cast<size_t>(max_unique));

    long long kept = 0;
    for (const Branch& b : frontier) kept += b.count;
    long long assigned = 0;
    std::vector<std::pair<double, size_t>> remainders;
    remainders.reserve(frontier.size());
    for (size_t i = 0; i < frontier.size(); ++i) {
        const double ideal = static_cast<double>(dropped) * static_cast<double>(frontier[i].count) /
                             static_cast<double>(kept);
        const long long base = static_cast<long long>(std::floor(ideal));
        frontier[i].count += base;
        assigned += base;
        remainders.push_back({ideal - static_cast<double>(base), i});
    }
    std::sort(remainders.begin(), remainders.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return frontier[a.second].config < frontier[b.second].config;
    });
    for (long long r = 0; r < dropped - assigned; ++r) frontier[remainders[static_cast<size_t>(r)].second].count += 1;
}

}  // namespace

std::vector<double> SampleBatch::weights() const {
    std::vector<double> w(counts.size());
    for (size_t i = 0; i < counts.size(); ++i)
        w[i] = static_cast<double>(counts[i]) / static_cast<double>(total_draws);
    return w;
}

SampleBatch sample_unique(const ansatz::ConstrainedWavefunction& wf, long long total_draws,
                          long max_unique, uint64_t seed) {
    if (total_draws < 1) throw std::invalid_argument("total_draws must be positive");
    if (max_unique < 1) throw std::invalid_argument("max_unique must be positive");
    const long sites = wf.underlying().config().sites();

    std::mt19937_64 rng(seed);
    std::vector<Branch> frontier;
    frontier.push_back({wf.stream(), total_draws, 0});

    for (long s = 0; s < sites; ++s) {
        std::vector<Branch> next;
        next.reserve(frontier.size() * 2);
        for (Branch& br : frontier) {
            const auto lp = br.stream->next_log_conditionals();
            std::array<double, 4> p{};
            for (int o = 0; o < 4; ++o) p[static_cast<size_t>(o)] = std::exp(lp[static_cast<size_t>(o)]);

            int last_nonzero = -1;
            for (int o = 0; o < 4; ++o)
                if (p[static_cast<size_t>(o)] > 0.0) last_nonzero = o;
            if (last_nonzero < 0) throw std::runtime_error("sampler hit a branch with no feasible outcome");

            long long remaining = br.count;
            double mass = 0.0;
            for (double v : p) mass += v;
            std::array<long long, 4> split{};
            for (int o = 0; o < 4; ++o) {
                const double po = p[static_cast<size_t>(o)];
                if (po <= 0.0) continue;
                long long c;
                if (o == last_nonzero) {
                    c = remaining;
                } else if (remaining == 0) {
                    c = 0;
                } else {
                    const double q = std::min(1.0, std::max(0.0, mass > 0.0 ? po / mass : 1.0));
                    std::binomial_distribution<long long> dist(remaining, q);
                    c = dist(rng);
                }
                split[static_cast<size_t>(o)] = c;
                remaining -= c;
                mass -= po;
            }

            for (int o = 0; o < 4; ++o) {
                if (split[static_cast<size_t>(o)] == 0) continue;
                Branch child;
                child.count = split[static_cast<size_t>(o)];
                child.stream = o == last_nonzero ? std::move(br.stream) : br.stream->clone();
                child.stream->advance(o);
                child.config = child.stream->partial_config();
                next.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
        truncate_frontier(frontier, max_unique);
    }

    std::sort(frontier.begin(), frontier.end(),
              [](const Branch& a, const Branch& b) { return a.config < b.config; });
    SampleBatch batch;
    batch.total_draws = total_draws;
    batch.configs.reserve(frontier.size());
    batch.counts.reserve(frontier.size());
    for (const Branch& b : frontier) {
        batch.configs.push_back(b.config);
        batch.counts.push_back(b.count);
    }
    return batch;
}

std::vector<double> batch_log_probs(const ansatz::ConstrainedWavefunction& wf,
                                    const std::vector<uint64_t>& configs) {
    std::vector<double> out(configs.size());
    parallel::parallel_for(configs.size(), [&](size_t i) { out[i] = wf.log_prob(configs[i]); });
    return out;
}

}  // namespace nqs::sampler
