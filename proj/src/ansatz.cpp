#include "nqs/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nqs::ansatz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaskFill = -1e30;
constexpr int kBosToken = 4;

bool bit(uint64_t x, long q) { return (x >> q) & 1ULL; }

Tensor spin_input(uint64_t x, int n) {
    Tensor t = Tensor::zeros({1, n});
    for (int q = 0; q < n; ++q) t.v[static_cast<size_t>(q)] = bit(x, q) ? 1.0 : -1.0;
    return t;
}

std::vector<int> config_tokens(uint64_t x, int n) {
    std::vector<int> toks(static_cast<size_t>(n / 2));
    for (int s = 0; s < n / 2; ++s)
        toks[static_cast<size_t>(s)] = (bit(x, 2 * s) ? 1 : 0) | (bit(x, 2 * s + 1) ? 2 : 0);
    return toks;
}

// Binary occupancy feasibility for one qubit slot of the given spin.
void binary_allow(long target, long used, long slots_after, bool& allow0, bool& allow1) {
    allow1 = used < target;
    allow0 = (target - used) <= slots_after;
}

}  // namespace

Architecture parse_architecture(const std::string& name) {
    if (name == "made") return Architecture::made;
    if (name == "transformer") return Architecture::transformer;
    if (name == "retnet") return Architecture::retnet;
    throw std::invalid_argument("unknown architecture: " + name);
}

std::string architecture_name(Architecture a) {
    switch (a) {
        case Architecture::made: return "made";
        case Architecture::transformer: return "transformer";
        case Architecture::retnet: return "retnet";
    }
    return "?";
}

void AnsatzConfig::validate() const {
    if (n_qubits < 1 || n_qubits > 64) throw std::invalid_argument("n_qubits must lie in [1,64]");
    for (long h : phase_hidden_dims)
        if (h < 1) throw std::invalid_argument("phase hidden dims must be positive");
    if (architecture == Architecture::made) {
        for (long h : made_hidden_dims)
            if (h < 1) throw std::invalid_argument("made hidden dims must be positive");
        return;
    }
    if (n_qubits % 2 != 0)
        throw std::invalid_argument("sequence architectures need an even qubit count");
    if (d_attn != 8) throw std::invalid_argument("attention/retention head width is fixed at 8");
    if (n_heads < 1 || d_model != n_heads * d_attn)
        throw std::invalid_argument("d_model must equal n_heads * 8");
    if (n_blocks < 1) throw std::invalid_argument("n_blocks must be positive");
    if (feedforward_dim != 0 && feedforward_dim != 4 * d_model)
        throw std::invalid_argument("feedforward width is fixed at 4 * d_model");
}

std::array<bool, 4> feasible_outcomes(const pauli::Sector& s, long sites_total, long site,
                                      long up_used, long down_used) {
    std::array<bool, 4> ok{};
    const long rem = sites_total - site - 1;
    for (int o = 0; o < 4; ++o) {
        const long du = o & 1, dd = (o >> 1) & 1;
        ok[static_cast<size_t>(o)] = up_used + du <= s.n_up && down_used + dd <= s.n_down &&
                                     s.n_up - up_used - du <= rem && s.n_down - down_used - dd <= rem;
    }
    return ok;
}

Tensor apply_particle_constraint(const Tensor& logits_row, const pauli::Sector& s,
                                 long sites_total, long site, long up_used, long down_used) {
    if (logits_row.rank() != 2 || logits_row.rows() != 1 || logits_row.cols() != 4)
        throw std::invalid_argument("constraint masking expects a 1x4 logit row");
    const auto ok = feasible_outcomes(s, sites_total, site, up_used, down_used);
    if (!ok[0] && !ok[1] && !ok[2] && !ok[3])
        throw std::domain_error("partial configuration can no longer reach the target electron counts");
    Tensor masked = logits_row;
    for (int o = 0; o < 4; ++o)
        if (!ok[static_cast<size_t>(o)]) masked.v[static_cast<size_t>(o)] = kMaskFill;
    Tensor out = t_log_softmax(masked);
    for (int o = 0; o < 4; ++o)
        if (!ok[static_cast<size_t>(o)]) out.v[static_cast<size_t>(o)] = kNegInf;
    return out;
}

// ---- parameter construction ----

Ansatz::Ansatz(const AnsatzConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.feedforward_dim == 0) cfg_.feedforward_dim = 4 * cfg_.d_model;
    init_params();
    if (store_.scalars_with_prefix("mod.") != mod_param_count() ||
        store_.scalars_with_prefix("ph.") != phase_param_count())
        throw std::logic_error("parameter count does not match the closed-form formula");
}

void Ansatz::init_params() {
    std::mt19937_64 rng(cfg_.seed);
    std::normal_distribution<double> embed_dist(0.0, 0.02);
    auto xavier = [&](long fin, long fout) {
        const double lim = std::sqrt(6.0 / static_cast<double>(fin + fout));
        std::uniform_real_distribution<double> u(-lim, lim);
        Tensor t = Tensor::zeros({fin, fout});
        for (double& v : t.v) v = u(rng);
        return t;
    };
    auto gauss = [&](long r, long c) {
        Tensor t = Tensor::zeros({r, c});
        for (double& v : t.v) v = embed_dist(rng);
        return t;
    };
    const long n = cfg_.n_qubits;
    const long d = cfg_.d_model;

    if (cfg_.architecture == Architecture::made) {
        std::vector<long> dims{n};
        dims.insert(dims.end(), cfg_.made_hidden_dims.begin(), cfg_.made_hidden_dims.end());
        dims.push_back(n);

        // Sequential degrees: input qubit q carries degree q+1, hidden units
        // cycle through 1..n-1, and output q may see strictly lower degrees.
        auto hidden_degree = [&](long u) { return n > 1 ? 1 + (u % (n - 1)) : 1; };
        std::vector<std::vector<long>> degrees(dims.size());
        for (long q = 0; q < n; ++q) degrees.front().push_back(q + 1);
        for (size_t l = 1; l + 1 < dims.size(); ++l)
            for (long u = 0; u < dims[l]; ++u) degrees[l].push_back(hidden_degree(u));
        for (long q = 0; q < n; ++q) degrees.back().push_back(q + 1);

        for (size_t l = 0; l + 1 < dims.size(); ++l) {
            const bool last = l + 2 == dims.size();
            Tensor mask = Tensor::zeros({dims[l], dims[l + 1]});
            for (long r = 0; r < dims[l]; ++r)
                for (long c = 0; c < dims[l + 1]; ++c) {
                    const bool on = last ? degrees[l + 1][static_cast<size_t>(c)] >
                                               degrees[l][static_cast<size_t>(r)]
                                         : degrees[l + 1][static_cast<size_t>(c)] >=
                                               degrees[l][static_cast<size_t>(r)];
                    if (on) mask.at2(r, c) = 1.0;
                }
            made_masks_.push_back(std::move(mask));
            std::ostringstream nm;
            nm << "mod.l" << l;
            store_.add(nm.str() + ".w", last ? Tensor::zeros({dims[l], dims[l + 1]})
                                             : xavier(dims[l], dims[l + 1]));
            store_.add(nm.str() + ".b", Tensor::zeros({1, dims[l + 1]}));
        }
    } else {
        store_.add("mod.embed", gauss(5, d));
        if (cfg_.architecture == Architecture::transformer)
            store_.add("mod.pos", gauss(cfg_.sites(), d));
        for (long b = 0; b < cfg_.n_blocks; ++b) {
            std::ostringstream nm;
            nm << "mod.b" << b << ".";
            const std::string p = nm.str();
            store_.add(p + "wq", xavier(d, d));
            store_.add(p + "wk", xavier(d, d));
            store_.add(p + "wv", xavier(d, d));
            store_.add(p + "wo", xavier(d, d));
            if (cfg_.architecture == Architecture::retnet) {
                store_.add(p + "gn.g", Tensor::full({1, d}, 1.0));
                store_.add(p + "gn.b", Tensor::zeros({1, d}));
            }
            store_.add(p + "ln1.g", Tensor::full({1, d}, 1.0));
            store_.add(p + "ln1.b", Tensor::zeros({1, d}));
            store_.add(p + "ff.w1", xavier(d, cfg_.feedforward_dim));
            store_.add(p + "ff.w2", xavier(cfg_.feedforward_dim, d));
            store_.add(p + "ln2.g", Tensor::full({1, d}, 1.0));
            store_.add(p + "ln2.b", Tensor::zeros({1, d}));
        }
        store_.add("mod.head", Tensor::zeros({d, 4}));
        if (cfg_.architecture == Architecture::retnet) {
            for (long h = 0; h < cfg_.n_heads; ++h)
                gammas_.push_back(1.0 - std::pow(2.0, -5.0 - static_cast<double>(h)));
            rot_theta_ = Tensor::zeros({1, cfg_.d_attn / 2});
            for (long k = 0; k < cfg_.d_attn / 2; ++k)
                rot_theta_.v[static_cast<size_t>(k)] =
                    std::pow(10000.0, -2.0 * static_cast<double>(k) / static_cast<double>(cfg_.d_attn));
        }
    }

    std::vector<long> pdims{n};
    pdims.insert(pdims.end(), cfg_.phase_hidden_dims.begin(), cfg_.phase_hidden_dims.end());
    pdims.push_back(1);
    for (size_t l = 0; l + 1 < pdims.size(); ++l) {
        const bool last = l + 2 == pdims.size();
        std::ostringstream nm;
        nm << "ph.l" << l;
        store_.add(nm.str() + ".w",
                   last ? Tensor::zeros({pdims[l], pdims[l + 1]}) : xavier(pdims[l], pdims[l + 1]));
        store_.add(nm.str() + ".b", Tensor::zeros({1, pdims[l + 1]}));
    }
}

long Ansatz::mod_param_count() const {
    const long n = cfg_.n_qubits, d = cfg_.d_model;
    if (cfg_.architecture == Architecture::made) {
        std::vector<long> dims{n};
        dims.insert(dims.end(), cfg_.made_hidden_dims.begin(), cfg_.made_hidden_dims.end());
        dims.push_back(n);
        long total = 0;
        for (size_t l = 0; l + 1 < dims.size(); ++l) total += dims[l] * dims[l + 1] + dims[l + 1];
        return total;
    }
    const long block = 12 * d * d + 4 * d + (cfg_.architecture == Architecture::retnet ? 2 * d : 0);
    const long pos = cfg_.architecture == Architecture::transformer ? cfg_.sites() * d : 0;
    return 5 * d + pos + cfg_.n_blocks * block + 4 * d;
}

long Ansatz::phase_param_count() const {
    std::vector<long> dims{static_cast<long>(cfg_.n_qubits)};
    dims.insert(dims.end(), cfg_.phase_hidden_dims.begin(), cfg_.phase_hidden_dims.end());
    dims.push_back(1);
    long total = 0;
    for (size_t l = 0; l + 1 < dims.size(); ++l) total += dims[l] * dims[l + 1] + dims[l + 1];
    return total;
}

// ---- forward builders ----

int Ansatz::pnode(const std::vector<int>& pnodes, const std::string& name) const {
    const int idx = store_.index_of(name);
    if (idx < 0) throw std::logic_error("unknown parameter: " + name);
    return pnodes[static_cast<size_t>(idx)];
}

std::vector<int> Ansatz::constant_binding(Tape& tape) const {
    std::vector<int> ids;
    ids.reserve(store_.count());
    for (size_t i = 0; i < store_.count(); ++i) ids.push_back(tape.constant(store_.item(i).value));
    return ids;
}

int Ansatz::modulus_logits(Tape& tape, const std::vector<int>& pnodes, uint64_t x) const {
    int h = tape.constant(spin_input(x, cfg_.n_qubits));
    const size_t layers = made_masks_.size();
    for (size_t l = 0; l < layers; ++l) {
        std::ostringstream nm;
        nm << "mod.l" << l;
        const int wm = tape.mul(pnode(pnodes, nm.str() + ".w"), tape.constant(made_masks_[l]));
        h = tape.add(tape.matmul(h, wm), pnode(pnodes, nm.str() + ".b"));
        if (l + 1 < layers) h = tape.relu(h);
    }
    return h;
}

int Ansatz::sequence_logits(Tape& tape, const std::vector<int>& pnodes,
                            const std::vector<int>& tokens) const {
    const long sites = cfg_.sites();
    std::vector<long> ids{kBosToken};
    for (int t : tokens) {
        if (t < 0 || t > 3) throw std::invalid_argument("orbital token out of range");
        ids.push_back(t);
    }
    if (static_cast<long>(ids.size()) > sites) ids.resize(static_cast<size_t>(sites));
    const long rows = static_cast<long>(ids.size());

    int x = tape.embed_lookup(pnode(pnodes, "mod.embed"), ids);
    if (cfg_.architecture == Architecture::transformer)
        x = tape.add(x, tape.slice(pnode(pnodes, "mod.pos"), 0, 0, rows));

    for (long b = 0; b < cfg_.n_blocks; ++b) {
        std::ostringstream nm;
        nm << "mod.b" << b << ".";
        const std::string p = nm.str();
        const int q = tape.matmul(x, pnode(pnodes, p + "wq"));
        const int k = tape.matmul(x, pnode(pnodes, p + "wk"));
        const int v = tape.matmul(x, pnode(pnodes, p + "wv"));
        int mixed = -1;
        for (long h = 0; h < cfg_.n_heads; ++h) {
            int qh = tape.slice(q, 1, h * cfg_.d_attn, cfg_.d_attn);
            int kh = tape.slice(k, 1, h * cfg_.d_attn, cfg_.d_attn);
            const int vh = tape.slice(v, 1, h * cfg_.d_attn, cfg_.d_attn);
            int oh;
            if (cfg_.architecture == Architecture::transformer) {
                int scores = tape.scale(tape.matmul(qh, kh, false, true),
                                        1.0 / std::sqrt(static_cast<double>(cfg_.d_attn)));
                Tensor causal = Tensor::zeros({rows, rows});
                for (long i = 0; i < rows; ++i)
                    for (long j = i + 1; j < rows; ++j) causal.at2(i, j) = 1.0;
                scores = tape.masked_fill(scores, tape.constant(causal), kMaskFill);
                oh = tape.matmul(tape.softmax(scores), vh);
            } else {
                const int theta = tape.constant(rot_theta_);
                qh = tape.rotate_pairs(qh, theta, 1.0, 0);
                kh = tape.rotate_pairs(kh, theta, -1.0, 0);
                int scores = tape.matmul(qh, kh, false, true);
                const double gamma = gammas_[static_cast<size_t>(h)];
                Tensor decay = Tensor::zeros({rows, rows});
                for (long i = 0; i < rows; ++i)
                    for (long j = 0; j <= i; ++j)
                        decay.at2(i, j) = std::pow(gamma, static_cast<double>(i - j));
                scores = tape.mul(scores, tape.constant(decay));
                oh = tape.matmul(scores, vh);
            }
            mixed = h == 0 ? oh : tape.concat(mixed, oh, 1);
        }
        if (cfg_.architecture == Architecture::retnet)
            mixed = tape.group_norm(mixed, pnode(pnodes, p + "gn.g"), pnode(pnodes, p + "gn.b"),
                                    cfg_.n_heads);
        x = tape.layer_norm(tape.add(x, tape.matmul(mixed, pnode(pnodes, p + "wo"))),
                            pnode(pnodes, p + "ln1.g"), pnode(pnodes, p + "ln1.b"));
        const int f = tape.matmul(tape.relu(tape.matmul(x, pnode(pnodes, p + "ff.w1"))),
                                  pnode(pnodes, p + "ff.w2"));
        x = tape.layer_norm(tape.add(x, f), pnode(pnodes, p + "ln2.g"), pnode(pnodes, p + "ln2.b"));
    }
    return tape.matmul(x, pnode(pnodes, "mod.head"));
}

int Ansatz::retnet_step(Tape& tape, const std::vector<int>& pnodes, int token, long position,
                        std::vector<Tensor>& s_inout) const {
    if (cfg_.architecture != Architecture::retnet)
        throw std::logic_error("recurrent stepping is a retnet operation");
    int x = tape.embed_lookup(pnode(pnodes, "mod.embed"), {static_cast<long>(token)});
    for (long b = 0; b < cfg_.n_blocks; ++b) {
        std::ostringstream nm;
        nm << "mod.b" << b << ".";
        const std::string p = nm.str();
        const int q = tape.matmul(x, pnode(pnodes, p + "wq"));
        const int k = tape.matmul(x, pnode(pnodes, p + "wk"));
        const int v = tape.matmul(x, pnode(pnodes, p + "wv"));
        int mixed = -1;
        for (long h = 0; h < cfg_.n_heads; ++h) {
            const int theta = tape.constant(rot_theta_);
            const int qh =
                tape.rotate_pairs(tape.slice(q, 1, h * cfg_.d_attn, cfg_.d_attn), theta, 1.0, position);
            const int kh =
                tape.rotate_pairs(tape.slice(k, 1, h * cfg_.d_attn, cfg_.d_attn), theta, -1.0, position);
            const int vh = tape.slice(v, 1, h * cfg_.d_attn, cfg_.d_attn);
            const size_t slot = static_cast<size_t>(b * cfg_.n_heads + h);
            const int decayed = tape.scale(tape.constant(s_inout[slot]), gammas_[static_cast<size_t>(h)]);
            const int snew = tape.add(decayed, tape.matmul(kh, vh, true, false));
            s_inout[slot] = tape.val(snew);
            const int oh = tape.matmul(qh, snew);
            mixed = h == 0 ? oh : tape.concat(mixed, oh, 1);
        }
        mixed = tape.group_norm(mixed, pnode(pnodes, p + "gn.g"), pnode(pnodes, p + "gn.b"),
                                cfg_.n_heads);
        x = tape.layer_norm(tape.add(x, tape.matmul(mixed, pnode(pnodes, p + "wo"))),
                            pnode(pnodes, p + "ln1.g"), pnode(pnodes, p + "ln1.b"));
        const int f = tape.matmul(tape.relu(tape.matmul(x, pnode(pnodes, p + "ff.w1"))),
                                  pnode(pnodes, p + "ff.w2"));
        x = tape.layer_norm(tape.add(x, f), pnode(pnodes, p + "ln2.g"), pnode(pnodes, p + "ln2.b"));
    }
    return tape.matmul(x, pnode(pnodes, "mod.head"));
}

int Ansatz::phase_node(Tape& tape, const std::vector<int>& pnodes, uint64_t x) const {
    int h = tape.constant(spin_input(x, cfg_.n_qubits));
    const size_t layers = cfg_.phase_hidden_dims.size() + 1;
    for (size_t l = 0; l < layers; ++l) {
        std::ostringstream nm;
        nm << "ph.l" << l;
        h = tape.add(tape.matmul(h, pnode(pnodes, nm.str() + ".w")), pnode(pnodes, nm.str() + ".b"));
        if (l + 1 < layers) h = tape.relu(h);
    }
    return h;
}

// ---- public forward surfaces ----

ConditionalDistribution Ansatz::made_forward(uint64_t x) const {
    if (cfg_.architecture != Architecture::made)
        throw std::logic_error("made_forward called on a sequence architecture");
    Tape tape;
    const auto pn = constant_binding(tape);
    const int z = modulus_logits(tape, pn, x);
    ConditionalDistribution out;
    out.outcomes = 2;
    for (int q = 0; q < cfg_.n_qubits; ++q) {
        const int row = tape.concat(tape.constant(Tensor::zeros({1, 1})), tape.slice(z, 1, q, 1), 1);
        const Tensor lp = tape.val(tape.log_softmax(row));
        out.rows.push_back({lp.v[0], lp.v[1], kNegInf, kNegInf});
    }
    return out;
}

ConditionalDistribution Ansatz::transformer_forward(const std::vector<int>& tokens) const {
    if (cfg_.architecture != Architecture::transformer)
        throw std::logic_error("transformer_forward called on the wrong architecture");
    if (static_cast<long>(tokens.size()) > cfg_.sites())
        throw std::invalid_argument("token sequence longer than n_qubits/2");
    Tape tape;
    const auto pn = constant_binding(tape);
    const int logits = tape.log_softmax(sequence_logits(tape, pn, tokens));
    const Tensor& lp = tape.val(logits);
    ConditionalDistribution out;
    out.outcomes = 4;
    for (long r = 0; r < lp.rows(); ++r)
        out.rows.push_back({lp.at2(r, 0), lp.at2(r, 1), lp.at2(r, 2), lp.at2(r, 3)});
    return out;
}

ConditionalDistribution Ansatz::retnet_forward_parallel(const std::vector<int>& tokens) const {
    if (cfg_.architecture != Architecture::retnet)
        throw std::logic_error("retnet_forward_parallel called on the wrong architecture");
    if (static_cast<long>(tokens.size()) > cfg_.sites())
        throw std::invalid_argument("token sequence longer than n_qubits/2");
    Tape tape;
    const auto pn = constant_binding(tape);
    const int logits = tape.log_softmax(sequence_logits(tape, pn, tokens));
    const Tensor& lp = tape.val(logits);
    ConditionalDistribution out;
    out.outcomes = 4;
    for (long r = 0; r < lp.rows(); ++r)
        out.rows.push_back({lp.at2(r, 0), lp.at2(r, 1), lp.at2(r, 2), lp.at2(r, 3)});
    return out;
}

RetnetState Ansatz::retnet_start() const {
    if (cfg_.architecture != Architecture::retnet)
        throw std::logic_error("recurrent state requested for the wrong architecture");
    RetnetState st;
    st.s.assign(static_cast<size_t>(cfg_.n_blocks * cfg_.n_heads),
                Tensor::zeros({cfg_.d_attn, cfg_.d_attn}));
    st.t = 0;
    return st;
}

std::array<double, 4> Ansatz::retnet_forward_recurrent(RetnetState& state, int next_token) const {
    if (state.s.size() != static_cast<size_t>(cfg_.n_blocks * cfg_.n_heads))
        throw std::invalid_argument("retention state has the wrong head count");
    Tape tape;
    const auto pn = constant_binding(tape);
    const int logits = retnet_step(tape, pn, next_token, state.t, state.s);
    state.t += 1;
    const Tensor lp = tape.val(tape.log_softmax(logits));
    return {lp.v[0], lp.v[1], lp.v[2], lp.v[3]};
}

double Ansatz::phase_forward(uint64_t x) const {
    Tape tape;
    const auto pn = constant_binding(tape);
    return tape.val(phase_node(tape, pn, x)).v[0];
}

SampleGraph Ansatz::build_sample_graph(Tape& tape, const std::vector<int>& param_nodes, uint64_t x,
                                       const std::optional<pauli::Sector>& sector) const {
    const int n = cfg_.n_qubits;
    if (sector && !pauli::config_in_sector(x, n, *sector))
        throw std::domain_error("configuration violates the particle-number constraint");
    if (n < 64 && (x >> n) != 0)
        throw std::domain_error("configuration has bits beyond n_qubits");

    const long sites_total = cfg_.sites();
    int lp = -1;
    auto accumulate = [&](int node) { lp = lp < 0 ? node : tape.add(lp, node); };

    if (cfg_.architecture == Architecture::made) {
        const int z = modulus_logits(tape, param_nodes, x);
        long up_used = 0, down_used = 0;
        for (int q = 0; q < n; ++q) {
            const long site = q / 2;
            const bool is_up = q % 2 == 0;
            bool allow0 = true, allow1 = true;
            if (sector)
                binary_allow(is_up ? sector->n_up : sector->n_down, is_up ? up_used : down_used,
                             sites_total - site - 1, allow0, allow1);
            int row = tape.concat(tape.constant(Tensor::zeros({1, 1})), tape.slice(z, 1, q, 1), 1);
            if (!allow0 || !allow1) {
                Tensor m = Tensor::zeros({1, 2});
                if (!allow0) m.v[0] = 1.0;
                if (!allow1) m.v[1] = 1.0;
                row = tape.masked_fill(row, tape.constant(m), kMaskFill);
            }
            const int sel = tape.slice(tape.log_softmax(row), 1, bit(x, q) ? 1 : 0, 1);
            accumulate(sel);
            if (bit(x, q)) (is_up ? up_used : down_used) += 1;
        }
    } else {
        const auto tokens = config_tokens(x, n);
        const int logits = sequence_logits(tape, param_nodes, tokens);
        long up_used = 0, down_used = 0;
        for (long s = 0; s < sites_total; ++s) {
            int row = tape.slice(logits, 0, s, 1);
            if (sector) {
                const auto ok = feasible_outcomes(*sector, sites_total, s, up_used, down_used);
                if (!ok[0] || !ok[1] || !ok[2] || !ok[3]) {
                    Tensor m = Tensor::zeros({1, 4});
                    for (int o = 0; o < 4; ++o)
                        if (!ok[static_cast<size_t>(o)]) m.v[static_cast<size_t>(o)] = 1.0;
                    row = tape.masked_fill(row, tape.constant(m), kMaskFill);
                }
            }
            const int tok = tokens[static_cast<size_t>(s)];
            accumulate(tape.slice(tape.log_softmax(row), 1, tok, 1));
            up_used += tok & 1;
            down_used += (tok >> 1) & 1;
        }
    }
    SampleGraph g;
    g.log_prob = lp;
    g.phase = phase_node(tape, param_nodes, x);
    return g;
}

// ---- sampling streams ----

namespace {

// Masked renormalization of a raw 1x4 (or 1x2) logit row, mirroring the
// masked_fill + log_softmax arithmetic used on tapes.
template <size_t K>
std::array<double, K> mask_and_normalize(const std::array<double, K>& logits,
                                         const std::array<bool, K>& ok) {
    std::array<double, K> v = logits;
    bool any = false;
    for (size_t i = 0; i < K; ++i) {
        if (!ok[i]) v[i] = kMaskFill;
        any = any || ok[i];
    }
    if (!any) throw std::domain_error("no feasible outcome at this position");
    double m = v[0];
    for (size_t i = 1; i < K; ++i) m = std::max(m, v[i]);
    double lse = 0.0;
    for (size_t i = 0; i < K; ++i) lse += std::exp(v[i] - m);
    lse = m + std::log(lse);
    std::array<double, K> out{};
    for (size_t i = 0; i < K; ++i) out[i] = ok[i] ? v[i] - lse : kNegInf;
    return out;
}

}  // namespace

class MadeStream final : public ConditionalStream {
public:
    MadeStream(const Ansatz& a, std::optional<pauli::Sector> sector)
        : a_(&a), sector_(std::move(sector)) {}

    std::array<double, 4> next_log_conditionals() override {
        const int n = a_->config().n_qubits;
        const long sites_total = a_->config().sites();
        const int qa = static_cast<int>(2 * site_);
        const int qb = qa + 1;

        bool a0 = true, a1 = true;
        if (sector_) binary_allow(sector_->n_up, up_used_, sites_total - site_ - 1, a0, a1);
        const auto za = logits_for(x_);
        const auto lpa = mask_and_normalize<2>({za[static_cast<size_t>(qa)].first,
                                                za[static_cast<size_t>(qa)].second},
                                               {a0, a1});

        if (qb >= n) return {lpa[0], lpa[1], kNegInf, kNegInf};

        bool b0 = true, b1 = true;
        if (sector_) binary_allow(sector_->n_down, down_used_, sites_total - site_ - 1, b0, b1);
        std::array<double, 4> out{};
        for (int ua = 0; ua < 2; ++ua) {
            const uint64_t xa = ua ? (x_ | (1ULL << qa)) : (x_ & ~(1ULL << qa));
            const auto zb = ua == 0 ? za : logits_for(xa);
            const auto lpb = mask_and_normalize<2>({zb[static_cast<size_t>(qb)].first,
                                                    zb[static_cast<size_t>(qb)].second},
                                                   {b0, b1});
            out[static_cast<size_t>(ua)] = lpa[static_cast<size_t>(ua)] + lpb[0];
            out[static_cast<size_t>(2 + ua)] = lpa[static_cast<size_t>(ua)] + lpb[1];
        }
        return out;
    }

    void advance(int outcome) override {
        const int n = a_->config().n_qubits;
        const int qa = static_cast<int>(2 * site_);
        if (outcome & 1) {
            x_ |= 1ULL << qa;
            ++up_used_;
        }
        if (qa + 1 < n && (outcome & 2)) {
            x_ |= 1ULL << (qa + 1);
            ++down_used_;
        }
        ++site_;
    }

    std::unique_ptr<ConditionalStream> clone() const override {
        return std::make_unique<MadeStream>(*this);
    }
    long site() const override { return site_; }
    uint64_t partial_config() const override { return x_; }

private:
    // Binary log-conditional inputs [logit(0)=0, logit(1)=z_q] for all qubits
    // at the given partial configuration.
    std::vector<std::pair<double, double>> logits_for(uint64_t x) const {
        Tape tape;
        const auto pn = a_->constant_binding(tape);
        const Tensor& z = tape.val(a_->modulus_logits(tape, pn, x));
        std::vector<std::pair<double, double>> rows;
        rows.reserve(static_cast<size_t>(z.cols()));
        for (long q = 0; q < z.cols(); ++q) rows.push_back({0.0, z.v[static_cast<size_t>(q)]});
        return rows;
    }

    const Ansatz* a_;
    std::optional<pauli::Sector> sector_;
    uint64_t x_ = 0;
    long site_ = 0;
    long up_used_ = 0, down_used_ = 0;
};

class TransformerStream final : public ConditionalStream {
public:
    TransformerStream(const Ansatz& a, std::optional<pauli::Sector> sector)
        : a_(&a), sector_(std::move(sector)) {}

    std::array<double, 4> next_log_conditionals() override {
        Tape tape;
        const auto pn = a_->constant_binding(tape);
        const int logits = a_->sequence_logits(tape, pn, tokens_);
        const Tensor raw = tape.val(tape.slice(logits, 0, site_, 1));
        std::array<bool, 4> ok{true, true, true, true};
        if (sector_) ok = feasible_outcomes(*sector_, a_->config().sites(), site_, up_used_, down_used_);
        return mask_and_normalize<4>({raw.v[0], raw.v[1], raw.v[2], raw.v[3]}, ok);
    }

    void advance(int outcome) override {
        tokens_.push_back(outcome);
        up_used_ += outcome & 1;
        down_used_ += (outcome >> 1) & 1;
        ++site_;
    }

    std::unique_ptr<ConditionalStream> clone() const override {
        return std::make_unique<TransformerStream>(*this);
    }
    long site() const override { return site_; }
    uint64_t partial_config() const override {
        uint64_t x = 0;
        for (size_t s = 0; s < tokens_.size(); ++s) {
            if (tokens_[s] & 1) x |= 1ULL << (2 * s);
            if (tokens_[s] & 2) x |= 1ULL << (2 * s + 1);
        }
        return x;
    }

private:
    const Ansatz* a_;
    std::optional<pauli::Sector> sector_;
    std::vector<int> tokens_;
    long site_ = 0;
    long up_used_ = 0, down_used_ = 0;
};

class RetnetStream final : public ConditionalStream {
public:
    RetnetStream(const Ansatz& a, std::optional<pauli::Sector> sector)
        : a_(&a), sector_(std::move(sector)), state_(a.retnet_start()) {
        pending_ = raw_logits(kBosToken);
    }

    std::array<double, 4> next_log_conditionals() override {
        std::array<bool, 4> ok{true, true, true, true};
        if (sector_) ok = feasible_outcomes(*sector_, a_->config().sites(), site_, up_used_, down_used_);
        return mask_and_normalize<4>(pending_, ok);
    }

    void advance(int outcome) override {
        tokens_.push_back(outcome);
        up_used_ += outcome & 1;
        down_used_ += (outcome >> 1) & 1;
        ++site_;
        if (site_ < a_->config().sites()) pending_ = raw_logits(outcome);
    }

    std::unique_ptr<ConditionalStream> clone() const override {
        return std::make_unique<RetnetStream>(*this);
    }
    long site() const override { return site_; }
    uint64_t partial_config() const override {
        uint64_t x = 0;
        for (size_t s = 0; s < tokens_.size(); ++s) {
            if (tokens_[s] & 1) x |= 1ULL << (2 * s);
            if (tokens_[s] & 2) x |= 1ULL << (2 * s + 1);
        }
        return x;
    }

private:
    // Unnormalized logits for the next position; mask_and_normalize applies
    // the one masked log-softmax, matching the tape graph arithmetic.
    std::array<double, 4> raw_logits(int token) {
        Tape tape;
        const auto pn = a_->constant_binding(tape);
        const Tensor z = tape.val(a_->retnet_step(tape, pn, token, state_.t, state_.s));
        state_.t += 1;
        return {z.v[0], z.v[1], z.v[2], z.v[3]};
    }

    const Ansatz* a_;
    std::optional<pauli::Sector> sector_;
    RetnetState state_;
    std::array<double, 4> pending_{};
    std::vector<int> tokens_;
    long site_ = 0;
    long up_used_ = 0, down_used_ = 0;
};

std::unique_ptr<ConditionalStream> Ansatz::stream(const std::optional<pauli::Sector>& sector) const {
    if (sector) {
        if (cfg_.n_qubits % 2 != 0)
            throw std::invalid_argument("particle-number constraint needs an even qubit count");
        const long sites = cfg_.sites();
        if (sector->n_up < 0 || sector->n_down < 0 || sector->n_up > sites || sector->n_down > sites)
            throw std::invalid_argument("sector does not fit the orbital count");
    }
    switch (cfg_.architecture) {
        case Architecture::made: return std::make_unique<MadeStream>(*this, sector);
        case Architecture::transformer: return std::make_unique<TransformerStream>(*this, sector);
        case Architecture::retnet: return std::make_unique<RetnetStream>(*this, sector);
    }
    throw std::logic_error("unreachable architecture");
}

// ---- constrained wavefunction ----

ConstrainedWavefunction::ConstrainedWavefunction(const Ansatz& a, std::optional<pauli::Sector> sector)
    : ansatz_(&a), sector_(std::move(sector)) {
    if (sector_ && a.config().n_qubits % 2 != 0)
        throw std::invalid_argument("particle-number constraint needs an even qubit count");
}

bool ConstrainedWavefunction::feasible(uint64_t x) const {
    const int n = ansatz_->config().n_qubits;
    if (n < 64 && (x >> n) != 0) return false;
    return !sector_ || pauli::config_in_sector(x, n, *sector_);
}

double ConstrainedWavefunction::log_prob(uint64_t x) const {
    if (!feasible(x)) throw std::domain_error("configuration violates the particle-number constraint");
    Tape tape;
    const auto pn = ansatz_->constant_binding(tape);
    const SampleGraph g = ansatz_->build_sample_graph(tape, pn, x, sector_);
    return tape.val(g.log_prob).v[0];
}

std::complex<double> ConstrainedWavefunction::log_amplitude(uint64_t x) const {
    return {0.5 * log_prob(x), ansatz_->phase_forward(x)};
}

std::unique_ptr<ConditionalStream> ConstrainedWavefunction::stream() const {
    return ansatz_->stream(sector_);
}

}  // namespace nqs::ansatz
