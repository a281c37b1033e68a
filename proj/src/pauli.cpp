#include "nqs/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nqs::pauli {

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& msg) {
    std::ostringstream os;
    os << "hamiltonian " << (name.empty() ? "<string>" : name) << ":" << line << ": " << msg;
    throw std::invalid_argument(os.str());
}

std::string trimmed(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void fill_masks(PauliTerm& t) {
    t.x_mask = 0;
    t.z_mask = 0;
    for (size_t k = 0; k < t.ops.size(); ++k) {
        switch (t.ops[k]) {
            case 'I': break;
            case 'X': t.x_mask |= 1ULL << k; break;
            case 'Y': t.x_mask |= 1ULL << k; t.z_mask |= 1ULL << k; break;
            case 'Z': t.z_mask |= 1ULL << k; break;
            default: throw std::invalid_argument("invalid Pauli symbol");
        }
    }
}

}  // namespace

double Hamiltonian::identity_weight() const {
    for (const auto& t : terms)
        if (t.x_mask == 0 && t.z_mask == 0) return t.coeff;
    return 0.0;
}

Hamiltonian parse_hamiltonian(const std::string& text, const std::string& name) {
    Hamiltonian h;
    h.name = name;
    bool saw_n_qubits = false, saw_n_electrons = false, saw_term = false;
    std::map<std::string, int> term_index;  // ops -> position, for merging duplicates

    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trimmed(raw);
        if (line.empty()) continue;

        if (line[0] == '%') {
            if (saw_term) parse_fail(name, line_no, "directives must precede term lines");
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            if (key == "%n_qubits") {
                if (!(ls >> h.n_qubits) || h.n_qubits < 1 || h.n_qubits > 64)
                    parse_fail(name, line_no, "%n_qubits needs an integer in [1,64]");
                saw_n_qubits = true;
            } else if (key == "%n_electrons") {
                if (!(ls >> h.n_electrons) || h.n_electrons < 0)
                    parse_fail(name, line_no, "%n_electrons needs a nonnegative integer");
                saw_n_electrons = true;
            } else if (key == "%multiplicity") {
                if (!(ls >> h.multiplicity) || h.multiplicity < 1)
                    parse_fail(name, line_no, "%multiplicity needs a positive integer");
            } else if (key == "%fci") {
                double v;
                if (!(ls >> v)) parse_fail(name, line_no, "%fci needs a float");
                h.fci = v;
            } else {
                parse_fail(name, line_no, "unknown directive " + key);
            }
            std::string extra;
            if (ls >> extra) parse_fail(name, line_no, "trailing content after directive");
            continue;
        }

        if (!saw_n_qubits) parse_fail(name, line_no, "%n_qubits must appear before terms");

        std::istringstream ls(line);
        double coeff;
        std::string ops;
        if (!(ls >> coeff >> ops)) parse_fail(name, line_no, "expected '<coeff> <paulistring>'");
        std::string extra;
        if (ls >> extra) parse_fail(name, line_no, "trailing content after term");
        if (static_cast<int>(ops.size()) != h.n_qubits)
            parse_fail(name, line_no, "pauli string length != n_qubits");
        for (char c : ops)
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
                parse_fail(name, line_no, std::string("invalid Pauli symbol '") + c + "'");
        saw_term = true;

        auto it = term_index.find(ops);
        if (it != term_index.end()) {
            h.terms[static_cast<size_t>(it->second)].coeff += coeff;
        } else {
            PauliTerm t;
            t.ops = ops;
            t.coeff = coeff;
            fill_masks(t);
            term_index[ops] = static_cast<int>(h.terms.size());
            h.terms.push_back(std::move(t));
        }
    }

    if (!saw_n_qubits) parse_fail(name, line_no, "missing %n_qubits directive");
    if (saw_n_electrons && h.n_electrons > h.n_qubits)
        parse_fail(name, line_no, "%n_electrons exceeds %n_qubits");

    const double dense_bound = 2.0 * std::pow(static_cast<double>(h.n_qubits), 4);
    if (static_cast<double>(h.terms.size()) > dense_bound)
        std::cerr << "warning: hamiltonian " << name << " has " << h.terms.size()
                  << " terms, above the ~2n^4 count expected for molecular operators\n";
    return h;
}

Hamiltonian load_hamiltonian(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open hamiltonian file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string stem = path;
    const size_t slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem.erase(0, slash + 1);
    const size_t dot = stem.find_last_of('.');
    if (dot != std::string::npos && dot > 0) stem.erase(dot);
    return parse_hamiltonian(buf.str(), stem);
}

std::string serialize_hamiltonian(const Hamiltonian& h) {
    std::ostringstream os;
    os.precision(17);
    os << "%n_qubits " << h.n_qubits << "\n";
    if (h.constrained()) {
        os << "%n_electrons " << h.n_electrons << "\n";
        os << "%multiplicity " << h.multiplicity << "\n";
    }
    if (h.fci) os << "%fci " << *h.fci << "\n";
    for (const auto& t : h.terms) os << t.coeff << " " << t.ops << "\n";
    return os.str();
}

FlipGroups flip_groups(const Hamiltonian& h) {
    std::map<uint64_t, std::vector<int>> buckets;
    FlipGroups g;
    for (size_t i = 0; i < h.terms.size(); ++i) {
        const uint64_t m = h.terms[i].x_mask;
        if (m == 0)
            g.diagonal.push_back(static_cast<int>(i));
        else
            buckets[m].push_back(static_cast<int>(i));
    }
    for (auto& [mask, members] : buckets) {
        g.masks.push_back(mask);
        g.members.push_back(std::move(members));
    }
    return g;
}

std::complex<double> matrix_element(const PauliTerm& term, uint64_t x) {
    // Y|0> = i|1>, Y|1> = -i|0>, Z|b> = (-1)^b |b>; X flips with weight 1.
    const int n_y = std::popcount(term.x_mask & term.z_mask);
    const int sign_bits = std::popcount(x & term.z_mask);
    static const std::complex<double> i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::complex<double> amp = i_pow[n_y % 4] * term.coeff;
    if (sign_bits % 2 != 0) amp = -amp;
    return amp;
}

std::vector<Connected> connected_elements(const Hamiltonian& h, const FlipGroups& groups, uint64_t x) {
    std::vector<Connected> out;
    out.reserve(groups.masks.size() + 1);
    Connected diag;
    diag.config = x;
    for (int ti : groups.diagonal) diag.amplitude += matrix_element(h.terms[static_cast<size_t>(ti)], x);
    out.push_back(diag);
    for (size_t gi = 0; gi < groups.masks.size(); ++gi) {
        Connected c;
        c.config = x ^ groups.masks[gi];
        // <x | term | x ^ mask>: the string's phase acts on the connected
        // configuration, so the row of H at x reads the mask there.
        for (int ti : groups.members[gi])
            c.amplitude += matrix_element(h.terms[static_cast<size_t>(ti)], c.config);
        out.push_back(c);
    }
    return out;
}

unsigned long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned long long r = 1;
    for (int i = 1; i <= k; ++i) {
        // Exact at every step: the running product is itself a binomial.
        r = r * static_cast<unsigned long long>(n - k + i) / static_cast<unsigned long long>(i);
    }
    return r;
}

Sector sector_of(int n_qubits, int n_electrons, int multiplicity) {
    const int up_slots = (n_qubits + 1) / 2;
    const int down_slots = n_qubits / 2;
    const int excess = multiplicity - 1;  // 2*S_z, surplus electrons go to the up sector
    if ((n_electrons + excess) % 2 != 0)
        throw std::invalid_argument("electron count and multiplicity are inconsistent");
    Sector s;
    s.n_up = (n_electrons + excess) / 2;
    s.n_down = n_electrons - s.n_up;
    if (s.n_up < 0 || s.n_down < 0 || s.n_up > up_slots || s.n_down > down_slots)
        throw std::invalid_argument("electron count does not fit the spin sectors");
    return s;
}

bool config_in_sector(uint64_t x, int n_qubits, const Sector& s) {
    int up = 0, down = 0;
    for (int k = 0; k < n_qubits; ++k) {
        if (!(x >> k & 1ULL)) continue;
        if (k % 2 == 0)
            ++up;
        else
            ++down;
    }
    return up == s.n_up && down == s.n_down;
}

unsigned long long search_space_size(int n_qubits, int n_electrons, int multiplicity) {
    if (n_qubits < 1) throw std::invalid_argument("n_qubits must be positive");
    if (n_electrons < 0 || n_electrons > n_qubits)
        throw std::invalid_argument("n_electrons must lie in [0, n_qubits]");
    const Sector s = sector_of(n_qubits, n_electrons, multiplicity);
    return binomial((n_qubits + 1) / 2, s.n_up) * binomial(n_qubits / 2, s.n_down);
}

std::vector<uint64_t> enumerate_sector(int n_qubits, const Sector& s) {
    std::vector<int> up_slots, down_slots;
    for (int k = 0; k < n_qubits; ++k) (k % 2 == 0 ? up_slots : down_slots).push_back(k);

    auto subsets = [](const std::vector<int>& slots, int k) {
        std::vector<uint64_t> out;
        const int n = static_cast<int>(slots.size());
        if (k < 0 || k > n) return out;
        std::vector<int> idx(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
        while (true) {
            uint64_t m = 0;
            for (int i : idx) m |= 1ULL << slots[static_cast<size_t>(i)];
            out.push_back(m);
            int j = k - 1;
            while (j >= 0 && idx[static_cast<size_t>(j)] == n - k + j) --j;
            if (j < 0) break;
            ++idx[static_cast<size_t>(j)];
            for (int t = j + 1; t < k; ++t) idx[static_cast<size_t>(t)] = idx[static_cast<size_t>(t - 1)] + 1;
        }
        return out;
    };

    std::vector<uint64_t> ups = subsets(up_slots, s.n_up);
    std::vector<uint64_t> downs = subsets(down_slots, s.n_down);
    std::vector<uint64_t> out;
    out.reserve(ups.size() * downs.size());
    for (uint64_t u : ups)
        for (uint64_t d : downs) out.push_back(u | d);
    std::sort(out.begin(), out.end());
    return out;
}

uint64_t parse_config(const std::string& bits) {
    uint64_t x = 0;
    for (size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] == '1')
            x |= 1ULL << k;
        else if (bits[k] != '0')
            throw std::invalid_argument("configuration strings may contain only 0/1");
    }
    return x;
}

std::string config_string(uint64_t x, int n_qubits) {
    std::string s(static_cast<size_t>(n_qubits), '0');
    for (int k = 0; k < n_qubits; ++k)
        if (x >> k & 1ULL) s[static_cast<size_t>(k)] = '1';
    return s;
}

}  // namespace nqs::pauli
