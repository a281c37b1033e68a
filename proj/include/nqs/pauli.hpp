#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nqs::pauli {

// One weighted Pauli string. The symplectic masks cache which qubits carry
// X/Y (x_mask) and Z/Y (z_mask); bit k corresponds to the k-th character of
// `ops`, i.e. the leftmost symbol acts on bit 0 of a configuration word.
struct PauliTerm {
    std::string ops;
    double coeff = 0.0;
    uint64_t x_mask = 0;
    uint64_t z_mask = 0;
};

struct Hamiltonian {
    int n_qubits = 0;
    int n_electrons = -1;  // -1: no particle-number constraint given
    int multiplicity = 1;
    std::optional<double> fci;
    std::vector<PauliTerm> terms;
    std::string name;  // file stem when loaded from disk

    bool constrained() const { return n_electrons >= 0; }
    double identity_weight() const;
};

Hamiltonian parse_hamiltonian(const std::string& text, const std::string& name = "");
Hamiltonian load_hamiltonian(const std::string& path);
std::string serialize_hamiltonian(const Hamiltonian& h);

// Terms bucketed by flip mask. M = number of distinct nonzero masks; the
// diagonal bucket (mask 0) is kept separately.
struct FlipGroups {
    std::vector<uint64_t> masks;             // sorted, nonzero
    std::vector<std::vector<int>> members;   // term indices per mask
    std::vector<int> diagonal;
    int group_count() const { return static_cast<int>(masks.size()); }
};
FlipGroups flip_groups(const Hamiltonian& h);

// <x ^ x_mask | term | x>
std::complex<double> matrix_element(const PauliTerm& term, uint64_t x);

// Row of H at x: one entry per flip group plus the diagonal entry first,
// each carrying <x | H | config>. Zero amplitudes are retained so the row
// structure (and FLOP accounting) stays uniform.
struct Connected {
    uint64_t config = 0;
    std::complex<double> amplitude;
};
std::vector<Connected> connected_elements(const Hamiltonian& h, const FlipGroups& groups, uint64_t x);

// Spin bookkeeping: spatial orbital j owns qubits (2j, 2j+1); even qubit
// index = up spin, odd = down spin.
struct Sector {
    int n_up = 0;
    int n_down = 0;
};
Sector sector_of(int n_qubits, int n_electrons, int multiplicity);
bool config_in_sector(uint64_t x, int n_qubits, const Sector& s);
unsigned long long search_space_size(int n_qubits, int n_electrons, int multiplicity);
std::vector<uint64_t> enumerate_sector(int n_qubits, const Sector& s);  // ascending

unsigned long long binomial(int n, int k);

uint64_t parse_config(const std::string& bits);  // leftmost char = qubit 0
std::string config_string(uint64_t x, int n_qubits);

}  // namespace nqs::pauli
