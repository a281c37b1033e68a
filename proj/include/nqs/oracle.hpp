#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "nqs/pauli.hpp"
#include "nqs/wavefunction.hpp"

namespace nqs::oracle {

using cdouble = std::complex<double>;

// CSR matrix over an explicit configuration basis (full space or one
// particle-number sector). Rows and columns share the same basis order.
struct SparseOperator {
    long dim = 0;
    int n_qubits = 0;
    bool restricted = false;
    std::vector<uint64_t> basis;  // ascending configs
    std::vector<long> row_ptr;
    std::vector<long> col_idx;
    std::vector<cdouble> vals;

    long index_of(uint64_t config) const;  // -1 if outside the basis
};

SparseOperator build_operator(const pauli::Hamiltonian& h, bool restrict_sector);

void matvec_serial(const SparseOperator& op, const cdouble* x, cdouble* y);
void matvec(const SparseOperator& op, const cdouble* x, cdouble* y);  // row-parallel

struct GroundState {
    double energy = 0.0;
    std::vector<cdouble> vector;  // normalized, aligned with op.basis
    double residual = 0.0;
    int iterations = 0;  // 0 for the dense path
};

// Dense Hermitian eigensolve below dimension 2048, Lanczos with full
// reorthogonalization above it. Residual ||Hv - Ev|| <= 1e-9 or it throws.
GroundState ground_state(const SparseOperator& op, uint64_t seed = 1);
GroundState lanczos_ground(const SparseOperator& op, uint64_t seed, int max_iterations = 5000,
                           double tol = 1e-9);
std::vector<double> dense_spectrum(const SparseOperator& op);  // ascending, dim < 2048 only

struct Expectation {
    double energy = 0.0;
    double variance = 0.0;  // <H^2> - <H>^2, H applied twice, never squared
};

// Exact moments by full enumeration of the wavefunction's feasible configs.
// Requires n_qubits <= 12.
Expectation exact_expectation(const Wavefunction& wf, const pauli::Hamiltonian& h);

// Ground energy of the sector-restricted operator; the reference for
// absolute-error reporting. Throws if the sector dimension is unreasonable.
double reference_ground_energy(const pauli::Hamiltonian& h, uint64_t seed = 1);

// Table-backed wavefunction over an explicit basis; the bridge from oracle
// eigenvectors back into the sampling-side estimators.
class TableWavefunction : public Wavefunction {
public:
    TableWavefunction(std::vector<uint64_t> basis, std::vector<cdouble> amplitudes);
    std::complex<double> log_amplitude(uint64_t x) const override;
    bool feasible(uint64_t x) const override;

private:
    std::vector<uint64_t> basis_;
    std::vector<cdouble> amps_;
};

}  // namespace nqs::oracle
