#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "nqs/pauli.hpp"

namespace nqs {

// Minimal view of a quantum state: complex log-amplitude per configuration.
// A real part of -inf encodes an exactly-zero amplitude. Implemented by the
// neural ansatze and by table-backed states in tests and the oracle.
class Wavefunction {
public:
    virtual ~Wavefunction() = default;
    virtual std::complex<double> log_amplitude(uint64_t x) const = 0;
    virtual bool feasible(uint64_t x) const = 0;
};

// l(x) = <x|H|psi> / <x|psi>, accumulated over the flip-group row structure.
// Infeasible or zero-amplitude connected configs contribute nothing.
inline std::complex<double> local_energy(const Wavefunction& wf, const pauli::Hamiltonian& h,
                                         const pauli::FlipGroups& groups, uint64_t x) {
    const std::complex<double> log_x = wf.log_amplitude(x);
    if (!std::isfinite(log_x.real()))
        throw std::runtime_error("local_energy: reference configuration has zero amplitude");
    std::complex<double> acc = 0.0;
    for (const auto& entry : pauli::connected_elements(h, groups, x)) {
        if (entry.amplitude == std::complex<double>(0.0, 0.0)) continue;
        if (!wf.feasible(entry.config)) continue;
        const std::complex<double> log_c = wf.log_amplitude(entry.config);
        if (log_c.real() == -std::numeric_limits<double>::infinity()) continue;
        acc += entry.amplitude * std::exp(log_c - log_x);
    }
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
        throw std::runtime_error("local_energy: non-finite amplitude ratio");
    return acc;
}

}  // namespace nqs
