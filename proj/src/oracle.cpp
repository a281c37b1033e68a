#include "nqs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nqs/parallel.hpp"

namespace nqs::oracle {

namespace {

// ---- dense symmetric eigensolver (Householder + implicit QL) ----
// Used on the doubled real form of a complex Hermitian matrix.

// Reduces symmetric a (n x n row-major) to tridiagonal form; on exit a holds
// the accumulated orthogonal transform, d the diagonal, e the subdiagonal.
void tred2(std::vector<double>& a, long n, std::vector<double>& d, std::vector<double>& e) {
    auto A = [&](long i, long j) -> double& { return a[static_cast<size_t>(i * n + j)]; };
    for (long i = n - 1; i >= 1; --i) {
        const long l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (long k = 0; k <= l; ++k) scale += std::fabs(A(i, k));
            if (scale == 0.0) {
                e[static_cast<size_t>(i)] = A(i, l);
            } else {
                for (long k = 0; k <= l; ++k) {
                    A(i, k) /= scale;
                    h += A(i, k) * A(i, k);
                }
                double f = A(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[static_cast<size_t>(i)] = scale * g;
                h -= f * g;
                A(i, l) = f - g;
                f = 0.0;
                for (long j = 0; j <= l; ++j) {
                    A(j, i) = A(i, j) / h;
                    g = 0.0;
                    for (long k = 0; k <= j; ++k) g += A(j, k) * A(i, k);
                    for (long k = j + 1; k <= l; ++k) g += A(k, j) * A(i, k);
                    e[static_cast<size_t>(j)] = g / h;
                    f += e[static_cast<size_t>(j)] * A(i, j);
                }
                const double hh = f / (h + h);
                for (long j = 0; j <= l; ++j) {
                    f = A(i, j);
                    g = e[static_cast<size_t>(j)] - hh * f;
                    e[static_cast<size_t>(j)] = g;
                    for (long k = 0; k <= j; ++k)
                        A(j, k) -= f * e[static_cast<size_t>(k)] + g * A(i, k);
                }
            }
        } else {
            e[static_cast<size_t>(i)] = A(i, l);
        }
        d[static_cast<size_t>(i)] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (long i = 0; i < n; ++i) {
        if (d[static_cast<size_t>(i)] != 0.0) {
            for (long j = 0; j < i; ++j) {
                double g = 0.0;
                for (long k = 0; k < i; ++k) g += A(i, k) * A(k, j);
                for (long k = 0; k < i; ++k) A(k, j) -= g * A(k, i);
            }
        }
        d[static_cast<size_t>(i)] = A(i, i);
        A(i, i) = 1.0;
        for (long j = 0; j < i; ++j) A(j, i) = A(i, j) = 0.0;
    }
}

// Implicit-shift QL on tridiagonal (d, e); z, when nonnull, accumulates the
// eigenvector columns on top of whatever transform it already holds.
void tqli(std::vector<double>& d, std::vector<double>& e, long n, std::vector<double>* z) {
    if (n == 1) return;
    for (long i = 1; i < n; ++i) e[static_cast<size_t>(i - 1)] = e[static_cast<size_t>(i)];
    e[static_cast<size_t>(n - 1)] = 0.0;
    for (long l = 0; l < n; ++l) {
        int iter = 0;
        long m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[static_cast<size_t>(m)]) + std::fabs(d[static_cast<size_t>(m + 1)]);
                if (std::fabs(e[static_cast<size_t>(m)]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 100) throw std::runtime_error("tqli: eigenvalue iteration stalled");
                double g = (d[static_cast<size_t>(l + 1)] - d[static_cast<size_t>(l)]) /
                           (2.0 * e[static_cast<size_t>(l)]);
                double r = std::hypot(g, 1.0);
                g = d[static_cast<size_t>(m)] - d[static_cast<size_t>(l)] +
                    e[static_cast<size_t>(l)] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                long i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[static_cast<size_t>(i)];
                    const double b = c * e[static_cast<size_t>(i)];
                    r = std::hypot(f, g);
                    e[static_cast<size_t>(i + 1)] = r;
                    if (r == 0.0) {
                        d[static_cast<size_t>(i + 1)] -= p;
                        e[static_cast<size_t>(m)] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[static_cast<size_t>(i + 1)] - p;
                    r = (d[static_cast<size_t>(i)] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[static_cast<size_t>(i + 1)] = g + p;
                    g = c * r - b;
                    if (z) {
                        for (long k = 0; k < n; ++k) {
                            const double fk = (*z)[static_cast<size_t>(k * n + i + 1)];
                            (*z)[static_cast<size_t>(k * n + i + 1)] =
                                s * (*z)[static_cast<size_t>(k * n + i)] + c * fk;
                            (*z)[static_cast<size_t>(k * n + i)] =
                                c * (*z)[static_cast<size_t>(k * n + i)] - s * fk;
                        }
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[static_cast<size_t>(l)] -= p;
                e[static_cast<size_t>(l)] = g;
                e[static_cast<size_t>(m)] = 0.0;
            }
        } while (m != l);
    }
}

// Doubled real embedding of the Hermitian CSR: [[Re, -Im], [Im, Re]].
std::vector<double> doubled_dense(const SparseOperator& op) {
    const long n = op.dim;
    std::vector<double> a(static_cast<size_t>(4 * n * n), 0.0);
    auto A = [&](long i, long j) -> double& { return a[static_cast<size_t>(i * 2 * n + j)]; };
    for (long i = 0; i < n; ++i) {
        for (long p = op.row_ptr[static_cast<size_t>(i)]; p < op.row_ptr[static_cast<size_t>(i + 1)]; ++p) {
            const long j = op.col_idx[static_cast<size_t>(p)];
            const cdouble v = op.vals[static_cast<size_t>(p)];
            A(i, j) = v.real();
            A(i, j + n) = -v.imag();
            A(i + n, j) = v.imag();
            A(i + n, j + n) = v.real();
        }
    }
    return a;
}

double vec_norm(const std::vector<cdouble>& v) {
    double s = 0.0;
    for (const cdouble& x : v) s += std::norm(x);
    return std::sqrt(s);
}

cdouble vec_dot(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
    cdouble s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double residual_norm(const SparseOperator& op, const std::vector<cdouble>& v, double theta) {
    std::vector<cdouble> av(v.size());
    matvec(op, v.data(), av.data());
    double s = 0.0;
    for (size_t i = 0; i < v.size(); ++i) s += std::norm(av[i] - theta * v[i]);
    return std::sqrt(s);
}

// Smallest eigenpair of the (alpha, beta) tridiagonal built so far.
void tridiag_ground(const std::vector<double>& alpha, const std::vector<double>& beta, double& theta,
                    std::vector<double>& s) {
    const long k = static_cast<long>(alpha.size());
    std::vector<double> d = alpha;
    std::vector<double> e(static_cast<size_t>(k), 0.0);
    for (long i = 1; i < k; ++i) e[static_cast<size_t>(i)] = beta[static_cast<size_t>(i - 1)];
    std::vector<double> z(static_cast<size_t>(k * k), 0.0);
    for (long i = 0; i < k; ++i) z[static_cast<size_t>(i * k + i)] = 1.0;
    tqli(d, e, k, &z);
    long best = 0;
    for (long i = 1; i < k; ++i)
        if (d[static_cast<size_t>(i)] < d[static_cast<size_t>(best)]) best = i;
    theta = d[static_cast<size_t>(best)];
    s.assign(static_cast<size_t>(k), 0.0);
    for (long i = 0; i < k; ++i) s[static_cast<size_t>(i)] = z[static_cast<size_t>(i * k + best)];
}

}  // namespace

long SparseOperator::index_of(uint64_t config) const {
    auto it = std::lower_bound(basis.begin(), basis.end(), config);
    if (it == basis.end() || *it != config) return -1;
    return static_cast<long>(it - basis.begin());
}

SparseOperator build_operator(const pauli::Hamiltonian& h, bool restrict_sector) {
    SparseOperator op;
    op.n_qubits = h.n_qubits;
    op.restricted = restrict_sector;
    if (restrict_sector) {
        if (h.n_qubits > 24)
            throw std::invalid_argument("build_operator: sector-restricted assembly supports n_qubits <= 24");
        op.basis = pauli::enumerate_sector(h.n_qubits, pauli::sector_of(h.n_qubits, h.n_electrons, h.multiplicity));
    } else {
        if (h.n_qubits > 14)
            throw std::invalid_argument("build_operator: full-space assembly supports n_qubits <= 14");
        op.basis.resize(static_cast<size_t>(1) << h.n_qubits);
        for (size_t i = 0; i < op.basis.size(); ++i) op.basis[i] = static_cast<uint64_t>(i);
    }
    op.dim = static_cast<long>(op.basis.size());
    if (op.dim == 0) throw std::invalid_argument("build_operator: empty sector");

    const pauli::FlipGroups groups = pauli::flip_groups(h);

    // Row-by-row assembly into triples, then CSR by (row, col).
    struct Triple {
        long row, col;
        cdouble val;
    };
    std::vector<Triple> triples;
    triples.reserve(op.basis.size() * (groups.masks.size() + 1));
    for (long row = 0; row < op.dim; ++row) {
        const uint64_t x = op.basis[static_cast<size_t>(row)];
        for (const auto& entry : pauli::connected_elements(h, groups, x)) {
            if (entry.amplitude == cdouble(0.0, 0.0)) continue;
            const long col = op.index_of(entry.config);
            if (col < 0) continue;  // projection onto the restricted basis
            triples.push_back({row, col, entry.amplitude});
        }
    }
    std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    op.row_ptr.assign(static_cast<size_t>(op.dim + 1), 0);
    for (const Triple& t : triples) ++op.row_ptr[static_cast<size_t>(t.row + 1)];
    for (long i = 0; i < op.dim; ++i)
        op.row_ptr[static_cast<size_t>(i + 1)] += op.row_ptr[static_cast<size_t>(i)];
    op.col_idx.resize(triples.size());
    op.vals.resize(triples.size());
    for (size_t i = 0; i < triples.size(); ++i) {
        op.col_idx[i] = triples[i].col;
        op.vals[i] = triples[i].val;
    }
    return op;
}

void matvec_serial(const SparseOperator& op, const cdouble* x, cdouble* y) {
    for (long i = 0; i < op.dim; ++i) {
        cdouble acc = 0.0;
        for (long p = op.row_ptr[static_cast<size_t>(i)]; p < op.row_ptr[static_cast<size_t>(i + 1)]; ++p)
            acc += op.vals[static_cast<size_t>(p)] * x[op.col_idx[static_cast<size_t>(p)]];
        y[i] = acc;
    }
}

void matvec(const SparseOperator& op, const cdouble* x, cdouble* y) {
    // Row-sliced: each index owns its output slot, so the result is
    // bit-identical to the serial loop for any thread count.
    parallel::parallel_for(op.dim, [&](long i) {
        cdouble acc = 0.0;
        for (long p = op.row_ptr[static_cast<size_t>(i)]; p < op.row_ptr[static_cast<size_t>(i + 1)]; ++p)
            acc += op.vals[static_cast<size_t>(p)] * x[op.col_idx[static_cast<size_t>(p)]];
        y[i] = acc;
    });
}

std::vector<double> dense_spectrum(const SparseOperator& op) {
    if (op.dim >= 2048) throw std::invalid_argument("dense_spectrum: dimension must be below 2048");
    std::vector<double> a = doubled_dense(op);
    const long n2 = 2 * op.dim;
    std::vector<double> d(static_cast<size_t>(n2)), e(static_cast<size_t>(n2));
    tred2(a, n2, d, e);
    tqli(d, e, n2, &a);
    std::sort(d.begin(), d.end());
    // Every eigenvalue of the Hermitian matrix shows up twice in the doubled
    // real form; keep one copy of each pair.
    std::vector<double> out;
    out.reserve(static_cast<size_t>(op.dim));
    for (long i = 0; i < n2; i += 2) out.push_back(d[static_cast<size_t>(i)]);
    return out;
}

static GroundState dense_ground(const SparseOperator& op) {
    const long n = op.dim;
    std::vector<double> a = doubled_dense(op);
    const long n2 = 2 * n;
    std::vector<double> d(static_cast<size_t>(n2)), e(static_cast<size_t>(n2));
    tred2(a, n2, d, e);
    tqli(d, e, n2, &a);
    long best = 0;
    for (long i = 1; i < n2; ++i)
        if (d[static_cast<size_t>(i)] < d[static_cast<size_t>(best)]) best = i;
    GroundState g;
    g.energy = d[static_cast<size_t>(best)];
    g.vector.resize(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i)
        g.vector[static_cast<size_t>(i)] =
            cdouble(a[static_cast<size_t>(i * n2 + best)], a[static_cast<size_t>((i + n) * n2 + best)]);
    const double nrm = vec_norm(g.vector);
    if (nrm == 0.0) throw std::runtime_error("dense eigensolver produced a null eigenvector");
    for (cdouble& x : g.vector) x /= nrm;
    g.residual = residual_norm(op, g.vector, g.energy);
    g.iterations = 0;
    return g;
}

GroundState lanczos_ground(const SparseOperator& op, uint64_t seed, int max_iterations, double tol) {
    const long dim = op.dim;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto random_vec = [&]() {
        std::vector<cdouble> v(static_cast<size_t>(dim));
        for (cdouble& x : v) x = cdouble(gauss(rng), gauss(rng));
        return v;
    };

    std::vector<cdouble> start = random_vec();
    int total_iters = 0;
    const long cycle_cap = std::min<long>(dim, 500);
    GroundState best;
    best.energy = std::numeric_limits<double>::infinity();
    best.residual = std::numeric_limits<double>::infinity();

    while (total_iters < max_iterations) {
        double nrm = vec_norm(start);
        if (nrm == 0.0) start = random_vec(), nrm = vec_norm(start);
        for (cdouble& x : start) x /= nrm;

        std::vector<std::vector<cdouble>> V{start};
        std::vector<double> alpha, beta;  // beta[j] couples V[j] and V[j+1]
        std::vector<cdouble> w(static_cast<size_t>(dim));

        for (long j = 0; j < cycle_cap && total_iters < max_iterations; ++j, ++total_iters) {
            matvec(op, V[static_cast<size_t>(j)].data(), w.data());
            const double a_j = vec_dot(V[static_cast<size_t>(j)], w).real();
            alpha.push_back(a_j);
            for (long i = 0; i < dim; ++i) w[static_cast<size_t>(i)] -= a_j * V[static_cast<size_t>(j)][static_cast<size_t>(i)];
            if (j > 0) {
                const double b = beta[static_cast<size_t>(j - 1)];
                for (long i = 0; i < dim; ++i)
                    w[static_cast<size_t>(i)] -= b * V[static_cast<size_t>(j - 1)][static_cast<size_t>(i)];
            }
            // Full reorthogonalization, applied twice for numerical safety.
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& vi : V) {
                    const cdouble c = vec_dot(vi, w);
                    for (long i = 0; i < dim; ++i) w[static_cast<size_t>(i)] -= c * vi[static_cast<size_t>(i)];
                }
            const double b_next = vec_norm(w);

            const bool krylov_full = static_cast<long>(V.size()) == dim;
            const bool check_now = (j % 5 == 4) || b_next <= 1e-13 || krylov_full || j == cycle_cap - 1;
            if (check_now) {
                double theta;
                std::vector<double> s;
                tridiag_ground(alpha, beta, theta, s);
                const double est = b_next * std::fabs(s.back());
                if (est <= tol || b_next <= 1e-13 || krylov_full || j == cycle_cap - 1) {
                    std::vector<cdouble> ritz(static_cast<size_t>(dim), 0.0);
                    for (size_t k = 0; k < V.size(); ++k)
                        for (long i = 0; i < dim; ++i)
                            ritz[static_cast<size_t>(i)] += s[k] * V[k][static_cast<size_t>(i)];
                    const double rn = vec_norm(ritz);
                    for (cdouble& x : ritz) x /= rn;
                    const double res = residual_norm(op, ritz, theta);
                    if (res < best.residual) {
                        best.energy = theta;
                        best.vector = ritz;
                        best.residual = res;
                        best.iterations = total_iters + 1;
                    }
                    if (best.residual <= tol) return best;
                    if (b_next <= 1e-13 && !krylov_full) {
                        // Invariant subspace that missed the ground state:
                        // widen the basis with a fresh orthogonalized vector.
                        std::vector<cdouble> fresh = random_vec();
                        for (const auto& vi : V) {
                            const cdouble c = vec_dot(vi, fresh);
                            for (long i = 0; i < dim; ++i)
                                fresh[static_cast<size_t>(i)] -= c * vi[static_cast<size_t>(i)];
                        }
                        const double fn = vec_norm(fresh);
                        if (fn <= 1e-13) break;
                        for (cdouble& x : fresh) x /= fn;
                        beta.push_back(0.0);
                        V.push_back(std::move(fresh));
                        continue;
                    }
                    if (krylov_full || j == cycle_cap - 1) break;
                }
            }
            if (b_next <= 1e-13) continue;  // handled above on the next check
            beta.push_back(b_next);
            std::vector<cdouble> vnext = w;
            for (cdouble& x : vnext) x /= b_next;
            V.push_back(std::move(vnext));
        }
        if (best.residual <= tol) return best;
        // Restart from the best Ritz vector found so far.
        if (!best.vector.empty()) start = best.vector;
        else start = random_vec();
    }
    if (best.residual <= tol) return best;
    throw std::runtime_error("lanczos_ground: did not reach the residual tolerance");
}

GroundState ground_state(const SparseOperator& op, uint64_t seed) {
    if (op.dim == 0) throw std::invalid_argument("ground_state: empty operator");
    GroundState g = op.dim < 2048 ? dense_ground(op) : lanczos_ground(op, seed);
    if (g.residual > 1e-9)
        throw std::runtime_error("ground_state: residual above tolerance");
    return g;
}

Expectation exact_expectation(const Wavefunction& wf, const pauli::Hamiltonian& h) {
    if (h.n_qubits > 12)
        throw std::invalid_argument("exact_expectation: full enumeration supports n_qubits <= 12");
    const uint64_t space = 1ULL << h.n_qubits;
    std::vector<uint64_t> configs;
    for (uint64_t x = 0; x < space; ++x)
        if (wf.feasible(x)) configs.push_back(x);
    if (configs.empty()) throw std::invalid_argument("exact_expectation: no feasible configurations");

    std::vector<cdouble> psi(configs.size());
    parallel::parallel_for(static_cast<long>(configs.size()), [&](long i) {
        const std::complex<double> lp = wf.log_amplitude(configs[static_cast<size_t>(i)]);
        psi[static_cast<size_t>(i)] =
            lp.real() == -std::numeric_limits<double>::infinity() ? cdouble(0.0, 0.0) : std::exp(lp);
    });
    double norm = 0.0;
    for (const cdouble& a : psi) norm += std::norm(a);
    if (norm == 0.0) throw std::runtime_error("exact_expectation: wavefunction is identically zero");

    const pauli::FlipGroups groups = pauli::flip_groups(h);
    auto index_of = [&](uint64_t c) -> long {
        auto it = std::lower_bound(configs.begin(), configs.end(), c);
        if (it == configs.end() || *it != c) return -1;
        return static_cast<long>(it - configs.begin());
    };

    // a_x = <x|H|psi>, accumulated from the row of H at x; then
    // <H^2> = ||H psi||^2 without ever forming H^2.
    std::vector<cdouble> hp(configs.size());
    parallel::parallel_for(static_cast<long>(configs.size()), [&](long i) {
        const uint64_t x = configs[static_cast<size_t>(i)];
        cdouble acc = 0.0;
        for (const auto& entry : pauli::connected_elements(h, groups, x)) {
            const long j = index_of(entry.config);
            if (j < 0) continue;
            acc += entry.amplitude * psi[static_cast<size_t>(j)];
        }
        hp[static_cast<size_t>(i)] = acc;
    });

    cdouble e_num = 0.0;
    double h2_num = 0.0;
    for (size_t i = 0; i < configs.size(); ++i) {
        e_num += std::conj(psi[i]) * hp[i];
        h2_num += std::norm(hp[i]);
    }
    Expectation out;
    out.energy = e_num.real() / norm;
    out.variance = std::max(0.0, h2_num / norm - out.energy * out.energy);
    return out;
}

double reference_ground_energy(const pauli::Hamiltonian& h, uint64_t seed) {
    if (h.n_qubits > 20)
        throw std::invalid_argument("reference_ground_energy: exact reference limited to n_qubits <= 20");
    const SparseOperator op = build_operator(h, h.constrained());
    return ground_state(op, seed).energy;
}

TableWavefunction::TableWavefunction(std::vector<uint64_t> basis, std::vector<cdouble> amplitudes)
    : basis_(std::move(basis)), amps_(std::move(amplitudes)) {
    if (basis_.size() != amps_.size())
        throw std::invalid_argument("TableWavefunction: basis/amplitude length mismatch");
    if (!std::is_sorted(basis_.begin(), basis_.end()))
        throw std::invalid_argument("TableWavefunction: basis must be ascending");
}

std::complex<double> TableWavefunction::log_amplitude(uint64_t x) const {
    auto it = std::lower_bound(basis_.begin(), basis_.end(), x);
    if (it == basis_.end() || *it != x)
        return {-std::numeric_limits<double>::infinity(), 0.0};
    const cdouble a = amps_[static_cast<size_t>(it - basis_.begin())];
    if (a == cdouble(0.0, 0.0)) return {-std::numeric_limits<double>::infinity(), 0.0};
    return std::log(a);
}

bool TableWavefunction::feasible(uint64_t x) const {
    auto it = std::lower_bound(basis_.begin(), basis_.end(), x);
    return it != basis_.end() && *it == x;
}

}  // namespace nqs::oracle
