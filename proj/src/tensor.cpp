#include "nqs/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nqs {

namespace {

long product(const std::vector<long>& dims) {
    long p = 1;
    for (long d : dims) p *= d;
    return p;
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(op + ": incompatible shapes " + a.shape_str() + " and " + b.shape_str());
}

// Decompose a shape around `axis` into (outer, dim, inner) extents.
void axis_extents(const Tensor& t, long axis, long& outer, long& dim, long& inner) {
    if (axis < 0 || axis >= t.rank()) throw std::invalid_argument("axis out of range");
    outer = 1;
    inner = 1;
    for (long i = 0; i < axis; ++i) outer *= t.dim(i);
    dim = t.dim(axis);
    for (long i = axis + 1; i < t.rank(); ++i) inner *= t.dim(i);
}

}  // namespace

Tensor::Tensor(std::vector<long> shape_in) : shape(std::move(shape_in)) {
    for (long d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
    }
    v.assign(static_cast<size_t>(product(shape)), 0.0);
    cols_cache = shape.empty() ? 1 : shape.back();
}

Tensor Tensor::zeros(std::vector<long> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<long> shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.v.begin(), t.v.end(), value);
    return t;
}

Tensor Tensor::from(std::vector<long> shape, std::vector<double> data) {
    Tensor t(std::move(shape));
    if (static_cast<long>(data.size()) != t.size())
        throw std::invalid_argument("tensor data length does not match shape");
    t.v = std::move(data);
    return t;
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

long Tensor::rows() const { return cols_cache == 0 ? 0 : size() / cols_cache; }
long Tensor::cols() const { return cols_cache; }

bool Tensor::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

Tensor t_matmul(const Tensor& a, const Tensor& b, bool ta, bool tb) {
    if (a.rank() != 2 || b.rank() != 2) throw std::invalid_argument("matmul expects rank-2 inputs");
    const long am = ta ? a.dim(1) : a.dim(0);
    const long ak = ta ? a.dim(0) : a.dim(1);
    const long bk = tb ? b.dim(1) : b.dim(0);
    const long bn = tb ? b.dim(0) : b.dim(1);
    if (ak != bk) shape_error("matmul", a, b);
    Tensor out({am, bn});
    for (long i = 0; i < am; ++i) {
        for (long k = 0; k < ak; ++k) {
            const double aik = ta ? a.at2(k, i) : a.at2(i, k);
            if (aik == 0.0) continue;
            for (long j = 0; j < bn; ++j) {
                const double bkj = tb ? b.at2(j, k) : b.at2(k, j);
                out.at2(i, j) += aik * bkj;
            }
        }
    }
    return out;
}

// b may either match a's shape or be a vector broadcast across a's rows.
static bool row_broadcast(const Tensor& a, const Tensor& b) {
    return b.rank() == 1 && b.dim(0) == a.cols();
}

Tensor t_add(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    if (a.same_shape(b)) {
        for (long i = 0; i < out.size(); ++i) out.at(i) += b.at(i);
    } else if (row_broadcast(a, b)) {
        for (long r = 0; r < a.rows(); ++r)
            for (long c = 0; c < a.cols(); ++c) out.at2(r, c) += b.at(c);
    } else {
        shape_error("add", a, b);
    }
    return out;
}

Tensor t_mul(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    if (a.same_shape(b)) {
        for (long i = 0; i < out.size(); ++i) out.at(i) *= b.at(i);
    } else if (row_broadcast(a, b)) {
        for (long r = 0; r < a.rows(); ++r)
            for (long c = 0; c < a.cols(); ++c) out.at2(r, c) *= b.at(c);
    } else {
        shape_error("mul", a, b);
    }
    return out;
}

Tensor t_scale(const Tensor& a, double f) {
    Tensor out = a;
    for (double& x : out.v) x *= f;
    return out;
}

Tensor t_relu(const Tensor& a) {
    Tensor out = a;
    for (double& x : out.v)
        if (x < 0.0) x = 0.0;
    return out;
}

Tensor t_sigmoid(const Tensor& a) {
    Tensor out = a;
    for (double& x : out.v) {
        // Split by sign so neither branch overflows exp().
        x = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return out;
}

Tensor t_softmax(const Tensor& a) {
    Tensor out = a;
    const long R = a.rows(), C = a.cols();
    for (long r = 0; r < R; ++r) {
        double mx = out.at2(r, 0);
        for (long c = 1; c < C; ++c) mx = std::max(mx, out.at2(r, c));
        double sum = 0.0;
        for (long c = 0; c < C; ++c) {
            double e = std::exp(out.at2(r, c) - mx);
            out.at2(r, c) = e;
            sum += e;
        }
        for (long c = 0; c < C; ++c) out.at2(r, c) /= sum;
    }
    return out;
}

Tensor t_log_softmax(const Tensor& a) {
    Tensor out = a;
    const long R = a.rows(), C = a.cols();
    for (long r = 0; r < R; ++r) {
        double mx = out.at2(r, 0);
        for (long c = 1; c < C; ++c) mx = std::max(mx, out.at2(r, c));
        double sum = 0.0;
        for (long c = 0; c < C; ++c) sum += std::exp(out.at2(r, c) - mx);
        const double lse = mx + std::log(sum);
        for (long c = 0; c < C; ++c) out.at2(r, c) -= lse;
    }
    return out;
}

static void norm_block(const double* x, double* y, long len, const double* gain, const double* bias,
                       long gb_offset, double eps) {
    double mean = 0.0;
    for (long i = 0; i < len; ++i) mean += x[i];
    mean /= static_cast<double>(len);
    double var = 0.0;
    for (long i = 0; i < len; ++i) {
        const double d = x[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(len);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (long i = 0; i < len; ++i) y[i] = gain[gb_offset + i] * (x[i] - mean) * inv + bias[gb_offset + i];
}

Tensor t_layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    if (gain.size() != x.cols() || bias.size() != x.cols())
        throw std::invalid_argument("layer_norm: gain/bias must match last dim");
    Tensor out = x;
    const long R = x.rows(), C = x.cols();
    for (long r = 0; r < R; ++r)
        norm_block(&x.v[static_cast<size_t>(r * C)], &out.v[static_cast<size_t>(r * C)], C,
                   gain.v.data(), bias.v.data(), 0, eps);
    return out;
}

Tensor t_group_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, long groups, double eps) {
    const long C = x.cols();
    if (groups <= 0 || C % groups != 0) throw std::invalid_argument("group_norm: groups must divide last dim");
    if (gain.size() != C || bias.size() != C)
        throw std::invalid_argument("group_norm: gain/bias must match last dim");
    const long glen = C / groups;
    Tensor out = x;
    for (long r = 0; r < x.rows(); ++r)
        for (long g = 0; g < groups; ++g) {
            const long off = r * C + g * glen;
            norm_block(&x.v[static_cast<size_t>(off)], &out.v[static_cast<size_t>(off)], glen,
                       gain.v.data(), bias.v.data(), g * glen, eps);
        }
    return out;
}

Tensor t_masked_fill(const Tensor& x, const Tensor& mask, double fill) {
    if (!x.same_shape(mask)) shape_error("masked_fill", x, mask);
    Tensor out = x;
    for (long i = 0; i < x.size(); ++i)
        if (mask.at(i) != 0.0) out.at(i) = fill;
    return out;
}

Tensor t_concat(const Tensor& a, const Tensor& b, long axis) {
    if (a.rank() != b.rank()) shape_error("concat", a, b);
    for (long i = 0; i < a.rank(); ++i)
        if (i != axis && a.dim(i) != b.dim(i)) shape_error("concat", a, b);
    long ao, ad, ai, bo, bd, bi;
    axis_extents(a, axis, ao, ad, ai);
    axis_extents(b, axis, bo, bd, bi);
    std::vector<long> shape = a.shape;
    shape[static_cast<size_t>(axis)] = ad + bd;
    Tensor out(shape);
    for (long o = 0; o < ao; ++o) {
        double* dst = &out.v[static_cast<size_t>(o * (ad + bd) * ai)];
        const double* pa = &a.v[static_cast<size_t>(o * ad * ai)];
        const double* pb = &b.v[static_cast<size_t>(o * bd * bi)];
        std::copy(pa, pa + ad * ai, dst);
        std::copy(pb, pb + bd * bi, dst + ad * ai);
    }
    return out;
}

Tensor t_slice(const Tensor& a, long axis, long start, long len) {
    long outer, dim, inner;
    axis_extents(a, axis, outer, dim, inner);
    if (start < 0 || len <= 0 || start + len > dim) throw std::invalid_argument("slice out of range");
    std::vector<long> shape = a.shape;
    shape[static_cast<size_t>(axis)] = len;
    Tensor out(shape);
    for (long o = 0; o < outer; ++o) {
        const double* src = &a.v[static_cast<size_t>((o * dim + start) * inner)];
        std::copy(src, src + len * inner, &out.v[static_cast<size_t>(o * len * inner)]);
    }
    return out;
}

Tensor t_reduce_sum(const Tensor& a) {
    double s = 0.0;
    for (double x : a.v) s += x;
    return Tensor::scalar(s);
}

Tensor t_rotate_pairs(const Tensor& x, const Tensor& theta, double sign, long pos_offset) {
    const long C = x.cols();
    if (C % 2 != 0) throw std::invalid_argument("rotate_pairs: last dim must be even");
    if (theta.size() != C / 2) throw std::invalid_argument("rotate_pairs: theta must have last_dim/2 entries");
    Tensor out = x;
    for (long r = 0; r < x.rows(); ++r) {
        const double pos = sign * static_cast<double>(r + pos_offset);
        for (long k = 0; k < C / 2; ++k) {
            const double ang = pos * theta.at(k);
            const double c = std::cos(ang), s = std::sin(ang);
            const double u = x.at2(r, 2 * k), w = x.at2(r, 2 * k + 1);
            out.at2(r, 2 * k) = c * u - s * w;
            out.at2(r, 2 * k + 1) = s * u + c * w;
        }
    }
    return out;
}

}  // namespace nqs
