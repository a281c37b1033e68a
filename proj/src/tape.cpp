#include "nqs/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace nqs {

namespace {

void check_finite(const Tensor& t, const char* op) {
    if (!t.all_finite()) throw std::runtime_error(std::string("non-finite values produced by ") + op);
}

}  // namespace

int Tape::push(Node n) {
    for (int in : {n.a, n.b, n.c}) {
        if (in == -1) continue;
        if (in < 0 || in >= static_cast<int>(nodes.size()))
            throw std::invalid_argument("tape: input node id out of range");
    }
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
}

static bool any_grad(const Tape& t, int a, int b = -1, int c = -1) {
    auto ng = [&](int id) { return id >= 0 && t.nodes[static_cast<size_t>(id)].needs_grad; };
    return ng(a) || ng(b) || ng(c);
}

int Tape::leaf(Tensor v) {
    Node n;
    n.op = Op::leaf;
    n.val = std::move(v);
    n.needs_grad = true;
    return push(std::move(n));
}

int Tape::constant(Tensor v) {
    Node n;
    n.op = Op::constant;
    n.val = std::move(v);
    n.needs_grad = false;
    return push(std::move(n));
}

int Tape::matmul(int a, int b, bool ta, bool tb) {
    Node n;
    n.op = Op::matmul;
    n.a = a;
    n.b = b;
    n.ta = ta;
    n.tb = tb;
    n.val = t_matmul(val(a), val(b), ta, tb);
    n.needs_grad = any_grad(*this, a, b);
    check_finite(n.val, "matmul");
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    Node n;
    n.op = Op::add;
    n.a = a;
    n.b = b;
    n.val = t_add(val(a), val(b));
    n.needs_grad = any_grad(*this, a, b);
    check_finite(n.val, "add");
    return push(std::move(n));
}

int Tape::mul(int a, int b) {
    Node n;
    n.op = Op::mul;
    n.a = a;
    n.b = b;
    n.val = t_mul(val(a), val(b));
    n.needs_grad = any_grad(*this, a, b);
    check_finite(n.val, "mul");
    return push(std::move(n));
}

int Tape::scale(int a, double f) {
    Node n;
    n.op = Op::scale;
    n.a = a;
    n.f = f;
    n.val = t_scale(val(a), f);
    n.needs_grad = any_grad(*this, a);
    check_finite(n.val, "scale");
    return push(std::move(n));
}

int Tape::softmax(int a) {
    Node n;
    n.op = Op::softmax;
    n.a = a;
    n.val = t_softmax(val(a));
    n.needs_grad = any_grad(*this, a);
    check_finite(n.val, "softmax");
    return push(std::move(n));
}

int Tape::log_softmax(int a) {
    Node n;
    n.op = Op::log_softmax;
    n.a = a;
    n.val = t_log_softmax(val(a));
    n.needs_grad = any_grad(*this, a);
    check_finite(n.val, "log_softmax");
    return push(std::move(n));
}

int Tape::sigmoid(int a) {
    Node n;
    n.op = Op::sigmoid;
    n.a = a;
    n.val = t_sigmoid(val(a));
    n.needs_grad = any_grad(*this, a);
    check_finite(n.val, "sigmoid");
    return push(std::move(n));
}

int Tape::relu(int a) {
    Node n;
    n.op = Op::relu;
    n.a = a;
    n.val = t_relu(val(a));
    n.needs_grad = any_grad(*this, a);
    check_finite(n.val, "relu");
    return push(std::move(n));
}

int Tape::layer_norm(int x, int gain, int bias) {
    Node n;
    n.op = Op::layer_norm;
    n.a = x;
    n.b = gain;
    n.c = bias;
    n.i1 = 1;  // one group spanning the whole row
    n.val = t_layer_norm(val(x), val(gain), val(bias), norm_eps);
    n.needs_grad = any_grad(*this, x, gain, bias);
    check_finite(n.val, "layer_norm");
    return push(std::move(n));
}

int Tape::group_norm(int x, int gain, int bias, long groups) {
    Node n;
    n.op = Op::group_norm;
    n.a = x;
    n.b = gain;
    n.c = bias;
    n.i1 = groups;
    n.val = t_group_norm(val(x), val(gain), val(bias), groups, norm_eps);
    n.needs_grad = any_grad(*this, x, gain, bias);
    check_finite(n.val, "group_norm");
    return push(std::move(n));
}

int Tape::embed_lookup(int table, std::vector<long> ids) {
    const Tensor& tab = val(table);
    if (tab.rank() != 2) throw std::invalid_argument("embed_lookup: table must be rank 2");
    Node n;
    n.op = Op::embed_lookup;
    n.a = table;
    n.ids = std::move(ids);
    Tensor out({static_cast<long>(n.ids.size()), tab.dim(1)});
    for (size_t r = 0; r < n.ids.size(); ++r) {
        const long row = n.ids[r];
        if (row < 0 || row >= tab.dim(0)) throw std::invalid_argument("embed_lookup: id out of range");
        for (long c = 0; c < tab.dim(1); ++c) out.at2(static_cast<long>(r), c) = tab.at2(row, c);
    }
    n.val = std::move(out);
    n.needs_grad = any_grad(*this, table);
    return push(std::move(n));
}

int Tape::masked_fill(int x, int mask, double fill) {
    if (nodes[static_cast<size_t>(mask)].needs_grad)
        throw std::invalid_argument("masked_fill: mask must be a constant");
    Node n;
    n.op = Op::masked_fill;
    n.a = x;
    n.b = mask;
    n.f = fill;
    n.val = t_masked_fill(val(x), val(mask), fill);
    n.needs_grad = any_grad(*this, x);
    check_finite(n.val, "masked_fill");
    return push(std::move(n));
}

int Tape::concat(int a, int b, long axis) {
    Node n;
    n.op = Op::concat;
    n.a = a;
    n.b = b;
    n.i0 = axis;
    n.val = t_concat(val(a), val(b), axis);
    n.needs_grad = any_grad(*this, a, b);
    return push(std::move(n));
}

int Tape::slice(int a, long axis, long start, long len) {
    Node n;
    n.op = Op::slice;
    n.a = a;
    n.i0 = axis;
    n.i1 = start;
    n.i2 = len;
    n.val = t_slice(val(a), axis, start, len);
    n.needs_grad = any_grad(*this, a);
    return push(std::move(n));
}

int Tape::reduce_sum(int a) {
    Node n;
    n.op = Op::reduce_sum;
    n.a = a;
    n.val = t_reduce_sum(val(a));
    n.needs_grad = any_grad(*this, a);
    check_finite(n.val, "reduce_sum");
    return push(std::move(n));
}

int Tape::rotate_pairs(int x, int theta, double sign, long pos_offset) {
    if (nodes[static_cast<size_t>(theta)].needs_grad)
        throw std::invalid_argument("rotate_pairs: theta must be a constant");
    Node n;
    n.op = Op::rotate_pairs;
    n.a = x;
    n.b = theta;
    n.f = sign;
    n.i2 = pos_offset;
    n.val = t_rotate_pairs(val(x), val(theta), sign, pos_offset);
    n.needs_grad = any_grad(*this, x);
    check_finite(n.val, "rotate_pairs");
    return push(std::move(n));
}

Tensor& Tape::grad_buf(int id) {
    Node& n = nodes[static_cast<size_t>(id)];
    if (!n.grad_live) {
        n.grad = Tensor::zeros(n.val.shape);
        n.grad_live = true;
    }
    return n.grad;
}

void Tape::accum(int id, const Tensor& g) {
    if (id < 0) return;
    Node& n = nodes[static_cast<size_t>(id)];
    if (!n.needs_grad) return;
    Tensor& dst = grad_buf(id);
    for (long i = 0; i < dst.size(); ++i) dst.at(i) += g.at(i);
}

Tensor Tape::grad_of(int id) const {
    const Node& n = nodes[static_cast<size_t>(id)];
    if (n.grad_live) return n.grad;
    return Tensor::zeros(n.val.shape);
}

// Backward for the two normalization ops; recomputes per-block statistics
// from the stored input instead of caching them at forward time.
static void norm_backward(const Tensor& x, const Tensor& gain, const Tensor& gout, long groups,
                          double eps, Tensor& dx, Tensor& dgain, Tensor& dbias) {
    const long C = x.cols();
    const long glen = C / groups;
    for (long r = 0; r < x.rows(); ++r) {
        for (long g = 0; g < groups; ++g) {
            const long off = r * C + g * glen;
            double mean = 0.0;
            for (long i = 0; i < glen; ++i) mean += x.at(off + i);
            mean /= static_cast<double>(glen);
            double var = 0.0;
            for (long i = 0; i < glen; ++i) {
                const double d = x.at(off + i) - mean;
                var += d * d;
            }
            var /= static_cast<double>(glen);
            const double inv = 1.0 / std::sqrt(var + eps);
            double mean_dy = 0.0, mean_dyy = 0.0;
            for (long i = 0; i < glen; ++i) {
                const double yn = (x.at(off + i) - mean) * inv;
                const double dy = gout.at(off + i) * gain.at(g * glen + i);
                dgain.at(g * glen + i) += gout.at(off + i) * yn;
                dbias.at(g * glen + i) += gout.at(off + i);
                mean_dy += dy;
                mean_dyy += dy * yn;
            }
            mean_dy /= static_cast<double>(glen);
            mean_dyy /= static_cast<double>(glen);
            for (long i = 0; i < glen; ++i) {
                const double yn = (x.at(off + i) - mean) * inv;
                const double dy = gout.at(off + i) * gain.at(g * glen + i);
                dx.at(off + i) += inv * (dy - mean_dy - yn * mean_dyy);
            }
        }
    }
}

void Tape::backward(int id) {
    if (val(id).size() != 1) throw std::invalid_argument("backward: target must be a scalar");
    for (Node& n : nodes) n.grad_live = false;
    if (!nodes[static_cast<size_t>(id)].needs_grad) return;
    grad_buf(id).at(0) = 1.0;

    for (int i = id; i >= 0; --i) {
        Node& n = nodes[static_cast<size_t>(i)];
        if (!n.grad_live || !n.needs_grad) continue;
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::leaf:
            case Op::constant:
                break;
            case Op::matmul: {
                const Tensor& A = val(n.a);
                const Tensor& B = val(n.b);
                if (nodes[static_cast<size_t>(n.a)].needs_grad) {
                    Tensor dA = n.ta ? t_matmul(B, g, n.tb, true) : t_matmul(g, B, false, !n.tb);
                    accum(n.a, dA);
                }
                if (nodes[static_cast<size_t>(n.b)].needs_grad) {
                    Tensor dB = n.tb ? t_matmul(g, A, true, n.ta) : t_matmul(A, g, !n.ta, false);
                    accum(n.b, dB);
                }
                break;
            }
            case Op::add: {
                accum(n.a, g);
                const Tensor& B = val(n.b);
                if (nodes[static_cast<size_t>(n.b)].needs_grad) {
                    if (B.same_shape(n.val)) {
                        accum(n.b, g);
                    } else {  // bias broadcast across rows
                        Tensor db = Tensor::zeros(B.shape);
                        for (long r = 0; r < g.rows(); ++r)
                            for (long c = 0; c < g.cols(); ++c) db.at(c) += g.at2(r, c);
                        accum(n.b, db);
                    }
                }
                break;
            }
            case Op::mul: {
                const Tensor& A = val(n.a);
                const Tensor& B = val(n.b);
                if (nodes[static_cast<size_t>(n.a)].needs_grad) {
                    Tensor da = t_mul(g, B);  // same broadcast pattern as forward
                    accum(n.a, da);
                }
                if (nodes[static_cast<size_t>(n.b)].needs_grad) {
                    if (B.same_shape(n.val)) {
                        accum(n.b, t_mul(g, A));
                    } else {
                        Tensor db = Tensor::zeros(B.shape);
                        for (long r = 0; r < g.rows(); ++r)
                            for (long c = 0; c < g.cols(); ++c) db.at(c) += g.at2(r, c) * A.at2(r, c);
                        accum(n.b, db);
                    }
                }
                break;
            }
            case Op::scale:
                accum(n.a, t_scale(g, n.f));
                break;
            case Op::softmax: {
                const Tensor& y = n.val;
                Tensor dx = Tensor::zeros(y.shape);
                for (long r = 0; r < y.rows(); ++r) {
                    double dot = 0.0;
                    for (long c = 0; c < y.cols(); ++c) dot += g.at2(r, c) * y.at2(r, c);
                    for (long c = 0; c < y.cols(); ++c)
                        dx.at2(r, c) = y.at2(r, c) * (g.at2(r, c) - dot);
                }
                accum(n.a, dx);
                break;
            }
            case Op::log_softmax: {
                Tensor dx = Tensor::zeros(n.val.shape);
                for (long r = 0; r < n.val.rows(); ++r) {
                    double gsum = 0.0;
                    for (long c = 0; c < n.val.cols(); ++c) gsum += g.at2(r, c);
                    for (long c = 0; c < n.val.cols(); ++c)
                        dx.at2(r, c) = g.at2(r, c) - std::exp(n.val.at2(r, c)) * gsum;
                }
                accum(n.a, dx);
                break;
            }
            case Op::sigmoid: {
                Tensor dx = g;
                for (long i = 0; i < dx.size(); ++i)
                    dx.at(i) *= n.val.at(i) * (1.0 - n.val.at(i));
                accum(n.a, dx);
                break;
            }
            case Op::relu: {
                Tensor dx = g;
                for (long i = 0; i < dx.size(); ++i)
                    if (n.val.at(i) <= 0.0) dx.at(i) = 0.0;
                accum(n.a, dx);
                break;
            }
            case Op::layer_norm:
            case Op::group_norm: {
                const Tensor& x = val(n.a);
                const Tensor& gain = val(n.b);
                Tensor dx = Tensor::zeros(x.shape);
                Tensor dgain = Tensor::zeros(gain.shape);
                Tensor dbias = Tensor::zeros(gain.shape);
                norm_backward(x, gain, g, n.i1, norm_eps, dx, dgain, dbias);
                accum(n.a, dx);
                accum(n.b, dgain);
                accum(n.c, dbias);
                break;
            }
            case Op::embed_lookup: {
                const Tensor& tab = val(n.a);
                if (nodes[static_cast<size_t>(n.a)].needs_grad) {
                    Tensor dtab = Tensor::zeros(tab.shape);
                    for (size_t r = 0; r < n.ids.size(); ++r)
                        for (long c = 0; c < tab.dim(1); ++c)
                            dtab.at2(n.ids[r], c) += g.at2(static_cast<long>(r), c);
                    accum(n.a, dtab);
                }
                break;
            }
            case Op::masked_fill: {
                Tensor dx = g;
                const Tensor& mask = val(n.b);
                for (long i = 0; i < dx.size(); ++i)
                    if (mask.at(i) != 0.0) dx.at(i) = 0.0;
                accum(n.a, dx);
                break;
            }
            case Op::concat: {
                const long axis = n.i0;
                const long alen = val(n.a).dim(axis);
                const long blen = val(n.b).dim(axis);
                if (nodes[static_cast<size_t>(n.a)].needs_grad)
                    accum(n.a, t_slice(g, axis, 0, alen));
                if (nodes[static_cast<size_t>(n.b)].needs_grad)
                    accum(n.b, t_slice(g, axis, alen, blen));
                break;
            }
            case Op::slice: {
                const Tensor& x = val(n.a);
                Tensor dx = Tensor::zeros(x.shape);
                long outer = 1, dim = x.dim(n.i0), inner = 1;
                for (long k = 0; k < n.i0; ++k) outer *= x.dim(k);
                for (long k = n.i0 + 1; k < x.rank(); ++k) inner *= x.dim(k);
                for (long o = 0; o < outer; ++o) {
                    double* dst = &dx.v[static_cast<size_t>((o * dim + n.i1) * inner)];
                    const double* src = &g.v[static_cast<size_t>(o * n.i2 * inner)];
                    for (long k = 0; k < n.i2 * inner; ++k) dst[k] += src[k];
                }
                accum(n.a, dx);
                break;
            }
            case Op::reduce_sum: {
                Tensor dx = Tensor::full(val(n.a).shape, g.at(0));
                accum(n.a, dx);
                break;
            }
            case Op::rotate_pairs: {
                accum(n.a, t_rotate_pairs(g, val(n.b), -n.f, n.i2));
                break;
            }
        }
    }
}

std::vector<std::string> Tape::op_set() {
    return {"matmul",       "add",          "mul",         "softmax",     "log_softmax",
            "sigmoid",      "relu",         "layer_norm",  "group_norm",  "embed_lookup",
            "masked_fill",  "concat",       "slice",       "reduce_sum",  "scale",
            "rotate_pairs"};
}

}  // namespace nqs
