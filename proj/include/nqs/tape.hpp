#pragma once

#include <string>
#include <vector>

#include "nqs/tensor.hpp"

namespace nqs {

enum class Op {
    leaf,
    constant,
    matmul,
    add,
    mul,
    scale,
    softmax,
    log_softmax,
    sigmoid,
    relu,
    layer_norm,
    group_norm,
    embed_lookup,
    masked_fill,
    concat,
    slice,
    reduce_sum,
    rotate_pairs,
};

struct Node {
    Op op = Op::leaf;
    Tensor val;
    Tensor grad;                 // allocated on demand during backward
    int a = -1, b = -1, c = -1;  // input node ids
    bool ta = false, tb = false; // matmul transpose flags
    double f = 0.0;              // scale factor, fill value, or rotation sign
    long i0 = 0, i1 = 0, i2 = 0; // axis/start/len, group count, position offset
    std::vector<long> ids;       // embed_lookup row indices
    bool needs_grad = false;
    bool grad_live = false;
};

// Reverse-mode tape over real tensors. One tape per forward pass; backward()
// walks the recorded program once. Complex quantities are carried as explicit
// real pairs by the callers.
class Tape {
public:
    int leaf(Tensor v);       // differentiable input (parameters)
    int constant(Tensor v);   // non-differentiable input (masks, one-hots, angles)

    int matmul(int a, int b, bool ta = false, bool tb = false);
    int add(int a, int b);
    int mul(int a, int b);
    int scale(int a, double f);
    int softmax(int a);
    int log_softmax(int a);
    int sigmoid(int a);
    int relu(int a);
    int layer_norm(int x, int gain, int bias);
    int group_norm(int x, int gain, int bias, long groups);
    int embed_lookup(int table, std::vector<long> ids);
    int masked_fill(int x, int mask, double fill);
    int concat(int a, int b, long axis);
    int slice(int a, long axis, long start, long len);
    int reduce_sum(int a);
    int rotate_pairs(int x, int theta, double sign, long pos_offset);

    const Tensor& val(int id) const { return nodes[static_cast<size_t>(id)].val; }
    // Gradient of the last backward() target w.r.t. node `id`; zeros if the
    // node was not reached.
    Tensor grad_of(int id) const;
    void backward(int id);

    size_t size() const { return nodes.size(); }

    // The operation vocabulary this engine guarantees, for introspection.
    static std::vector<std::string> op_set();

    static constexpr double norm_eps = 1e-5;

    std::vector<Node> nodes;

private:
    int push(Node n);
    Tensor& grad_buf(int id);
    void accum(int id, const Tensor& g);
};

}  // namespace nqs
