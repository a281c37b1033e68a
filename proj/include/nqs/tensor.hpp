#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nqs {

// Dense row-major real tensor. Rank stays small (<= 3); everything is
// double precision so gradient checks against finite differences are tight.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<long> shape_in);

    static Tensor zeros(std::vector<long> shape);
    static Tensor full(std::vector<long> shape, double value);
    static Tensor from(std::vector<long> shape, std::vector<double> data);
    static Tensor scalar(double value);

    long rank() const { return static_cast<long>(shape.size()); }
    long dim(long i) const { return shape[static_cast<size_t>(i)]; }
    long size() const { return static_cast<long>(v.size()); }
    long rows() const;  // product of all dims but the last
    long cols() const;  // last dim (1 for scalars)

    double& at(long i) { return v[static_cast<size_t>(i)]; }
    double at(long i) const { return v[static_cast<size_t>(i)]; }
    double& at2(long r, long c) { return v[static_cast<size_t>(r * cols_cache + c)]; }
    double at2(long r, long c) const { return v[static_cast<size_t>(r * cols_cache + c)]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
    std::string shape_str() const;

    std::vector<long> shape;
    std::vector<double> v;
    long cols_cache = 1;  // kept in sync with shape by the constructors
};

// Raw value-level math, shared by the autodiff tape and the no-gradient
// recurrent paths. All functions allocate fresh outputs.
Tensor t_matmul(const Tensor& a, const Tensor& b, bool ta = false, bool tb = false);
Tensor t_add(const Tensor& a, const Tensor& b);       // equal shape or row-broadcast b
Tensor t_mul(const Tensor& a, const Tensor& b);       // equal shape or row-broadcast b
Tensor t_scale(const Tensor& a, double f);
Tensor t_relu(const Tensor& a);
Tensor t_sigmoid(const Tensor& a);
Tensor t_softmax(const Tensor& a);                    // rows over last dim
Tensor t_log_softmax(const Tensor& a);
Tensor t_layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);
Tensor t_group_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, long groups, double eps);
Tensor t_masked_fill(const Tensor& x, const Tensor& mask, double fill);
Tensor t_concat(const Tensor& a, const Tensor& b, long axis);
Tensor t_slice(const Tensor& a, long axis, long start, long len);
Tensor t_reduce_sum(const Tensor& a);                 // -> scalar [1]
// Rotates value pairs (2k, 2k+1) of row p by angle sign*(p+pos_offset)*theta[k].
Tensor t_rotate_pairs(const Tensor& x, const Tensor& theta, double sign, long pos_offset);

}  // namespace nqs
