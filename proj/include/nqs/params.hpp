#pragma once

#include <string>
#include <vector>

#include "nqs/tape.hpp"
#include "nqs/tensor.hpp"

namespace nqs {

struct NamedTensor {
    std::string name;
    Tensor value;
};

// Ordered, named collection of trainable tensors. Names carry a "mod." or
// "ph." prefix so the modulus/phase split needed by the FLOP estimators can
// be recovered by prefix count.
class ParameterStore {
public:
    int add(std::string name, Tensor value);
    int index_of(const std::string& name) const;  // -1 if absent

    size_t count() const { return items_.size(); }
    NamedTensor& item(size_t i) { return items_[i]; }
    const NamedTensor& item(size_t i) const { return items_[i]; }
    Tensor& value(const std::string& name);

    long total_scalars() const;
    long scalars_with_prefix(const std::string& prefix) const;

    // Flat views aligned with (item order, row-major within item).
    std::vector<double> flatten() const;
    void assign_flat(const std::vector<double>& flat);
    void axpy_flat(double alpha, const std::vector<double>& direction);

    void save(const std::string& path) const;
    static ParameterStore load(const std::string& path);

private:
    std::vector<NamedTensor> items_;
};

// Ties a ParameterStore to leaf nodes on one tape so per-parameter gradients
// can be pulled out in flat layout after backward().
struct ParamBinding {
    std::vector<int> node_ids;  // one per store item, in order
    static ParamBinding bind(Tape& tape, const ParameterStore& store);
    std::vector<double> gather_grad(const Tape& tape, const ParameterStore& store) const;
};

}  // namespace nqs
