#include "nqs/params.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nqs {

namespace {
constexpr char kMagic[8] = {'N', 'Q', 'S', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}
}  // namespace

int ParameterStore::add(std::string name, Tensor value) {
    if (index_of(name) != -1) throw std::invalid_argument("duplicate parameter name: " + name);
    items_.push_back({std::move(name), std::move(value)});
    return static_cast<int>(items_.size()) - 1;
}

int ParameterStore::index_of(const std::string& name) const {
    for (size_t i = 0; i < items_.size(); ++i)
        if (items_[i].name == name) return static_cast<int>(i);
    return -1;
}

Tensor& ParameterStore::value(const std::string& name) {
    const int i = index_of(name);
    if (i < 0) throw std::invalid_argument("unknown parameter: " + name);
    return items_[static_cast<size_t>(i)].value;
}

long ParameterStore::total_scalars() const {
    long n = 0;
    for (const auto& it : items_) n += it.value.size();
    return n;
}

long ParameterStore::scalars_with_prefix(const std::string& prefix) const {
    long n = 0;
    for (const auto& it : items_)
        if (it.name.rfind(prefix, 0) == 0) n += it.value.size();
    return n;
}

std::vector<double> ParameterStore::flatten() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(total_scalars()));
    for (const auto& it : items_) out.insert(out.end(), it.value.v.begin(), it.value.v.end());
    return out;
}

void ParameterStore::assign_flat(const std::vector<double>& flat) {
    if (static_cast<long>(flat.size()) != total_scalars())
        throw std::invalid_argument("assign_flat: length mismatch");
    size_t off = 0;
    for (auto& it : items_) {
        std::copy(flat.begin() + static_cast<long>(off),
                  flat.begin() + static_cast<long>(off) + it.value.size(), it.value.v.begin());
        off += static_cast<size_t>(it.value.size());
    }
}

void ParameterStore::axpy_flat(double alpha, const std::vector<double>& direction) {
    if (static_cast<long>(direction.size()) != total_scalars())
        throw std::invalid_argument("axpy_flat: length mismatch");
    size_t off = 0;
    for (auto& it : items_) {
        for (long i = 0; i < it.value.size(); ++i) it.value.at(i) += alpha * direction[off + static_cast<size_t>(i)];
        off += static_cast<size_t>(it.value.size());
    }
}

void ParameterStore::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_pod<uint64_t>(os, items_.size());
    for (const auto& it : items_) {
        write_pod<uint32_t>(os, static_cast<uint32_t>(it.name.size()));
        os.write(it.name.data(), static_cast<std::streamsize>(it.name.size()));
        write_pod<uint32_t>(os, static_cast<uint32_t>(it.value.rank()));
        for (long d : it.value.shape) write_pod<int64_t>(os, d);
        os.write(reinterpret_cast<const char*>(it.value.v.data()),
                 static_cast<std::streamsize>(it.value.v.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

ParameterStore ParameterStore::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    ParameterStore store;
    const uint64_t count = read_pod<uint64_t>(is);
    for (uint64_t i = 0; i < count; ++i) {
        const uint32_t name_len = read_pod<uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const uint32_t rank = read_pod<uint32_t>(is);
        std::vector<long> shape(rank);
        for (uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<long>(read_pod<int64_t>(is));
        Tensor t(shape);
        is.read(reinterpret_cast<char*>(t.v.data()),
                static_cast<std::streamsize>(t.v.size() * sizeof(double)));
        if (!is) throw std::runtime_error("checkpoint: truncated tensor data in " + path);
        store.add(std::move(name), std::move(t));
    }
    return store;
}

ParamBinding ParamBinding::bind(Tape& tape, const ParameterStore& store) {
    ParamBinding b;
    b.node_ids.reserve(store.count());
    for (size_t i = 0; i < store.count(); ++i) b.node_ids.push_back(tape.leaf(store.item(i).value));
    return b;
}

std::vector<double> ParamBinding::gather_grad(const Tape& tape, const ParameterStore& store) const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(store.total_scalars()));
    for (size_t i = 0; i < store.count(); ++i) {
        Tensor g = tape.grad_of(node_ids[i]);
        out.insert(out.end(), g.v.begin(), g.v.end());
    }
    return out;
}

}  // namespace nqs
