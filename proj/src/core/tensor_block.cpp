// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/core/tensor_block.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tessera/core/error.hpp"

namespace tessera {

namespace {

template <class... Fs> struct overloaded : Fs... { using Fs::operator()...; };
template <class... Fs> overloaded(Fs...) -> overloaded<Fs...>;

void validate_dims(const Shape& dims) {
    if (dims.empty()) throw ShapeError("tensor rank must be at least 1");
    for (auto d : dims)
        if (d < 0) throw ShapeError("negative extent in dims " + shape_string(dims));
}

std::int64_t linear_index(const Shape& dims, std::span<const std::int64_t> idx) {
    if (idx.size() != dims.size())
        throw ShapeError("index rank " + std::to_string(idx.size()) + " does not match tensor rank " +
                         std::to_string(dims.size()));
    std::int64_t lin = 0;
    for (std::size_t d = 0; d < dims.size(); ++d) {
        if (idx[d] < 0 || idx[d] >= dims[d])
            throw ShapeError("index " + std::to_string(idx[d]) + " out of range for dimension " +
                             std::to_string(d) + " of " + shape_string(dims));
        lin = lin * dims[d] + idx[d];
    }
    return lin;
}

} // namespace

std::int64_t shape_numel(const Shape& dims) noexcept {
    std::int64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::string shape_string(const Shape& dims) {
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(dims[i]);
    }
    return s + "]";
}

// ---------------------------------------------------------------- Cells

Cells::Cells(ValueType vt, std::size_t n) {
    switch (vt) {
    case ValueType::FP32: data_ = std::vector<float>(n, 0.0f); break;
    case ValueType::FP64: data_ = std::vector<double>(n, 0.0); break;
    case ValueType::INT32: data_ = std::vector<std::int32_t>(n, 0); break;
    case ValueType::INT64: data_ = std::vector<std::int64_t>(n, 0); break;
    case ValueType::BOOLEAN: data_ = std::vector<std::uint8_t>(n, 0); break;
    case ValueType::STRING: data_ = std::vector<std::string>(n); break;
    }
}

std::size_t Cells::size() const noexcept {
    return std::visit([](const auto& v) { return v.size(); }, data_);
}

double Cells::f64(std::size_t i) const {
    return std::visit(overloaded{
                          [&](const std::vector<std::string>&) -> double {
                              throw TypeError("STRING cell used in a numeric context");
                          },
                          [&](const auto& v) -> double { return static_cast<double>(v[i]); },
                      },
                      data_);
}

bool Cells::is_zero(std::size_t i) const {
    return std::visit(overloaded{
                          [&](const std::vector<std::string>& v) { return v[i].empty(); },
                          [&](const auto& v) { return v[i] == 0; },
                      },
                      data_);
}

const std::string& Cells::str(std::size_t i) const { return get<std::string>()[i]; }

Scalar Cells::scalar(std::size_t i) const {
    switch (vtype()) {
    case ValueType::FP64: return Scalar::fp64(get<double>()[i]);
    case ValueType::FP32: return Scalar::of(ValueType::FP32, get<float>()[i]);
    case ValueType::INT64: return Scalar::int64(get<std::int64_t>()[i]);
    case ValueType::INT32: return Scalar::of(ValueType::INT32, get<std::int32_t>()[i]);
    case ValueType::BOOLEAN: return Scalar::boolean(get<std::uint8_t>()[i] != 0);
    case ValueType::STRING: return Scalar::string(get<std::string>()[i]);
    }
    return {};
}

void Cells::push_from(const Cells& src, std::size_t i) {
    std::visit(
        [&](auto& dst) {
            using V = std::decay_t<decltype(dst)>;
            dst.push_back(std::get<V>(src.data_)[i]);
        },
        data_);
}

void Cells::reserve(std::size_t n) {
    std::visit([&](auto& v) { v.reserve(n); }, data_);
}

bool Cells::cell_equals(std::size_t i, const Cells& other, std::size_t j) const {
    if (data_.index() != other.data_.index()) return false;
    return std::visit(
        [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            const auto& w = std::get<V>(other.data_);
            if constexpr (std::is_floating_point_v<typename V::value_type>) {
                if (std::isnan(v[i]) && std::isnan(w[j])) return true;
            }
            return v[i] == w[j];
        },
        data_);
}

std::vector<double> Cells::to_f64() const {
    return std::visit(overloaded{
                          [](const std::vector<std::string>&) -> std::vector<double> {
                              throw TypeError("STRING cells cannot be converted to FP64");
                          },
                          [](const std::vector<double>& v) { return v; },
                          [](const auto& v) { return std::vector<double>(v.begin(), v.end()); },
                      },
                      data_);
}

// ---------------------------------------------------------------- layout rule

Layout choose_layout(const Shape& dims, ValueType vt, std::int64_t nnz) noexcept {
    std::int64_t n = shape_numel(dims);
    if (dims.size() != 2 || !is_numeric(vt) || n == 0) return Layout::Dense;
    return static_cast<double>(nnz) <= kSparseDensityThreshold * static_cast<double>(n) ? Layout::Sparse
                                                                                          : Layout::Dense;
}

// ---------------------------------------------------------------- BasicTensorBlock

BasicTensorBlock::BasicTensorBlock() : dims_{0, 0} {}

BasicTensorBlock BasicTensorBlock::from_cells(Shape dims, Cells cells) {
    validate_dims(dims);
    std::int64_t nnz = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) nnz += cells.is_zero(i) ? 0 : 1;
    Layout layout = choose_layout(dims, cells.vtype(), nnz);
    return from_cells(std::move(dims), std::move(cells), layout);
}

BasicTensorBlock BasicTensorBlock::from_cells(Shape dims, Cells cells, Layout layout) {
    validate_dims(dims);
    BasicTensorBlock b;
    b.dims_ = std::move(dims);
    b.numel_ = shape_numel(b.dims_);
    b.vtype_ = cells.vtype();
    if (static_cast<std::int64_t>(cells.size()) != b.numel_)
        throw ShapeError("cell count " + std::to_string(cells.size()) + " does not match dims " +
                         shape_string(b.dims_));
    if (layout == Layout::Sparse && b.vtype_ == ValueType::STRING)
        throw TypeError("STRING blocks cannot be sparse");

    if (layout == Layout::Dense) {
        b.layout_ = Layout::Dense;
        b.nnz_ = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) b.nnz_ += cells.is_zero(i) ? 0 : 1;
        b.values_ = std::move(cells);
        return b;
    }

    b.layout_ = Layout::Sparse;
    Cells vals(b.vtype_, 0);
    if (b.rank() == 2) {
        const std::int64_t rows = b.dims_[0], cols = b.dims_[1];
        b.row_ptr_.assign(static_cast<std::size_t>(rows + 1), 0);
        for (std::int64_t i = 0; i < rows; ++i) {
            for (std::int64_t j = 0; j < cols; ++j) {
                auto k = static_cast<std::size_t>(i * cols + j);
                if (!cells.is_zero(k)) {
                    b.index_.push_back(j);
                    vals.push_from(cells, k);
                }
            }
            b.row_ptr_[static_cast<std::size_t>(i + 1)] = static_cast<std::int64_t>(b.index_.size());
        }
    } else {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (!cells.is_zero(k)) {
                b.index_.push_back(static_cast<std::int64_t>(k));
                vals.push_from(cells, k);
            }
        }
    }
    b.nnz_ = static_cast<std::int64_t>(b.index_.size());
    b.values_ = std::move(vals);
    return b;
}

BasicTensorBlock BasicTensorBlock::from_values(Shape dims, ValueType vt, std::span<const double> values) {
    validate_dims(dims);
    if (static_cast<std::int64_t>(values.size()) != shape_numel(dims))
        throw ShapeError("value count " + std::to_string(values.size()) + " does not match dims " +
                         shape_string(dims));
    if (vt == ValueType::STRING) throw TypeError("numeric values cannot populate a STRING block");
    Cells cells(vt, values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        Scalar s = Scalar::of(vt, values[i]);
        std::visit(
            [&](auto& v) {
                using T = typename std::decay_t<decltype(v)>::value_type;
                if constexpr (!std::is_same_v<T, std::string>) v[i] = static_cast<T>(s.as_double());
            },
            cells.storage());
    }
    return from_cells(std::move(dims), std::move(cells));
}

BasicTensorBlock BasicTensorBlock::from_entries(Shape dims, ValueType vt, std::vector<Entry> entries) {
    validate_dims(dims);
    if (vt == ValueType::STRING) throw TypeError("coordinate construction requires a numeric type");
    std::vector<std::pair<std::int64_t, double>> lin;
    lin.reserve(entries.size());
    for (const auto& e : entries) {
        std::int64_t k = linear_index(dims, e.coord);
        Scalar::of(vt, e.value);
        if (e.value != 0.0) lin.emplace_back(k, e.value);
    }
    std::sort(lin.begin(), lin.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < lin.size(); ++i)
        if (lin[i].first == lin[i - 1].first)
            throw ShapeError("duplicate coordinate at linear index " + std::to_string(lin[i].first));
    std::vector<std::int64_t> index;
    std::vector<double> vals;
    for (auto& [k, v] : lin) {
        index.push_back(k);
        vals.push_back(v);
    }
    BasicTensorBlock sparse = from_coo(dims, std::move(index), Cells(std::move(vals)));
    if (vt != ValueType::FP64) {
        // re-type through dense cells; entries were already range-checked
        std::vector<double> dense = sparse.to_dense_f64();
        return from_values(std::move(dims), vt, dense);
    }
    return sparse.with_auto_layout();
}

BasicTensorBlock BasicTensorBlock::fp64(Shape dims, std::vector<double> values) {
    return from_cells(std::move(dims), Cells(std::move(values)));
}

BasicTensorBlock BasicTensorBlock::matrix(std::int64_t rows, std::int64_t cols, std::vector<double> values) {
    return fp64({rows, cols}, std::move(values));
}

BasicTensorBlock BasicTensorBlock::zeros(Shape dims, ValueType vt) {
    validate_dims(dims);
    std::int64_t n = shape_numel(dims);
    Layout layout = choose_layout(dims, vt, 0);
    if (layout == Layout::Sparse) {
        BasicTensorBlock b;
        b.dims_ = std::move(dims);
        b.numel_ = n;
        b.vtype_ = vt;
        b.layout_ = Layout::Sparse;
        b.row_ptr_.assign(static_cast<std::size_t>(b.dims_[0] + 1), 0);
        b.values_ = Cells(vt, 0);
        return b;
    }
    return from_cells(std::move(dims), Cells(vt, static_cast<std::size_t>(n)), Layout::Dense);
}

BasicTensorBlock BasicTensorBlock::filled(Shape dims, double value) {
    if (value == 0.0) return zeros(std::move(dims));
    validate_dims(dims);
    std::int64_t n = shape_numel(dims);
    return from_cells(std::move(dims), Cells(std::vector<double>(static_cast<std::size_t>(n), value)),
                      Layout::Dense);
}

BasicTensorBlock BasicTensorBlock::from_csr(std::int64_t rows, std::int64_t cols,
                                            std::vector<std::int64_t> row_ptr,
                                            std::vector<std::int64_t> col_idx, Cells values) {
    if (static_cast<std::int64_t>(row_ptr.size()) != rows + 1 || col_idx.size() != values.size() ||
        (rows >= 0 && row_ptr.back() != static_cast<std::int64_t>(col_idx.size())))
        throw ShapeError("inconsistent compressed-row arrays");
    BasicTensorBlock b;
    b.dims_ = {rows, cols};
    b.numel_ = rows * cols;
    b.vtype_ = values.vtype();
    b.layout_ = Layout::Sparse;
    b.nnz_ = static_cast<std::int64_t>(col_idx.size());
    b.row_ptr_ = std::move(row_ptr);
    b.index_ = std::move(col_idx);
    b.values_ = std::move(values);
    if (choose_layout(b.dims_, b.vtype_, b.nnz_) == Layout::Dense) return b.with_layout(Layout::Dense);
    return b;
}

BasicTensorBlock BasicTensorBlock::from_coo(Shape dims, std::vector<std::int64_t> index, Cells values) {
    validate_dims(dims);
    if (index.size() != values.size()) throw ShapeError("coordinate and value counts differ");
    if (values.vtype() == ValueType::STRING) throw TypeError("STRING blocks cannot be sparse");
    BasicTensorBlock b;
    b.dims_ = std::move(dims);
    b.numel_ = shape_numel(b.dims_);
    b.vtype_ = values.vtype();
    b.layout_ = Layout::Sparse;
    b.nnz_ = static_cast<std::int64_t>(index.size());
    if (b.rank() == 2) {
        const std::int64_t cols = b.dims_[1];
        b.row_ptr_.assign(static_cast<std::size_t>(b.dims_[0] + 1), 0);
        b.index_.reserve(index.size());
        for (auto k : index) {
            b.row_ptr_[static_cast<std::size_t>(k / cols + 1)]++;
            b.index_.push_back(k % cols);
        }
        for (std::size_t i = 1; i < b.row_ptr_.size(); ++i) b.row_ptr_[i] += b.row_ptr_[i - 1];
    } else {
        b.index_ = std::move(index);
    }
    b.values_ = std::move(values);
    return b;
}

double BasicTensorBlock::density() const noexcept {
    return numel_ == 0 ? 0.0 : static_cast<double>(nnz_) / static_cast<double>(numel_);
}

double BasicTensorBlock::f64_at(std::int64_t k) const {
    if (layout_ == Layout::Dense) return values_.f64(static_cast<std::size_t>(k));
    if (rank() == 2) {
        std::int64_t cols = dims_[1];
        std::int64_t i = k / cols, j = k % cols;
        auto begin = index_.begin() + row_ptr_[static_cast<std::size_t>(i)];
        auto end = index_.begin() + row_ptr_[static_cast<std::size_t>(i + 1)];
        auto it = std::lower_bound(begin, end, j);
        if (it != end && *it == j) return values_.f64(static_cast<std::size_t>(it - index_.begin()));
        return 0.0;
    }
    auto it = std::lower_bound(index_.begin(), index_.end(), k);
    if (it != index_.end() && *it == k) return values_.f64(static_cast<std::size_t>(it - index_.begin()));
    return 0.0;
}

double BasicTensorBlock::get(std::span<const std::int64_t> idx) const {
    return f64_at(linear_index(dims_, idx));
}

double BasicTensorBlock::at(std::int64_t i, std::int64_t j) const {
    std::int64_t idx[2] = {i, j};
    return get(idx);
}

Scalar BasicTensorBlock::scalar_at(std::int64_t k) const {
    if (k < 0 || k >= numel_) throw ShapeError("linear index out of range");
    if (layout_ == Layout::Dense) return values_.scalar(static_cast<std::size_t>(k));
    return Scalar::of(vtype_, f64_at(k));
}

const Cells& BasicTensorBlock::dense_cells() const {
    if (layout_ != Layout::Dense) throw TypeError("block is not dense");
    return values_;
}

std::span<const double> BasicTensorBlock::dense_f64() const {
    if (layout_ != Layout::Dense || vtype_ != ValueType::FP64) throw TypeError("block is not dense FP64");
    return values_.get<double>();
}

std::span<const std::int64_t> BasicTensorBlock::row_ptr() const {
    if (layout_ != Layout::Sparse || rank() != 2) throw TypeError("block is not sparse rank-2");
    return row_ptr_;
}

std::span<const std::int64_t> BasicTensorBlock::col_idx() const {
    if (layout_ != Layout::Sparse || rank() != 2) throw TypeError("block is not sparse rank-2");
    return index_;
}

std::span<const std::int64_t> BasicTensorBlock::coo_index() const {
    if (layout_ != Layout::Sparse || rank() == 2) throw TypeError("block is not a coordinate list");
    return index_;
}

const Cells& BasicTensorBlock::sparse_values() const {
    if (layout_ != Layout::Sparse) throw TypeError("block is not sparse");
    return values_;
}

std::span<const double> BasicTensorBlock::sparse_f64() const {
    if (layout_ != Layout::Sparse || vtype_ != ValueType::FP64) throw TypeError("block is not sparse FP64");
    return values_.get<double>();
}

Cells BasicTensorBlock::to_dense_cells() const {
    if (layout_ == Layout::Dense) return values_;
    Cells out(vtype_, static_cast<std::size_t>(numel_));
    std::visit(
        [&](auto& dst) {
            using V = std::decay_t<decltype(dst)>;
            const auto& src = std::get<V>(values_.storage());
            if (rank() == 2) {
                const std::int64_t cols = dims_[1];
                for (std::int64_t i = 0; i < dims_[0]; ++i)
                    for (auto p = row_ptr_[static_cast<std::size_t>(i)];
                         p < row_ptr_[static_cast<std::size_t>(i + 1)]; ++p)
                        dst[static_cast<std::size_t>(i * cols + index_[static_cast<std::size_t>(p)])] =
                            src[static_cast<std::size_t>(p)];
            } else {
                for (std::size_t p = 0; p < index_.size(); ++p)
                    dst[static_cast<std::size_t>(index_[p])] = src[p];
            }
        },
        out.storage());
    return out;
}

std::vector<double> BasicTensorBlock::to_dense_f64() const { return to_dense_cells().to_f64(); }

BasicTensorBlock BasicTensorBlock::with_layout(Layout target) const {
    if (target == layout_) return *this;
    if (target == Layout::Sparse && vtype_ == ValueType::STRING)
        throw TypeError("STRING blocks cannot be sparse");
    return from_cells(dims_, to_dense_cells(), target);
}

BasicTensorBlock BasicTensorBlock::with_auto_layout() const {
    return with_layout(choose_layout(dims_, vtype_, nnz_));
}

BasicTensorBlock BasicTensorBlock::to_fp64() const {
    if (vtype_ == ValueType::FP64) return *this;
    if (vtype_ == ValueType::STRING) throw TypeError("STRING block used in a numeric kernel");
    BasicTensorBlock b = *this;
    b.vtype_ = ValueType::FP64;
    b.values_ = Cells(values_.to_f64());
    return b;
}

std::size_t BasicTensorBlock::size_bytes() const noexcept {
    if (layout_ == Layout::Sparse) {
        return static_cast<std::size_t>(nnz_) * (8 + cell_width(vtype_)) + row_ptr_.size() * 8;
    }
    std::size_t bytes = static_cast<std::size_t>(numel_) * cell_width(vtype_);
    if (vtype_ == ValueType::STRING)
        for (const auto& s : values_.get<std::string>()) bytes += s.capacity() > 15 ? s.capacity() : 0;
    return bytes;
}

std::int64_t BasicTensorBlock::recount_nonzeros() const {
    Cells c = to_dense_cells();
    std::int64_t n = 0;
    for (std::size_t i = 0; i < c.size(); ++i) n += c.is_zero(i) ? 0 : 1;
    return n;
}

bool BasicTensorBlock::content_equals(const BasicTensorBlock& other) const {
    if (dims_ != other.dims_ || vtype_ != other.vtype_) return false;
    if (layout_ == Layout::Sparse && other.layout_ == Layout::Sparse && rank() == other.rank()) {
        if (nnz_ != other.nnz_ || index_ != other.index_ || row_ptr_ != other.row_ptr_) return false;
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!values_.cell_equals(i, other.values_, i)) return false;
        return true;
    }
    Cells a = to_dense_cells();
    Cells b = other.to_dense_cells();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a.cell_equals(i, b, i)) return false;
    return true;
}

} // namespace tessera
