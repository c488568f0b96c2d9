// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Homogeneous n-d tensor blocks with dense and sparse layouts.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tessera/core/value_type.hpp"

namespace tessera {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& dims) noexcept;
std::string shape_string(const Shape& dims);

/// Typed contiguous cell array. The variant index equals the ValueType code.
class Cells {
public:
    using Storage = std::variant<std::vector<float>, std::vector<double>, std::vector<std::int32_t>,
                                 std::vector<std::int64_t>, std::vector<std::uint8_t>,
                                 std::vector<std::string>>;

    Cells() : data_(std::vector<double>{}) {}
    Cells(ValueType vt, std::size_t n);
    Cells(std::vector<double> v) : data_(std::move(v)) {}
    Cells(std::vector<float> v) : data_(std::move(v)) {}
    Cells(std::vector<std::int32_t> v) : data_(std::move(v)) {}
    Cells(std::vector<std::int64_t> v) : data_(std::move(v)) {}
    Cells(std::vector<std::uint8_t> v) : data_(std::move(v)) {}
    Cells(std::vector<std::string> v) : data_(std::move(v)) {}

    ValueType vtype() const noexcept { return static_cast<ValueType>(data_.index()); }
    std::size_t size() const noexcept;

    double f64(std::size_t i) const;
    bool is_zero(std::size_t i) const;
    const std::string& str(std::size_t i) const;
    Scalar scalar(std::size_t i) const;

    template <class T> const std::vector<T>& get() const { return std::get<std::vector<T>>(data_); }
    template <class T> std::vector<T>& get() { return std::get<std::vector<T>>(data_); }

    /// Append cell `i` of `src` (same vtype).
    void push_from(const Cells& src, std::size_t i);
    void reserve(std::size_t n);
    bool cell_equals(std::size_t i, const Cells& other, std::size_t j) const;
    std::vector<double> to_f64() const;

    const Storage& storage() const noexcept { return data_; }
    Storage& storage() noexcept { return data_; }

private:
    Storage data_;
};

enum class Layout : std::uint8_t { Dense = 0, Sparse = 1 };

/// Density at or below which rank-2 numeric blocks are stored sparse.
inline constexpr double kSparseDensityThreshold = 0.4;

/// Layout the automatic rule picks for a block with these properties.
Layout choose_layout(const Shape& dims, ValueType vt, std::int64_t nnz) noexcept;

/// Immutable n-d array of one value type.
///
/// Dense blocks hold a row-major buffer of numel cells. Sparse rank-2 blocks
/// use compressed rows (row_ptr/col_idx/values, columns sorted per row);
/// sparse blocks of higher rank hold a sorted, duplicate-free list of
/// linearized coordinates. Only non-zero cells are stored in either sparse
/// form, and `nnz()` is always exact.
class BasicTensorBlock {
public:
    struct Entry {
        std::vector<std::int64_t> coord;
        double value;
    };

    BasicTensorBlock();

    /// Dense cells in row-major order; layout chosen by the sparsity rule.
    static BasicTensorBlock from_cells(Shape dims, Cells cells);
    static BasicTensorBlock from_cells(Shape dims, Cells cells, Layout layout);
    /// Checked construction from numeric values; throws if a value is not
    /// representable in `vt`.
    static BasicTensorBlock from_values(Shape dims, ValueType vt, std::span<const double> values);
    /// Coordinate/value pairs; unlisted cells are zero.
    static BasicTensorBlock from_entries(Shape dims, ValueType vt, std::vector<Entry> entries);
    static BasicTensorBlock fp64(Shape dims, std::vector<double> values);
    static BasicTensorBlock matrix(std::int64_t rows, std::int64_t cols, std::vector<double> values);
    static BasicTensorBlock zeros(Shape dims, ValueType vt = ValueType::FP64);
    static BasicTensorBlock filled(Shape dims, double value);
    /// Rank-2 compressed rows with sorted, non-zero entries; re-laid out by the sparsity rule.
    static BasicTensorBlock from_csr(std::int64_t rows, std::int64_t cols,
                                     std::vector<std::int64_t> row_ptr,
                                     std::vector<std::int64_t> col_idx, Cells values);
    /// Sorted linearized coordinates with non-zero values (any rank, kept sparse).
    static BasicTensorBlock from_coo(Shape dims, std::vector<std::int64_t> index, Cells values);

    const Shape& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    std::int64_t numel() const noexcept { return numel_; }
    std::int64_t rows() const noexcept { return dims_[0]; }
    std::int64_t cols() const noexcept { return dims_.size() > 1 ? dims_[1] : 1; }
    ValueType vtype() const noexcept { return vtype_; }
    Layout layout() const noexcept { return layout_; }
    bool is_sparse() const noexcept { return layout_ == Layout::Sparse; }
    std::int64_t nnz() const noexcept { return nnz_; }
    double density() const noexcept;

    double get(std::span<const std::int64_t> idx) const;
    double at(std::int64_t i, std::int64_t j) const;
    Scalar scalar_at(std::int64_t linear) const;
    double f64_at(std::int64_t linear) const;

    const Cells& dense_cells() const;
    std::span<const double> dense_f64() const;

    std::span<const std::int64_t> row_ptr() const;
    std::span<const std::int64_t> col_idx() const;
    /// Linearized coordinates of a sparse block of rank != 2.
    std::span<const std::int64_t> coo_index() const;
    const Cells& sparse_values() const;
    std::span<const double> sparse_f64() const;

    BasicTensorBlock with_layout(Layout target) const;
    BasicTensorBlock with_auto_layout() const;
    BasicTensorBlock to_fp64() const;
    Cells to_dense_cells() const;
    std::vector<double> to_dense_f64() const;

    /// In-memory footprint estimate: cells x width (dense), nnz x (coords + value) (sparse).
    std::size_t size_bytes() const noexcept;
    std::int64_t recount_nonzeros() const;

    /// Same dims, vtype and cell values, regardless of layout.
    bool content_equals(const BasicTensorBlock& other) const;
    friend bool operator==(const BasicTensorBlock& a, const BasicTensorBlock& b) {
        return a.content_equals(b);
    }

private:
    Shape dims_;
    std::int64_t numel_ = 0;
    ValueType vtype_ = ValueType::FP64;
    Layout layout_ = Layout::Dense;
    std::int64_t nnz_ = 0;
    Cells values_;                      // dense cells or sparse non-zero values
    std::vector<std::int64_t> row_ptr_; // sparse rank 2
    std::vector<std::int64_t> index_;   // col_idx (rank 2) or linear index (rank != 2)
};

using TensorPtr = std::shared_ptr<const BasicTensorBlock>;

inline TensorPtr share(BasicTensorBlock block) {
    return std::make_shared<const BasicTensorBlock>(std::move(block));
}

} // namespace tessera
