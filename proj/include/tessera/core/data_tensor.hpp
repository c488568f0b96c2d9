// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "tessera/core/tensor_block.hpp"

namespace tessera {

/// Heterogeneous tensor: a value type per index of the second dimension.
/// Stored as one basic block per maximal run of equally typed columns.
class DataTensorBlock {
public:
    struct Group {
        std::int64_t first_col;
        BasicTensorBlock block;
    };

    DataTensorBlock(Shape dims, std::vector<ValueType> schema, std::vector<Group> groups);

    /// Rank-2 frame from per-column cells (each holding `rows` values of its schema type).
    static DataTensorBlock from_columns(std::int64_t rows, std::vector<Cells> columns);

    const Shape& dims() const noexcept { return dims_; }
    std::int64_t rows() const noexcept { return dims_[0]; }
    std::int64_t cols() const noexcept { return dims_[1]; }
    const std::vector<ValueType>& schema() const noexcept { return schema_; }
    const std::vector<Group>& groups() const noexcept { return groups_; }

    Scalar get(std::int64_t row, std::int64_t col) const;
    /// Dense cells of one column (rank 2).
    Cells column(std::int64_t col) const;

private:
    const Group& group_of(std::int64_t col) const;

    Shape dims_;
    std::vector<ValueType> schema_;
    std::vector<Group> groups_;
};

using FramePtr = std::shared_ptr<const DataTensorBlock>;

} // namespace tessera
