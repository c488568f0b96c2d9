// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/core/data_tensor.hpp"

#include "tessera/core/error.hpp"

namespace tessera {

DataTensorBlock::DataTensorBlock(Shape dims, std::vector<ValueType> schema, std::vector<Group> groups)
    : dims_(std::move(dims)), schema_(std::move(schema)), groups_(std::move(groups)) {
    if (dims_.size() < 2) throw ShapeError("data tensors need rank >= 2");
    if (static_cast<std::int64_t>(schema_.size()) != dims_[1])
        throw ShapeError("schema length " + std::to_string(schema_.size()) + " does not match extent " +
                         std::to_string(dims_[1]) + " of dimension 2");
    std::int64_t next = 0;
    for (const auto& g : groups_) {
        if (g.first_col != next) throw ShapeError("column groups must tile the schema without gaps");
        const Shape& gd = g.block.dims();
        if (gd.size() != dims_.size()) throw ShapeError("column group rank mismatch");
        for (std::size_t d = 0; d < gd.size(); ++d)
            if (d != 1 && gd[d] != dims_[d]) throw ShapeError("column group extent mismatch");
        for (std::int64_t c = g.first_col; c < g.first_col + gd[1]; ++c)
            if (schema_[static_cast<std::size_t>(c)] != g.block.vtype())
                throw TypeError("column group type does not match schema at column " + std::to_string(c));
        next += gd[1];
    }
    if (next != dims_[1]) throw ShapeError("column groups do not cover all columns");
}

DataTensorBlock DataTensorBlock::from_columns(std::int64_t rows, std::vector<Cells> columns) {
    std::vector<ValueType> schema;
    for (const auto& c : columns) {
        if (static_cast<std::int64_t>(c.size()) != rows)
            throw ShapeError("column length " + std::to_string(c.size()) + " differs from row count " +
                             std::to_string(rows));
        schema.push_back(c.vtype());
    }
    std::vector<Group> groups;
    std::size_t c = 0;
    while (c < columns.size()) {
        std::size_t end = c + 1;
        while (end < columns.size() && schema[end] == schema[c]) ++end;
        const auto width = static_cast<std::int64_t>(end - c);
        Cells cells(schema[c], 0);
        cells.reserve(static_cast<std::size_t>(rows * width));
        for (std::int64_t r = 0; r < rows; ++r)
            for (std::size_t k = c; k < end; ++k) cells.push_from(columns[k], static_cast<std::size_t>(r));
        groups.push_back({static_cast<std::int64_t>(c),
                          BasicTensorBlock::from_cells({rows, width}, std::move(cells), Layout::Dense)});
        c = end;
    }
    const auto cols = static_cast<std::int64_t>(schema.size());
    return DataTensorBlock({rows, cols}, std::move(schema), std::move(groups));
}

const DataTensorBlock::Group& DataTensorBlock::group_of(std::int64_t col) const {
    if (col < 0 || col >= dims_[1]) throw ShapeError("column " + std::to_string(col) + " out of range");
    for (const auto& g : groups_)
        if (col < g.first_col + g.block.dims()[1]) return g;
    throw ShapeError("column " + std::to_string(col) + " not covered");
}

Scalar DataTensorBlock::get(std::int64_t row, std::int64_t col) const {
    if (dims_.size() != 2) throw ShapeError("cell access by (row, col) needs rank 2");
    if (row < 0 || row >= dims_[0]) throw ShapeError("row " + std::to_string(row) + " out of range");
    const auto& g = group_of(col);
    return g.block.scalar_at(row * g.block.dims()[1] + (col - g.first_col));
}

Cells DataTensorBlock::column(std::int64_t col) const {
    const auto& g = group_of(col);
    Cells src = g.block.to_dense_cells();
    Cells out(g.block.vtype(), 0);
    out.reserve(static_cast<std::size_t>(dims_[0]));
    const std::int64_t width = g.block.dims()[1];
    for (std::int64_t r = 0; r < dims_[0]; ++r)
        out.push_from(src, static_cast<std::size_t>(r * width + (col - g.first_col)));
    return out;
}

} // namespace tessera
