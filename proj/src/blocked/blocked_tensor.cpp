// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/blocked/blocked_tensor.hpp"

#include <algorithm>

#include "tessera/core/error.hpp"
#include "tessera/core/kernels.hpp"
#include "tessera/core/parallel.hpp"

namespace tessera::blocked {

namespace {

std::vector<BlockIndex> all_indices(const Shape& grid) {
    std::vector<BlockIndex> out;
    if (std::any_of(grid.begin(), grid.end(), [](auto g) { return g == 0; })) return out;
    BlockIndex idx(grid.size(), 0);
    while (true) {
        out.push_back(idx);
        std::size_t d = grid.size();
        while (d-- > 0) {
            if (++idx[d] < grid[d]) break;
            idx[d] = 0;
            if (d == 0) return out;
        }
    }
}

Shape grid_of(const Shape& dims, std::int64_t side) {
    Shape g;
    for (auto d : dims) g.push_back((d + side - 1) / side);
    return g;
}

// Same cells under new dims (row-major linearization is unchanged).
BasicTensorBlock reshape(const BasicTensorBlock& x, const Shape& target) {
    if (!x.is_sparse()) return BasicTensorBlock::from_cells(target, x.dense_cells(), Layout::Dense);
    std::vector<std::int64_t> lin;
    if (x.rank() == 2) {
        auto rp = x.row_ptr();
        auto ci = x.col_idx();
        lin.reserve(ci.size());
        for (std::int64_t i = 0; i < x.rows(); ++i)
            for (auto p = rp[static_cast<std::size_t>(i)]; p < rp[static_cast<std::size_t>(i + 1)]; ++p)
                lin.push_back(i * x.cols() + ci[static_cast<std::size_t>(p)]);
    } else {
        lin.assign(x.coo_index().begin(), x.coo_index().end());
    }
    return BasicTensorBlock::from_coo(target, std::move(lin), x.sparse_values());
}

} // namespace

std::int64_t blocking_side(std::size_t rank) {
    static constexpr std::int64_t kSides[] = {1024, 128, 32, 16, 8, 8};
    if (rank < 2 || rank > 7) throw ShapeError("no blocking scheme for rank " + std::to_string(rank));
    return kSides[rank - 2];
}

BlockedTensor::BlockedTensor(Shape dims, ValueType vtype, std::map<BlockIndex, BasicTensorBlock> blocks)
    : dims_(std::move(dims)), vtype_(vtype), side_(blocking_side(dims_.size())), blocks_(std::move(blocks)) {
    for (const auto& [idx, blk] : blocks_) {
        if (idx.size() != dims_.size()) throw ShapeError("block index rank mismatch");
        for (std::size_t d = 0; d < idx.size(); ++d)
            if (idx[d] < 0 || idx[d] >= grid(d)) throw ShapeError("block index outside the grid");
        if (blk.dims() != block_extent(idx))
            throw ShapeError("block " + shape_string(idx) + " has extent " + shape_string(blk.dims()) + ", expected " +
                             shape_string(block_extent(idx)));
        if (blk.vtype() != vtype_) throw TypeError("block value type differs from the tensor");
    }
}

std::int64_t BlockedTensor::grid(std::size_t d) const { return (dims_[d] + side_ - 1) / side_; }

Shape BlockedTensor::block_extent(const BlockIndex& index) const {
    Shape e;
    for (std::size_t d = 0; d < index.size(); ++d) e.push_back(std::min(side_, dims_[d] - index[d] * side_));
    return e;
}

const BasicTensorBlock* BlockedTensor::find(const BlockIndex& index) const {
    auto it = blocks_.find(index);
    return it == blocks_.end() ? nullptr : &it->second;
}

BlockedTensor to_blocked(const BasicTensorBlock& x) {
    const std::int64_t side = blocking_side(x.rank());
    const auto indices = all_indices(grid_of(x.dims(), side));
    std::vector<std::optional<BasicTensorBlock>> tiles(indices.size());
    parallel_tasks(static_cast<std::int64_t>(indices.size()), [&](std::int64_t t) {
        const auto& idx = indices[static_cast<std::size_t>(t)];
        std::vector<kernels::Range> ranges;
        for (std::size_t d = 0; d < idx.size(); ++d)
            ranges.push_back({idx[d] * side, std::min(x.dims()[d], (idx[d] + 1) * side)});
        BasicTensorBlock tile = kernels::slice(x, ranges);
        if (tile.nnz() > 0) tiles[static_cast<std::size_t>(t)] = std::move(tile);
    });
    std::map<BlockIndex, BasicTensorBlock> blocks;
    for (std::size_t t = 0; t < indices.size(); ++t)
        if (tiles[t]) blocks.emplace(indices[t], std::move(*tiles[t]));
    return BlockedTensor(x.dims(), x.vtype(), std::move(blocks));
}

BasicTensorBlock from_blocked(const BlockedTensor& b) {
    const Shape& dims = b.dims();
    const std::size_t rank = dims.size();
    Cells out(b.vtype(), static_cast<std::size_t>(shape_numel(dims)));
    std::vector<std::int64_t> stride(rank, 1);
    for (std::size_t d = rank - 1; d > 0; --d) stride[d - 1] = stride[d] * dims[d];

    for (const auto& [idx, blk] : b.blocks()) {
        const Cells cells = blk.to_dense_cells();
        const Shape& ext = blk.dims();
        std::vector<std::int64_t> pos(rank, 0);
        const std::int64_t inner = ext[rank - 1];
        std::size_t src = 0;
        while (true) {
            std::int64_t base = 0;
            for (std::size_t d = 0; d < rank; ++d) base += (idx[d] * b.side() + pos[d]) * stride[d];
            std::visit(
                [&](auto& dst) {
                    using V = std::decay_t<decltype(dst)>;
                    const auto& s = std::get<V>(cells.storage());
                    std::copy_n(s.begin() + static_cast<std::ptrdiff_t>(src), inner,
                                dst.begin() + static_cast<std::ptrdiff_t>(base));
                },
                out.storage());
            src += static_cast<std::size_t>(inner);
            std::size_t d = rank - 1;
            bool done = true;
            while (d-- > 0) {
                if (++pos[d] < ext[d]) {
                    done = false;
                    break;
                }
                pos[d] = 0;
            }
            if (done) break;
        }
    }
    return BasicTensorBlock::from_cells(dims, std::move(out));
}

BlockedTensor reblock(const BlockedTensor& b, const Shape& target) {
    const std::size_t from = b.dims().size(), to = target.size();
    if (!((from == 2 && to == 3) || (from == 3 && to == 2)))
        throw ShapeError("reblock supports only rank 2 <-> rank 3");
    if (shape_numel(b.dims()) != shape_numel(target))
        throw ShapeError("reblock cell count mismatch: " + shape_string(b.dims()) + " vs " + shape_string(target));
    return to_blocked(reshape(from_blocked(b), target));
}

BlockedTensor blocked_matmul(const BlockedTensor& a, const BlockedTensor& b) {
    if (a.dims().size() != 2 || b.dims().size() != 2) throw ShapeError("blocked_matmul needs rank-2 operands");
    if (a.dims()[1] != b.dims()[0])
        throw ShapeError("blocked_matmul inner dimensions differ: " + shape_string(a.dims()) + " %*% " +
                         shape_string(b.dims()));
    const Shape out_dims{a.dims()[0], b.dims()[1]};
    const std::int64_t gi = a.grid(0), gk = a.grid(1), gj = b.grid(1);
    const std::int64_t side = blocking_side(2);
    std::vector<std::optional<BasicTensorBlock>> results(static_cast<std::size_t>(gi * gj));

    parallel_tasks(gi * gj, [&](std::int64_t t) {
        const std::int64_t i = t / gj, j = t % gj;
        const std::int64_t rows = std::min(side, out_dims[0] - i * side);
        const std::int64_t cols = std::min(side, out_dims[1] - j * side);
        std::vector<double> acc;
        for (std::int64_t k = 0; k < gk; ++k) {
            const BasicTensorBlock* ab = a.find({i, k});
            const BasicTensorBlock* bb = b.find({k, j});
            if (!ab || !bb) continue;
            BasicTensorBlock part = kernels::matmul(*ab, *bb);
            std::vector<double> v = part.to_dense_f64();
            if (acc.empty())
                acc = std::move(v);
            else
                for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += v[c];
        }
        if (acc.empty()) return;
        BasicTensorBlock blk = BasicTensorBlock::fp64({rows, cols}, std::move(acc));
        if (blk.nnz() > 0) results[static_cast<std::size_t>(t)] = std::move(blk);
    });

    std::map<BlockIndex, BasicTensorBlock> blocks;
    for (std::int64_t t = 0; t < gi * gj; ++t)
        if (results[static_cast<std::size_t>(t)])
            blocks.emplace(BlockIndex{t / gj, t % gj}, std::move(*results[static_cast<std::size_t>(t)]));
    return BlockedTensor(out_dims, ValueType::FP64, std::move(blocks));
}

} // namespace tessera::blocked
