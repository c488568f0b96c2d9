// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fixed-size blocking of n-d tensors. Block side lengths shrink with rank so
// that blocks of every rank stay small enough to process in memory.

#pragma once

#include <map>
#include <vector>

#include "tessera/core/tensor_block.hpp"

namespace tessera::blocked {

/// Block side length for tensors of the given rank (2..7).
std::int64_t blocking_side(std::size_t rank);

using BlockIndex = std::vector<std::int64_t>;

class BlockedTensor {
public:
    BlockedTensor() = default;
    /// Validates that every block sits inside the grid with its exact extent.
    BlockedTensor(Shape dims, ValueType vtype, std::map<BlockIndex, BasicTensorBlock> blocks);

    const Shape& dims() const noexcept { return dims_; }
    ValueType vtype() const noexcept { return vtype_; }
    std::int64_t side() const noexcept { return side_; }
    const std::map<BlockIndex, BasicTensorBlock>& blocks() const noexcept { return blocks_; }

    /// Number of blocks along dimension d.
    std::int64_t grid(std::size_t d) const;
    /// Extent of the block at `index` (trailing blocks may be smaller).
    Shape block_extent(const BlockIndex& index) const;
    const BasicTensorBlock* find(const BlockIndex& index) const;

private:
    Shape dims_;
    ValueType vtype_ = ValueType::FP64;
    std::int64_t side_ = 0;
    std::map<BlockIndex, BasicTensorBlock> blocks_;
};

BlockedTensor to_blocked(const BasicTensorBlock& x);
BasicTensorBlock from_blocked(const BlockedTensor& b);

/// Row-major reinterpretation between rank 2 and rank 3 with equal cell count.
BlockedTensor reblock(const BlockedTensor& b, const Shape& target);

/// One task per output block; inner products use the tensor-core matmul.
BlockedTensor blocked_matmul(const BlockedTensor& a, const BlockedTensor& b);

} // namespace tessera::blocked
