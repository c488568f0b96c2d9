// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "tessera/core/error.hpp"
#include "tessera/core/kernels.hpp"

namespace tessera::kernels::detail {

/// Returns `a` itself when already FP64, else a promoted copy held in `holder`.
inline const BasicTensorBlock& fp64_view(const BasicTensorBlock& a, std::optional<BasicTensorBlock>& holder,
                                         const char* op) {
    require_numeric(a, op);
    if (a.vtype() == ValueType::FP64) return a;
    holder.emplace(a.to_fp64());
    return *holder;
}

inline void require_rank2(const BasicTensorBlock& a, const char* op) {
    if (a.rank() != 2)
        throw ShapeError(std::string(op) + " requires a rank-2 operand, got " + shape_string(a.dims()));
}

inline void add_madds(std::int64_t n) { counters().multiply_adds.fetch_add(n, std::memory_order_relaxed); }

} // namespace tessera::kernels::detail
