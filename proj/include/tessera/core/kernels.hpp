// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Kernel library over basic tensor blocks. Numeric kernels promote their
// inputs to FP64 and always produce FP64 results.

#pragma once

#include <atomic>
#include <cstdint>
#include <utility>
#include <vector>

#include "tessera/core/data_tensor.hpp"
#include "tessera/core/tensor_block.hpp"

namespace tessera::kernels {

/// Instrumentation shared by all kernels in the process.
struct Counters {
    std::atomic<std::int64_t> multiply_adds{0};
};
Counters& counters() noexcept;

enum class BinaryOp {
    Add, Sub, Mul, Div, Pow, Mod, IntDiv,
    Lt, Le, Gt, Ge, Eq, Ne, And, Or, Min, Max,
};
enum class UnaryOp { Neg, Not, Sqrt, Abs, Exp, Log, Floor, Ceil, Round };
enum class AggKind { Sum, Mean, Min, Max, RowSums, ColSums };
enum class Axis { Rows, Cols };

double apply(BinaryOp op, double a, double b) noexcept;
double apply(UnaryOp op, double a) noexcept;

/// Half-open index interval.
struct Range {
    std::int64_t begin;
    std::int64_t end;
    std::int64_t width() const noexcept { return end - begin; }
};

BasicTensorBlock matmul(const BasicTensorBlock& a, const BasicTensorBlock& b);
/// X^T X with the upper triangle computed and mirrored.
BasicTensorBlock tsmm(const BasicTensorBlock& x);
BasicTensorBlock transpose(const BasicTensorBlock& a);

BasicTensorBlock elementwise(BinaryOp op, const BasicTensorBlock& a, const BasicTensorBlock& b);
BasicTensorBlock elementwise(BinaryOp op, const BasicTensorBlock& a, double b);
BasicTensorBlock elementwise(BinaryOp op, double a, const BasicTensorBlock& b);
BasicTensorBlock unary(UnaryOp op, const BasicTensorBlock& a);

/// Full aggregate (sum, mean, min, max).
double aggregate(AggKind kind, const BasicTensorBlock& a);
/// Row/column aggregate (rowSums -> m x 1, colSums -> 1 x n).
BasicTensorBlock aggregate_vector(AggKind kind, const BasicTensorBlock& a);

BasicTensorBlock bind(Axis axis, const std::vector<const BasicTensorBlock*>& parts);
BasicTensorBlock slice(const BasicTensorBlock& a, const std::vector<Range>& ranges);
/// Copy of `a` with the rank-2 region (rows, cols) replaced by `values`.
BasicTensorBlock assign_region(const BasicTensorBlock& a, Range rows, Range cols,
                               const BasicTensorBlock& values);

/// Solves A x = b for symmetric positive definite A by Cholesky.
BasicTensorBlock solve(const BasicTensorBlock& a, const BasicTensorBlock& b);

/// Vector -> diagonal matrix; square matrix -> column of its diagonal.
BasicTensorBlock diag(const BasicTensorBlock& a);

/// FP64 rank-2 block of the given column range of a frame.
BasicTensorBlock as_matrix(const DataTensorBlock& frame, Range cols);

/// Verifies that both blocks are numeric; throws TypeError otherwise.
void require_numeric(const BasicTensorBlock& a, const char* op);

} // namespace tessera::kernels
