// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "kernel_util.hpp"

namespace tessera::kernels {

using detail::fp64_view;
using detail::require_rank2;

namespace {

/// In-place lower Cholesky factor; returns the index of the failing pivot or -1.
std::int64_t cholesky(std::vector<double>& L, std::int64_t n) {
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::int64_t j = 0; j < n; ++j) {
        const double ajj = L[static_cast<std::size_t>(j * n + j)];
        double d = ajj;
        for (std::int64_t k = 0; k < j; ++k) d -= L[static_cast<std::size_t>(j * n + k)] * L[static_cast<std::size_t>(j * n + k)];
        if (!(d > static_cast<double>(n) * eps * std::fabs(ajj))) return j;
        const double ljj = std::sqrt(d);
        L[static_cast<std::size_t>(j * n + j)] = ljj;
        for (std::int64_t i = j + 1; i < n; ++i) {
            double s = L[static_cast<std::size_t>(i * n + j)];
            for (std::int64_t k = 0; k < j; ++k)
                s -= L[static_cast<std::size_t>(i * n + k)] * L[static_cast<std::size_t>(j * n + k)];
            L[static_cast<std::size_t>(i * n + j)] = s / ljj;
        }
    }
    return -1;
}

std::vector<double> substitute(const std::vector<double>& L, std::int64_t n, std::vector<double> b, std::int64_t k) {
    for (std::int64_t c = 0; c < k; ++c) {
        for (std::int64_t i = 0; i < n; ++i) {
            double s = b[static_cast<std::size_t>(i * k + c)];
            for (std::int64_t t = 0; t < i; ++t) s -= L[static_cast<std::size_t>(i * n + t)] * b[static_cast<std::size_t>(t * k + c)];
            b[static_cast<std::size_t>(i * k + c)] = s / L[static_cast<std::size_t>(i * n + i)];
        }
        for (std::int64_t i = n - 1; i >= 0; --i) {
            double s = b[static_cast<std::size_t>(i * k + c)];
            for (std::int64_t t = i + 1; t < n; ++t) s -= L[static_cast<std::size_t>(t * n + i)] * b[static_cast<std::size_t>(t * k + c)];
            b[static_cast<std::size_t>(i * k + c)] = s / L[static_cast<std::size_t>(i * n + i)];
        }
    }
    return b;
}

} // namespace

BasicTensorBlock solve(const BasicTensorBlock& in_a, const BasicTensorBlock& in_b) {
    std::optional<BasicTensorBlock> ha, hb;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "solve");
    const BasicTensorBlock& b = fp64_view(in_b, hb, "solve");
    require_rank2(a, "solve");
    require_rank2(b, "solve");
    const std::int64_t n = a.rows();
    if (a.cols() != n) throw ShapeError("solve needs a square matrix, got " + shape_string(a.dims()));
    if (b.rows() != n) throw ShapeError("solve right-hand side " + shape_string(b.dims()) + " does not conform");
    const std::int64_t k = b.cols();

    const std::vector<double> A = a.to_dense_f64();
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < i; ++j)
            if (std::fabs(A[static_cast<std::size_t>(i * n + j)] - A[static_cast<std::size_t>(j * n + i)]) >
                1e-10 * (std::fabs(A[static_cast<std::size_t>(i * n + j)]) + std::fabs(A[static_cast<std::size_t>(j * n + i)])))
                throw ShapeError("solve needs a symmetric matrix");

    std::vector<double> L = A;
    const std::int64_t pivot = cholesky(L, n);
    if (pivot >= 0) {
        double trace = 0.0;
        for (std::int64_t i = 0; i < n; ++i) trace += A[static_cast<std::size_t>(i * n + i)];
        const double shift = 1e-10 * trace / static_cast<double>(n);
        L = A;
        for (std::int64_t i = 0; i < n; ++i) L[static_cast<std::size_t>(i * n + i)] += shift;
        const auto singular = [&] {
            return SingularError("matrix is not positive definite: Cholesky breakdown at pivot " +
                                     std::to_string(pivot + 1),
                                 pivot);
        };
        if (!(shift > 0.0) || cholesky(L, n) >= 0) throw singular();
        std::vector<double> rhs = b.to_dense_f64();
        std::vector<double> x = substitute(L, n, rhs, k);
        // the shifted factor is only accepted when it still solves the original system
        double rnorm = 0.0, bnorm = 0.0;
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t c = 0; c < k; ++c) {
                double s = -rhs[static_cast<std::size_t>(i * k + c)];
                for (std::int64_t t = 0; t < n; ++t)
                    s += A[static_cast<std::size_t>(i * n + t)] * x[static_cast<std::size_t>(t * k + c)];
                rnorm += s * s;
                bnorm += rhs[static_cast<std::size_t>(i * k + c)] * rhs[static_cast<std::size_t>(i * k + c)];
            }
        if (!(std::sqrt(rnorm) <= 1e-8 * (1.0 + std::sqrt(bnorm)))) throw singular();
        return BasicTensorBlock::fp64({n, k}, std::move(x));
    }
    return BasicTensorBlock::fp64({n, k}, substitute(L, n, b.to_dense_f64(), k));
}

} // namespace tessera::kernels
