// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "kernel_util.hpp"
#include "tessera/core/parallel.hpp"

namespace tessera::kernels {

using detail::fp64_view;
using detail::require_rank2;

namespace {

constexpr std::int64_t kSumChunk = 1 << 15;
constexpr std::int64_t kGrain = 1 << 14;

bool preserves_zero(UnaryOp op) {
    switch (op) {
    case UnaryOp::Neg:
    case UnaryOp::Sqrt:
    case UnaryOp::Abs:
    case UnaryOp::Floor:
    case UnaryOp::Ceil:
    case UnaryOp::Round: return true;
    default: return false;
    }
}

// Ordered sum of fixed-size chunks; independent of the thread count.
double chunked_sum(std::span<const double> v) {
    const auto n = static_cast<std::int64_t>(v.size());
    const std::int64_t chunks = (n + kSumChunk - 1) / kSumChunk;
    std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
    parallel_tasks(chunks, [&](std::int64_t c) {
        double s = 0.0;
        const std::int64_t end = std::min(n, (c + 1) * kSumChunk);
        for (std::int64_t i = c * kSumChunk; i < end; ++i) s += v[static_cast<std::size_t>(i)];
        partial[static_cast<std::size_t>(c)] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

BasicTensorBlock map_sparse_values(const BasicTensorBlock& a, const std::function<double(double)>& f) {
    std::span<const double> vals = a.sparse_f64();
    std::vector<double> out(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) out[i] = f(vals[i]);
    // mapped values may become zero; rebuild through dense cells in that case
    bool any_zero = std::any_of(out.begin(), out.end(), [](double x) { return x == 0.0; });
    if (a.rank() == 2 && !any_zero) {
        return BasicTensorBlock::from_csr(a.rows(), a.cols(), {a.row_ptr().begin(), a.row_ptr().end()},
                                          {a.col_idx().begin(), a.col_idx().end()}, Cells(std::move(out)));
    }
    std::vector<double> dense = a.to_dense_f64();
    for (auto& x : dense) x = x == 0.0 ? f(0.0) : x;
    if (a.rank() == 2) {
        auto r = a.row_ptr();
        auto c = a.col_idx();
        for (std::int64_t i = 0; i < a.rows(); ++i)
            for (auto p = r[static_cast<std::size_t>(i)]; p < r[static_cast<std::size_t>(i + 1)]; ++p)
                dense[static_cast<std::size_t>(i * a.cols() + c[static_cast<std::size_t>(p)])] =
                    out[static_cast<std::size_t>(p)];
    } else {
        auto idx = a.coo_index();
        for (std::size_t p = 0; p < idx.size(); ++p) dense[static_cast<std::size_t>(idx[p])] = out[p];
    }
    return BasicTensorBlock::fp64(a.dims(), std::move(dense));
}

enum class Broadcast { None, RowVector, ColVector };

} // namespace

Counters& counters() noexcept {
    static Counters c;
    return c;
}

void require_numeric(const BasicTensorBlock& a, const char* op) {
    if (!is_numeric(a.vtype())) throw TypeError(std::string(op) + " does not accept STRING operands");
}

double apply(BinaryOp op, double a, double b) noexcept {
    switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return a / b;
    case BinaryOp::Pow: return std::pow(a, b);
    case BinaryOp::Mod: return a - std::floor(a / b) * b;
    case BinaryOp::IntDiv: return std::floor(a / b);
    case BinaryOp::Lt: return a < b ? 1.0 : 0.0;
    case BinaryOp::Le: return a <= b ? 1.0 : 0.0;
    case BinaryOp::Gt: return a > b ? 1.0 : 0.0;
    case BinaryOp::Ge: return a >= b ? 1.0 : 0.0;
    case BinaryOp::Eq: return a == b ? 1.0 : 0.0;
    case BinaryOp::Ne: return a != b ? 1.0 : 0.0;
    case BinaryOp::And: return (a != 0.0 && b != 0.0) ? 1.0 : 0.0;
    case BinaryOp::Or: return (a != 0.0 || b != 0.0) ? 1.0 : 0.0;
    case BinaryOp::Min: return std::isnan(a) || std::isnan(b) ? std::numeric_limits<double>::quiet_NaN()
                                                               : std::min(a, b);
    case BinaryOp::Max: return std::isnan(a) || std::isnan(b) ? std::numeric_limits<double>::quiet_NaN()
                                                               : std::max(a, b);
    }
    return 0.0;
}

double apply(UnaryOp op, double a) noexcept {
    switch (op) {
    case UnaryOp::Neg: return -a;
    case UnaryOp::Not: return a == 0.0 ? 1.0 : 0.0;
    case UnaryOp::Sqrt: return std::sqrt(a);
    case UnaryOp::Abs: return std::fabs(a);
    case UnaryOp::Exp: return std::exp(a);
    case UnaryOp::Log: return std::log(a);
    case UnaryOp::Floor: return std::floor(a);
    case UnaryOp::Ceil: return std::ceil(a);
    case UnaryOp::Round: return std::round(a);
    }
    return 0.0;
}

BasicTensorBlock transpose(const BasicTensorBlock& in) {
    std::optional<BasicTensorBlock> holder;
    const BasicTensorBlock& a = fp64_view(in, holder, "transpose");
    require_rank2(a, "transpose");
    const std::int64_t m = a.rows(), n = a.cols();
    if (a.is_sparse()) {
        auto rp = a.row_ptr();
        auto ci = a.col_idx();
        auto v = a.sparse_f64();
        std::vector<std::int64_t> out_ptr(static_cast<std::size_t>(n + 1), 0);
        for (auto c : ci) out_ptr[static_cast<std::size_t>(c + 1)]++;
        for (std::size_t j = 1; j < out_ptr.size(); ++j) out_ptr[j] += out_ptr[j - 1];
        std::vector<std::int64_t> fill(out_ptr.begin(), out_ptr.end() - 1);
        std::vector<std::int64_t> out_idx(ci.size());
        std::vector<double> out_val(ci.size());
        for (std::int64_t i = 0; i < m; ++i)
            for (auto p = rp[static_cast<std::size_t>(i)]; p < rp[static_cast<std::size_t>(i + 1)]; ++p) {
                auto dst = static_cast<std::size_t>(fill[static_cast<std::size_t>(ci[static_cast<std::size_t>(p)])]++);
                out_idx[dst] = i;
                out_val[dst] = v[static_cast<std::size_t>(p)];
            }
        BasicTensorBlock t =
            BasicTensorBlock::from_csr(n, m, std::move(out_ptr), std::move(out_idx), Cells(std::move(out_val)));
        return t.is_sparse() ? t : t.with_layout(Layout::Sparse);
    }
    auto src = a.dense_f64();
    std::vector<double> out(src.size());
    constexpr std::int64_t kTile = 64;
    parallel_for(n, std::max<std::int64_t>(1, kGrain / std::max<std::int64_t>(m, 1)),
                 [&](std::int64_t j0, std::int64_t j1) {
                     for (std::int64_t ib = 0; ib < m; ib += kTile)
                         for (std::int64_t j = j0; j < j1; ++j)
                             for (std::int64_t i = ib; i < std::min(m, ib + kTile); ++i)
                                 out[static_cast<std::size_t>(j * m + i)] = src[static_cast<std::size_t>(i * n + j)];
                 });
    return BasicTensorBlock::from_cells({n, m}, Cells(std::move(out)), Layout::Dense);
}

BasicTensorBlock elementwise(BinaryOp op, const BasicTensorBlock& in_a, const BasicTensorBlock& in_b) {
    std::optional<BasicTensorBlock> ha, hb;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "elementwise");
    const BasicTensorBlock& b = fp64_view(in_b, hb, "elementwise");

    if (a.dims() != b.dims()) {
        // vector broadcast against a rank-2 operand, on either side
        const bool a_is_matrix = a.rank() == 2 && b.rank() == 2 &&
                                 ((b.rows() == 1 && b.cols() == a.cols()) || (b.cols() == 1 && b.rows() == a.rows()));
        const bool b_is_matrix = !a_is_matrix && a.rank() == 2 && b.rank() == 2 &&
                                 ((a.rows() == 1 && a.cols() == b.cols()) || (a.cols() == 1 && a.rows() == b.rows()));
        if (!a_is_matrix && !b_is_matrix)
            throw ShapeError("incompatible shapes " + shape_string(a.dims()) + " and " + shape_string(b.dims()));
        const BasicTensorBlock& mat = a_is_matrix ? a : b;
        const BasicTensorBlock& vec = a_is_matrix ? b : a;
        const Broadcast mode = vec.rows() == 1 && vec.cols() == mat.cols() ? Broadcast::RowVector : Broadcast::ColVector;
        std::vector<double> m = mat.to_dense_f64();
        std::vector<double> v = vec.to_dense_f64();
        const std::int64_t rows = mat.rows(), cols = mat.cols();
        std::vector<double> out(m.size());
        parallel_for(rows, std::max<std::int64_t>(1, kGrain / std::max<std::int64_t>(cols, 1)),
                     [&](std::int64_t r0, std::int64_t r1) {
                         for (std::int64_t i = r0; i < r1; ++i)
                             for (std::int64_t j = 0; j < cols; ++j) {
                                 auto k = static_cast<std::size_t>(i * cols + j);
                                 double vv = v[static_cast<std::size_t>(mode == Broadcast::RowVector ? j : i)];
                                 out[k] = a_is_matrix ? apply(op, m[k], vv) : apply(op, vv, m[k]);
                             }
                     });
        return BasicTensorBlock::fp64(mat.dims(), std::move(out));
    }

    std::vector<double> x = a.to_dense_f64();
    std::vector<double> y = b.to_dense_f64();
    parallel_for(static_cast<std::int64_t>(x.size()), kGrain, [&](std::int64_t i0, std::int64_t i1) {
        for (std::int64_t i = i0; i < i1; ++i)
            x[static_cast<std::size_t>(i)] = apply(op, x[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i)]);
    });
    return BasicTensorBlock::fp64(a.dims(), std::move(x));
}

BasicTensorBlock elementwise(BinaryOp op, const BasicTensorBlock& in_a, double s) {
    std::optional<BasicTensorBlock> ha;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "elementwise");
    const bool zero_safe = std::isfinite(s) && (op == BinaryOp::Mul || (op == BinaryOp::Div && s != 0.0));
    if (a.is_sparse() && zero_safe) return map_sparse_values(a, [&](double v) { return apply(op, v, s); });
    std::vector<double> x = a.to_dense_f64();
    parallel_for(static_cast<std::int64_t>(x.size()), kGrain, [&](std::int64_t i0, std::int64_t i1) {
        for (std::int64_t i = i0; i < i1; ++i) x[static_cast<std::size_t>(i)] = apply(op, x[static_cast<std::size_t>(i)], s);
    });
    return BasicTensorBlock::fp64(a.dims(), std::move(x));
}

BasicTensorBlock elementwise(BinaryOp op, double s, const BasicTensorBlock& in_b) {
    std::optional<BasicTensorBlock> hb;
    const BasicTensorBlock& b = fp64_view(in_b, hb, "elementwise");
    if (b.is_sparse() && std::isfinite(s) && op == BinaryOp::Mul)
        return map_sparse_values(b, [&](double v) { return s * v; });
    std::vector<double> x = b.to_dense_f64();
    parallel_for(static_cast<std::int64_t>(x.size()), kGrain, [&](std::int64_t i0, std::int64_t i1) {
        for (std::int64_t i = i0; i < i1; ++i) x[static_cast<std::size_t>(i)] = apply(op, s, x[static_cast<std::size_t>(i)]);
    });
    return BasicTensorBlock::fp64(b.dims(), std::move(x));
}

BasicTensorBlock unary(UnaryOp op, const BasicTensorBlock& in_a) {
    std::optional<BasicTensorBlock> ha;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "unary");
    if (a.is_sparse() && preserves_zero(op)) return map_sparse_values(a, [&](double v) { return apply(op, v); });
    std::vector<double> x = a.to_dense_f64();
    for (auto& v : x) v = apply(op, v);
    return BasicTensorBlock::fp64(a.dims(), std::move(x));
}

double aggregate(AggKind kind, const BasicTensorBlock& in_a) {
    std::optional<BasicTensorBlock> ha;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "aggregate");
    std::span<const double> vals = a.is_sparse() ? a.sparse_f64() : a.dense_f64();
    switch (kind) {
    case AggKind::Sum: return chunked_sum(vals);
    case AggKind::Mean:
        return a.numel() == 0 ? std::numeric_limits<double>::quiet_NaN()
                              : chunked_sum(vals) / static_cast<double>(a.numel());
    case AggKind::Min:
    case AggKind::Max: {
        if (a.numel() == 0) throw ShapeError("min/max of an empty tensor");
        const bool is_min = kind == AggKind::Min;
        double r = is_min ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        for (double v : vals) r = apply(is_min ? BinaryOp::Min : BinaryOp::Max, r, v);
        if (a.is_sparse() && a.nnz() < a.numel()) r = apply(is_min ? BinaryOp::Min : BinaryOp::Max, r, 0.0);
        return r;
    }
    default: throw ShapeError("row/column aggregates return vectors");
    }
}

BasicTensorBlock aggregate_vector(AggKind kind, const BasicTensorBlock& in_a) {
    std::optional<BasicTensorBlock> ha;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "aggregate");
    require_rank2(a, kind == AggKind::RowSums ? "rowSums" : "colSums");
    const std::int64_t m = a.rows(), n = a.cols();
    if (kind == AggKind::RowSums) {
        std::vector<double> out(static_cast<std::size_t>(m), 0.0);
        if (a.is_sparse()) {
            auto rp = a.row_ptr();
            auto v = a.sparse_f64();
            for (std::int64_t i = 0; i < m; ++i)
                for (auto p = rp[static_cast<std::size_t>(i)]; p < rp[static_cast<std::size_t>(i + 1)]; ++p)
                    out[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(p)];
        } else {
            auto v = a.dense_f64();
            parallel_for(m, std::max<std::int64_t>(1, kGrain / std::max<std::int64_t>(n, 1)),
                         [&](std::int64_t r0, std::int64_t r1) {
                             for (std::int64_t i = r0; i < r1; ++i) {
                                 double s = 0.0;
                                 for (std::int64_t j = 0; j < n; ++j) s += v[static_cast<std::size_t>(i * n + j)];
                                 out[static_cast<std::size_t>(i)] = s;
                             }
                         });
        }
        return BasicTensorBlock::fp64({m, 1}, std::move(out));
    }
    if (kind != AggKind::ColSums) throw ShapeError("full aggregates return scalars");
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    if (a.is_sparse()) {
        auto ci = a.col_idx();
        auto v = a.sparse_f64();
        for (std::size_t p = 0; p < ci.size(); ++p) out[static_cast<std::size_t>(ci[p])] += v[p];
    } else {
        auto v = a.dense_f64();
        parallel_for(n, 64, [&](std::int64_t c0, std::int64_t c1) {
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = c0; j < c1; ++j) out[static_cast<std::size_t>(j)] += v[static_cast<std::size_t>(i * n + j)];
        });
    }
    return BasicTensorBlock::fp64({1, n}, std::move(out));
}

BasicTensorBlock bind(Axis axis, const std::vector<const BasicTensorBlock*>& parts) {
    if (parts.empty()) throw ShapeError("bind needs at least one part");
    ValueType vt = parts.front()->vtype();
    bool mixed = false;
    for (const auto* p : parts) {
        require_rank2(*p, axis == Axis::Rows ? "rbind" : "cbind");
        if (p->vtype() != vt) mixed = true;
    }
    if (mixed) {
        for (const auto* p : parts) require_numeric(*p, "bind");
        vt = ValueType::FP64;
    }
    const std::int64_t fixed = axis == Axis::Rows ? parts.front()->cols() : parts.front()->rows();
    std::int64_t total = 0;
    for (const auto* p : parts) {
        const std::int64_t other = axis == Axis::Rows ? p->cols() : p->rows();
        if (other != fixed)
            throw ShapeError(std::string(axis == Axis::Rows ? "rbind" : "cbind") + " extent mismatch: " +
                             std::to_string(other) + " vs " + std::to_string(fixed));
        total += axis == Axis::Rows ? p->rows() : p->cols();
    }

    const bool all_sparse = std::all_of(parts.begin(), parts.end(), [&](const auto* p) {
        return p->is_sparse() && p->vtype() == ValueType::FP64;
    });
    if (axis == Axis::Rows && all_sparse && vt == ValueType::FP64) {
        std::vector<std::int64_t> rp{0};
        std::vector<std::int64_t> ci;
        std::vector<double> vals;
        for (const auto* p : parts) {
            auto prp = p->row_ptr();
            for (std::int64_t i = 0; i < p->rows(); ++i)
                rp.push_back(rp.back() + prp[static_cast<std::size_t>(i + 1)] - prp[static_cast<std::size_t>(i)]);
            ci.insert(ci.end(), p->col_idx().begin(), p->col_idx().end());
            vals.insert(vals.end(), p->sparse_f64().begin(), p->sparse_f64().end());
        }
        return BasicTensorBlock::from_csr(total, fixed, std::move(rp), std::move(ci), Cells(std::move(vals)));
    }

    const std::int64_t rows = axis == Axis::Rows ? total : fixed;
    const std::int64_t cols = axis == Axis::Rows ? fixed : total;
    Cells out(vt, 0);
    out.reserve(static_cast<std::size_t>(rows * cols));
    std::vector<Cells> dense;
    dense.reserve(parts.size());
    for (const auto* p : parts) {
        Cells c = p->to_dense_cells();
        if (c.vtype() != vt) c = Cells(c.to_f64());
        dense.push_back(std::move(c));
    }
    if (axis == Axis::Rows) {
        for (const auto& c : dense)
            for (std::size_t k = 0; k < c.size(); ++k) out.push_from(c, k);
    } else {
        for (std::int64_t i = 0; i < rows; ++i)
            for (std::size_t pi = 0; pi < parts.size(); ++pi) {
                const std::int64_t w = parts[pi]->cols();
                for (std::int64_t j = 0; j < w; ++j) out.push_from(dense[pi], static_cast<std::size_t>(i * w + j));
            }
    }
    return BasicTensorBlock::from_cells({rows, cols}, std::move(out));
}

BasicTensorBlock slice(const BasicTensorBlock& a, const std::vector<Range>& ranges) {
    if (ranges.size() != a.rank())
        throw ShapeError("slice needs one range per dimension (" + std::to_string(a.rank()) + ")");
    Shape out_dims;
    for (std::size_t d = 0; d < ranges.size(); ++d) {
        const auto& r = ranges[d];
        if (r.begin < 0 || r.end > a.dims()[d] || r.begin > r.end)
            throw ShapeError("slice range [" + std::to_string(r.begin) + "," + std::to_string(r.end) +
                             ") out of bounds for dimension " + std::to_string(d) + " of " + shape_string(a.dims()));
        if (r.begin == r.end) throw ShapeError("empty slice range in dimension " + std::to_string(d));
        out_dims.push_back(r.width());
    }

    if (a.is_sparse() && a.rank() == 2) {
        auto rp = a.row_ptr();
        auto ci = a.col_idx();
        const Cells& vals = a.sparse_values();
        std::vector<std::int64_t> out_rp{0};
        std::vector<std::int64_t> out_ci;
        Cells out_vals(a.vtype(), 0);
        for (std::int64_t i = ranges[0].begin; i < ranges[0].end; ++i) {
            auto b = ci.begin() + rp[static_cast<std::size_t>(i)];
            auto e = ci.begin() + rp[static_cast<std::size_t>(i + 1)];
            for (auto it = std::lower_bound(b, e, ranges[1].begin); it != e && *it < ranges[1].end; ++it) {
                out_ci.push_back(*it - ranges[1].begin);
                out_vals.push_from(vals, static_cast<std::size_t>(it - ci.begin()));
            }
            out_rp.push_back(static_cast<std::int64_t>(out_ci.size()));
        }
        return BasicTensorBlock::from_csr(out_dims[0], out_dims[1], std::move(out_rp), std::move(out_ci),
                                          std::move(out_vals));
    }

    // strides of the source
    const std::size_t rank = a.rank();
    std::vector<std::int64_t> stride(rank, 1);
    for (std::size_t d = rank - 1; d > 0; --d) stride[d - 1] = stride[d] * a.dims()[d];

    if (a.is_sparse()) {
        auto idx = a.coo_index();
        const Cells& vals = a.sparse_values();
        std::vector<std::int64_t> out_idx;
        Cells out_vals(a.vtype(), 0);
        for (std::size_t p = 0; p < idx.size(); ++p) {
            std::int64_t rem = idx[p], lin = 0;
            bool inside = true;
            for (std::size_t d = 0; d < rank; ++d) {
                std::int64_t c = rem / stride[d];
                rem %= stride[d];
                if (c < ranges[d].begin || c >= ranges[d].end) {
                    inside = false;
                    break;
                }
                lin = lin * out_dims[d] + (c - ranges[d].begin);
            }
            if (inside) {
                out_idx.push_back(lin);
                out_vals.push_from(vals, p);
            }
        }
        return BasicTensorBlock::from_coo(out_dims, std::move(out_idx), std::move(out_vals));
    }

    const Cells& src = a.dense_cells();
    Cells out(a.vtype(), 0);
    out.reserve(static_cast<std::size_t>(shape_numel(out_dims)));
    std::vector<std::int64_t> pos(rank);
    for (std::size_t d = 0; d < rank; ++d) pos[d] = ranges[d].begin;
    const std::int64_t inner = ranges[rank - 1].width();
    while (true) {
        std::int64_t base = 0;
        for (std::size_t d = 0; d < rank; ++d) base += pos[d] * stride[d];
        for (std::int64_t k = 0; k < inner; ++k) out.push_from(src, static_cast<std::size_t>(base + k));
        // advance the outer dimensions
        std::size_t d = rank - 1;
        bool done = true;
        while (d-- > 0) {
            if (++pos[d] < ranges[d].end) {
                done = false;
                break;
            }
            pos[d] = ranges[d].begin;
        }
        if (done) break;
    }
    return BasicTensorBlock::from_cells(out_dims, std::move(out));
}

BasicTensorBlock assign_region(const BasicTensorBlock& in_a, Range rows, Range cols, const BasicTensorBlock& values) {
    std::optional<BasicTensorBlock> ha, hv;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "left indexing");
    const BasicTensorBlock& v = fp64_view(values, hv, "left indexing");
    require_rank2(a, "left indexing");
    if (rows.begin < 0 || rows.end > a.rows() || cols.begin < 0 || cols.end > a.cols() || rows.width() <= 0 ||
        cols.width() <= 0)
        throw ShapeError("left-index region out of bounds for " + shape_string(a.dims()));
    if (v.rank() != 2 || v.rows() != rows.width() || v.cols() != cols.width())
        throw ShapeError("left-index value " + shape_string(v.dims()) + " does not fit region " +
                         std::to_string(rows.width()) + "x" + std::to_string(cols.width()));
    std::vector<double> out = a.to_dense_f64();
    std::vector<double> src = v.to_dense_f64();
    for (std::int64_t i = 0; i < rows.width(); ++i)
        for (std::int64_t j = 0; j < cols.width(); ++j)
            out[static_cast<std::size_t>((rows.begin + i) * a.cols() + cols.begin + j)] =
                src[static_cast<std::size_t>(i * cols.width() + j)];
    return BasicTensorBlock::fp64(a.dims(), std::move(out));
}

BasicTensorBlock diag(const BasicTensorBlock& in_a) {
    std::optional<BasicTensorBlock> ha;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "diag");
    require_rank2(a, "diag");
    if (a.cols() == 1 || a.rows() == 1) {
        const std::int64_t n = std::max(a.rows(), a.cols());
        if (n == 1) return a;
        std::vector<double> v = a.to_dense_f64();
        std::vector<BasicTensorBlock::Entry> entries;
        for (std::int64_t i = 0; i < n; ++i)
            if (v[static_cast<std::size_t>(i)] != 0.0) entries.push_back({{i, i}, v[static_cast<std::size_t>(i)]});
        return BasicTensorBlock::from_entries({n, n}, ValueType::FP64, std::move(entries));
    }
    if (a.rows() != a.cols()) throw ShapeError("diag of a non-square matrix " + shape_string(a.dims()));
    std::vector<double> out(static_cast<std::size_t>(a.rows()));
    for (std::int64_t i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = a.at(i, i);
    return BasicTensorBlock::fp64({a.rows(), 1}, std::move(out));
}

BasicTensorBlock as_matrix(const DataTensorBlock& frame, Range cols) {
    if (frame.dims().size() != 2) throw ShapeError("as_matrix needs a rank-2 frame");
    if (cols.begin < 0 || cols.end > frame.cols() || cols.width() <= 0)
        throw ShapeError("column range out of bounds");
    const std::int64_t m = frame.rows(), w = cols.width();
    std::vector<double> out(static_cast<std::size_t>(m * w));
    for (std::int64_t c = 0; c < w; ++c) {
        const std::int64_t col = cols.begin + c;
        if (frame.schema()[static_cast<std::size_t>(col)] == ValueType::STRING)
            throw TypeError("column " + std::to_string(col) + " is STRING and cannot be cast to FP64");
        std::vector<double> v = frame.column(col).to_f64();
        for (std::int64_t r = 0; r < m; ++r) out[static_cast<std::size_t>(r * w + c)] = v[static_cast<std::size_t>(r)];
    }
    return BasicTensorBlock::fp64({m, w}, std::move(out));
}

} // namespace tessera::kernels
