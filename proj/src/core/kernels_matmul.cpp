// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>

#include "kernel_util.hpp"
#include "tessera/core/parallel.hpp"

namespace tessera::kernels {

using detail::add_madds;
using detail::fp64_view;
using detail::require_rank2;

namespace {

constexpr std::int64_t kBlockK = 256;
constexpr std::int64_t kBlockJ = 512;
constexpr std::int64_t kRowBlock = 64;

std::int64_t row_grain(std::int64_t work_per_row) {
    return std::max<std::int64_t>(1, (1 << 16) / std::max<std::int64_t>(work_per_row, 1));
}

BasicTensorBlock dense_dense(const BasicTensorBlock& a, const BasicTensorBlock& b) {
    const std::int64_t m = a.rows(), k = a.cols(), n = b.cols();
    auto A = a.dense_f64();
    auto B = b.dense_f64();
    std::vector<double> C(static_cast<std::size_t>(m * n), 0.0);
    if (n == 1) {
        parallel_for(m, row_grain(k), [&](std::int64_t r0, std::int64_t r1) {
            for (std::int64_t i = r0; i < r1; ++i) {
                const double* ai = A.data() + i * k;
                double s = 0.0;
                for (std::int64_t t = 0; t < k; ++t) s += ai[t] * B[static_cast<std::size_t>(t)];
                C[static_cast<std::size_t>(i)] = s;
            }
        });
    } else {
        parallel_for(m, row_grain(k * n), [&](std::int64_t r0, std::int64_t r1) {
            for (std::int64_t jb = 0; jb < n; jb += kBlockJ) {
                const std::int64_t je = std::min(n, jb + kBlockJ);
                for (std::int64_t kb = 0; kb < k; kb += kBlockK) {
                    const std::int64_t ke = std::min(k, kb + kBlockK);
                    for (std::int64_t i = r0; i < r1; ++i) {
                        double* ci = C.data() + i * n;
                        const double* ai = A.data() + i * k;
                        for (std::int64_t t = kb; t < ke; ++t) {
                            const double av = ai[t];
                            const double* bt = B.data() + t * n;
                            for (std::int64_t j = jb; j < je; ++j) ci[j] += av * bt[j];
                        }
                    }
                }
            }
        });
    }
    add_madds(m * k * n);
    return BasicTensorBlock::fp64({m, n}, std::move(C));
}

BasicTensorBlock sparse_dense(const BasicTensorBlock& a, const BasicTensorBlock& b) {
    const std::int64_t m = a.rows(), n = b.cols();
    auto rp = a.row_ptr();
    auto ci = a.col_idx();
    auto av = a.sparse_f64();
    auto B = b.dense_f64();
    std::vector<double> C(static_cast<std::size_t>(m * n), 0.0);
    parallel_for(m, row_grain(n * 8), [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t i = r0; i < r1; ++i) {
            double* out = C.data() + i * n;
            for (auto p = rp[static_cast<std::size_t>(i)]; p < rp[static_cast<std::size_t>(i + 1)]; ++p) {
                const double v = av[static_cast<std::size_t>(p)];
                const double* brow = B.data() + ci[static_cast<std::size_t>(p)] * n;
                for (std::int64_t j = 0; j < n; ++j) out[j] += v * brow[j];
            }
        }
    });
    add_madds(a.nnz() * n);
    return BasicTensorBlock::fp64({m, n}, std::move(C));
}

BasicTensorBlock dense_sparse(const BasicTensorBlock& a, const BasicTensorBlock& b) {
    const std::int64_t m = a.rows(), k = a.cols(), n = b.cols();
    auto A = a.dense_f64();
    auto rp = b.row_ptr();
    auto ci = b.col_idx();
    auto bv = b.sparse_f64();
    std::vector<double> C(static_cast<std::size_t>(m * n), 0.0);
    parallel_for(m, row_grain(b.nnz()), [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t i = r0; i < r1; ++i) {
            double* out = C.data() + i * n;
            const double* ai = A.data() + i * k;
            for (std::int64_t t = 0; t < k; ++t) {
                const double x = ai[t];
                for (auto p = rp[static_cast<std::size_t>(t)]; p < rp[static_cast<std::size_t>(t + 1)]; ++p)
                    out[ci[static_cast<std::size_t>(p)]] += x * bv[static_cast<std::size_t>(p)];
            }
        }
    });
    add_madds(m * b.nnz());
    return BasicTensorBlock::fp64({m, n}, std::move(C));
}

// Row-wise Gustavson product with a dense accumulator per row.
BasicTensorBlock sparse_sparse(const BasicTensorBlock& a, const BasicTensorBlock& b) {
    const std::int64_t m = a.rows(), n = b.cols();
    auto arp = a.row_ptr();
    auto aci = a.col_idx();
    auto av = a.sparse_f64();
    auto brp = b.row_ptr();
    auto bci = b.col_idx();
    auto bv = b.sparse_f64();
    std::vector<std::vector<std::int64_t>> row_cols(static_cast<std::size_t>(m));
    std::vector<std::vector<double>> row_vals(static_cast<std::size_t>(m));
    std::atomic<std::int64_t> madds{0};
    parallel_for(m, 64, [&](std::int64_t r0, std::int64_t r1) {
        std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<std::int64_t> touched;
        std::int64_t local = 0;
        for (std::int64_t i = r0; i < r1; ++i) {
            touched.clear();
            for (auto p = arp[static_cast<std::size_t>(i)]; p < arp[static_cast<std::size_t>(i + 1)]; ++p) {
                const double x = av[static_cast<std::size_t>(p)];
                const auto t = aci[static_cast<std::size_t>(p)];
                for (auto q = brp[static_cast<std::size_t>(t)]; q < brp[static_cast<std::size_t>(t + 1)]; ++q) {
                    const auto j = static_cast<std::size_t>(bci[static_cast<std::size_t>(q)]);
                    if (!seen[j]) {
                        seen[j] = 1;
                        touched.push_back(static_cast<std::int64_t>(j));
                    }
                    acc[j] += x * bv[static_cast<std::size_t>(q)];
                    ++local;
                }
            }
            std::sort(touched.begin(), touched.end());
            auto& cols = row_cols[static_cast<std::size_t>(i)];
            auto& vals = row_vals[static_cast<std::size_t>(i)];
            for (auto j : touched) {
                const double v = acc[static_cast<std::size_t>(j)];
                if (v != 0.0) {
                    cols.push_back(j);
                    vals.push_back(v);
                }
                acc[static_cast<std::size_t>(j)] = 0.0;
                seen[static_cast<std::size_t>(j)] = 0;
            }
        }
        madds.fetch_add(local, std::memory_order_relaxed);
    });
    std::vector<std::int64_t> rp{0};
    std::vector<std::int64_t> ci;
    std::vector<double> vals;
    for (std::int64_t i = 0; i < m; ++i) {
        ci.insert(ci.end(), row_cols[static_cast<std::size_t>(i)].begin(), row_cols[static_cast<std::size_t>(i)].end());
        vals.insert(vals.end(), row_vals[static_cast<std::size_t>(i)].begin(), row_vals[static_cast<std::size_t>(i)].end());
        rp.push_back(static_cast<std::int64_t>(ci.size()));
    }
    add_madds(madds.load());
    return BasicTensorBlock::from_csr(m, n, std::move(rp), std::move(ci), Cells(std::move(vals)));
}

// Split [0, n) into ranges of roughly equal upper-triangle work.
std::vector<Range> triangle_partitions(std::int64_t n, std::int64_t parts) {
    std::vector<Range> out;
    const double total = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
    const double per = total / static_cast<double>(std::max<std::int64_t>(parts, 1));
    std::int64_t begin = 0;
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        acc += static_cast<double>(n - i);
        if (acc >= per || i == n - 1) {
            out.push_back({begin, i + 1});
            begin = i + 1;
            acc = 0.0;
        }
    }
    return out;
}

void mirror_upper(std::vector<double>& G, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < i; ++j)
            G[static_cast<std::size_t>(i * n + j)] = G[static_cast<std::size_t>(j * n + i)];
}

} // namespace

BasicTensorBlock matmul(const BasicTensorBlock& in_a, const BasicTensorBlock& in_b) {
    std::optional<BasicTensorBlock> ha, hb;
    const BasicTensorBlock& a = fp64_view(in_a, ha, "matmul");
    const BasicTensorBlock& b = fp64_view(in_b, hb, "matmul");
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    if (a.cols() != b.rows())
        throw ShapeError("matmul inner dimensions differ: " + shape_string(a.dims()) + " %*% " + shape_string(b.dims()));
    if (a.is_sparse() && b.is_sparse()) return sparse_sparse(a, b);
    if (a.is_sparse()) return sparse_dense(a, b);
    if (b.is_sparse()) return dense_sparse(a, b);
    return dense_dense(a, b);
}

BasicTensorBlock tsmm(const BasicTensorBlock& in_x) {
    std::optional<BasicTensorBlock> hx;
    const BasicTensorBlock& x = fp64_view(in_x, hx, "tsmm");
    require_rank2(x, "tsmm");
    const std::int64_t m = x.rows(), n = x.cols();
    std::vector<double> G(static_cast<std::size_t>(n * n), 0.0);

    if (x.is_sparse()) {
        auto rp = x.row_ptr();
        auto ci = x.col_idx();
        auto v = x.sparse_f64();
        std::int64_t madds = 0;
        for (std::int64_t r = 0; r < m; ++r) {
            const auto b = rp[static_cast<std::size_t>(r)], e = rp[static_cast<std::size_t>(r + 1)];
            for (auto p = b; p < e; ++p) {
                const double vp = v[static_cast<std::size_t>(p)];
                double* grow = G.data() + ci[static_cast<std::size_t>(p)] * n;
                for (auto q = p; q < e; ++q) grow[ci[static_cast<std::size_t>(q)]] += vp * v[static_cast<std::size_t>(q)];
            }
            madds += (e - b) * (e - b + 1) / 2;
        }
        add_madds(madds);
    } else {
        auto X = x.dense_f64();
        auto parts = triangle_partitions(n, std::max(1, num_threads()) * 4);
        parallel_tasks(static_cast<std::int64_t>(parts.size()), [&](std::int64_t t) {
            const Range cols = parts[static_cast<std::size_t>(t)];
            for (std::int64_t rb = 0; rb < m; rb += kRowBlock) {
                const std::int64_t re = std::min(m, rb + kRowBlock);
                for (std::int64_t i = cols.begin; i < cols.end; ++i) {
                    double* gi = G.data() + i * n;
                    for (std::int64_t r = rb; r < re; ++r) {
                        const double* xr = X.data() + r * n;
                        const double xi = xr[i];
                        for (std::int64_t j = i; j < n; ++j) gi[j] += xi * xr[j];
                    }
                }
            }
        });
        add_madds(m * n * (n + 1) / 2);
    }
    mirror_upper(G, n);
    return BasicTensorBlock::fp64({n, n}, std::move(G));
}

} // namespace tessera::kernels
