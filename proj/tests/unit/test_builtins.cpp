// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tessera/builtins/builtins.hpp"
#include "tessera/core/kernels.hpp"

namespace tessera::builtins {
namespace {

using interp::LineageMode;
using interp::Session;
using interp::SessionConfig;
using testing::gauss_solve;
using testing::Mat;
using testing::max_abs_diff;

SessionConfig quiet(LineageMode mode = LineageMode::Trace) {
    static std::ostringstream sink;
    SessionConfig c;
    c.lineage = mode;
    c.out = &sink;
    return c;
}

// Ridge fit on the listed columns by elimination, with its rss.
struct OracleFit {
    std::vector<double> beta;
    double rss = 0.0;
};

OracleFit oracle_fit(const BasicTensorBlock& x, const BasicTensorBlock& y, const std::vector<std::int64_t>& cols,
                     double lambda) {
    const std::size_t n = cols.size();
    Mat a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (std::int64_t r = 0; r < x.rows(); ++r)
        for (std::size_t i = 0; i < n; ++i) {
            b[i] += x.at(r, cols[i]) * y.at(r, 0);
            for (std::size_t j = 0; j < n; ++j) a[i][j] += x.at(r, cols[i]) * x.at(r, cols[j]);
        }
    for (std::size_t i = 0; i < n; ++i) a[i][i] += lambda;
    OracleFit f{gauss_solve(a, b), 0.0};
    for (std::int64_t r = 0; r < x.rows(); ++r) {
        double p = 0.0;
        for (std::size_t i = 0; i < n; ++i) p += x.at(r, cols[i]) * f.beta[i];
        f.rss += (y.at(r, 0) - p) * (y.at(r, 0) - p);
    }
    return f;
}

double yty(const BasicTensorBlock& y) {
    double s = 0.0;
    for (std::int64_t r = 0; r < y.rows(); ++r) s += y.at(r, 0) * y.at(r, 0);
    return s;
}

BasicTensorBlock column(const std::vector<double>& v) {
    return BasicTensorBlock::matrix(static_cast<std::int64_t>(v.size()), 1, v);
}

// ---- lmDS ----

TEST(LmDSTest, ExactFit) {
    Session s(quiet());
    const auto x = column({1, 2, 3}), y = column({2, 4, 6});
    EXPECT_NEAR(lm_ds(s, x, y, 0.0).at(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(lm_ds(s, x, y, 14.0).at(0, 0), 1.0, 1e-12);
}

TEST(LmDSTest, MatchesEliminationOracle) {
    Session s(quiet());
    const auto x = testing::random_block(200, 5, 1.0, 21), y = testing::random_block(200, 1, 1.0, 22);
    const auto beta = lm_ds(s, x, y, 0.1);
    const auto ref = oracle_fit(x, y, {0, 1, 2, 3, 4}, 0.1);
    EXPECT_LE(max_abs_diff(column(ref.beta), beta), 1e-8);
}

TEST(LmDSTest, BetaMinimizesRidgeObjective) {
    Session s(quiet());
    const auto x = testing::random_block(80, 6, 1.0, 5), y = testing::random_block(80, 1, 1.0, 6);
    const double lambda = 0.3;
    const auto beta = lm_ds(s, x, y, lambda);
    const auto objective = [&](const BasicTensorBlock& b) {
        const auto r = kernels::elementwise(kernels::BinaryOp::Sub, y, kernels::matmul(x, b));
        double o = 0.0;
        for (std::int64_t i = 0; i < r.numel(); ++i) o += r.f64_at(i) * r.f64_at(i);
        for (std::int64_t i = 0; i < b.numel(); ++i) o += lambda * b.f64_at(i) * b.f64_at(i);
        return o;
    };
    const double best = objective(beta);
    for (std::int64_t j = 0; j < beta.rows(); ++j)
        for (double step : {-1e-3, 1e-3}) {
            auto p = beta.to_dense_f64();
            p[static_cast<std::size_t>(j)] += step;
            EXPECT_GE(objective(column(p)), best);
        }
}

TEST(LmDSTest, DegenerateSystems) {
    Session s(quiet());
    EXPECT_THROW(lm_ds(s, BasicTensorBlock::zeros({3, 2}), column({1, 2, 3}), 0.0), SingularError);
    // collinear columns: the shifted retry still returns a solution of the normal equations
    const auto x = BasicTensorBlock::matrix(3, 2, {1, 2, 2, 4, 3, 6});
    const auto beta = lm_ds(s, x, column({1, 2, 3}), 0.0);
    EXPECT_NEAR(beta.at(0, 0) + 2 * beta.at(1, 0), 1.0, 1e-6);
}

// ---- aic ----

TEST(AicTest, Examples) {
    EXPECT_NEAR(aic(10.0, 10.0, 0.0), 2.0, 1e-12);
    EXPECT_NEAR(aic(std::exp(1.0) * 10.0, 10.0, 1.0), 14.0, 1e-12);
    EXPECT_TRUE(std::isfinite(aic(0.0, 5.0, 1.0)));
}

TEST(AicTest, DecreasesWithRss) {
    double prev = aic(1e6, 100, 3);
    for (double rss = 1e5; rss > 1e-6; rss /= 7) {
        const double a = aic(rss, 100, 3);
        EXPECT_LT(a, prev);
        prev = a;
    }
}

// ---- steplm ----

// Greedy forward selection by AIC over elimination fits.
std::vector<std::int64_t> greedy_oracle(const BasicTensorBlock& x, const BasicTensorBlock& y, double lambda,
                                        std::vector<double>* path = nullptr) {
    const double m = static_cast<double>(x.rows());
    const double tiny = 1e-20 * yty(y);
    std::vector<std::int64_t> sel;
    double score = aic(yty(y), m, 0);
    if (path) path->push_back(score);
    while (static_cast<std::int64_t>(sel.size()) < x.cols()) {
        std::int64_t best = -1;
        for (std::int64_t j = 0; j < x.cols(); ++j) {
            if (std::find(sel.begin(), sel.end(), j) != sel.end()) continue;
            auto cols = sel;
            cols.push_back(j);
            const double a = aic(std::max(oracle_fit(x, y, cols, lambda).rss, tiny), m, static_cast<double>(cols.size()));
            if (a < score) {
                score = a;
                best = j;
            }
        }
        if (best < 0) break;
        sel.push_back(best);
        if (path) path->push_back(score);
    }
    return sel;
}

TEST(SteplmTest, ExactSingleFeature) {
    Session s(quiet());
    auto x = testing::random_block(40, 4, 1.0, 8);
    std::vector<double> y(40);
    for (std::int64_t r = 0; r < 40; ++r) y[static_cast<std::size_t>(r)] = 2.0 * x.at(r, 2);
    const auto fit = steplm(s, x, column(y), 0.0);
    ASSERT_EQ(fit.selected, std::vector<std::int64_t>{2});
    EXPECT_NEAR(fit.beta.at(0, 0), 2.0, 1e-10);
    EXPECT_EQ(fit.selected, greedy_oracle(x, column(y), 0.0));
}

TEST(SteplmTest, NoiseOnlyTerminatesWithOracleChoices) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Session s(quiet());
        const auto x = testing::random_block(50, 3, 1.0, seed), y = testing::random_block(50, 1, 1.0, seed + 100);
        const auto fit = steplm(s, x, y, 0.0);
        EXPECT_LE(fit.selected.size(), 3u);
        for (auto j : fit.selected) EXPECT_TRUE(j >= 0 && j < 3);
        EXPECT_EQ(fit.selected, greedy_oracle(x, y, 0.0));
        if (fit.selected.empty()) {
            EXPECT_NEAR(fit.rss, yty(y), 1e-9);
        } else {
            const auto ref = oracle_fit(x, y, fit.selected, 0.0);
            EXPECT_NEAR(fit.rss, ref.rss, 1e-9 * ref.rss);
            EXPECT_NEAR(fit.aic, aic(ref.rss, 50, static_cast<double>(fit.selected.size())), 1e-9);
        }
    }
}

TEST(SteplmTest, DuplicateColumnsTieTowardLowerIndex) {
    Session s(quiet());
    const auto base = testing::random_block(30, 1, 1.0, 4);
    std::vector<double> cells;
    for (std::int64_t r = 0; r < 30; ++r) {
        const double v = base.at(r, 0);
        cells.insert(cells.end(), {0.1 * (r % 3), v, v});
    }
    const auto x = BasicTensorBlock::matrix(30, 3, cells);
    std::vector<double> y(30);
    for (std::int64_t r = 0; r < 30; ++r) y[static_cast<std::size_t>(r)] = 3.0 * base.at(r, 0);
    const auto fit = steplm(s, x, column(y), 0.1);
    ASSERT_FALSE(fit.selected.empty());
    EXPECT_EQ(fit.selected[0], 1);
}

TEST(SteplmTest, PathDecreasesAndMatchesGreedyOracle) {
    for (std::uint64_t seed = 10; seed < 14; ++seed) {
        const auto x = testing::random_block(60, 6, 1.0, seed);
        std::vector<double> y(60);
        const auto noise = testing::random_block(60, 1, 1.0, seed + 50);
        for (std::int64_t r = 0; r < 60; ++r)
            y[static_cast<std::size_t>(r)] = x.at(r, 1) - 0.5 * x.at(r, 4) + 0.2 * noise.at(r, 0);
        for (auto mode : {LineageMode::None, LineageMode::ReusePartial}) {
            Session s(quiet(mode));
            s.set_input("X", share(x));
            s.set_input("y", share(column(y)));
            s.run("[S, beta, rss, score, nsel, path] = steplm(X, y, 0.01)");
            std::vector<double> ref_path;
            const auto ref = greedy_oracle(x, column(y), 0.01, &ref_path);
            const auto nsel = s.scalar("nsel").as_int();
            ASSERT_EQ(nsel, static_cast<std::int64_t>(ref.size()));
            const auto path = s.tensor("path");
            for (std::int64_t i = 0; i <= nsel; ++i) {
                EXPECT_NEAR(path->at(0, i), ref_path[static_cast<std::size_t>(i)], 1e-8);
                if (i > 0) {
                    EXPECT_LT(path->at(0, i), path->at(0, i - 1));
                }
            }
            for (std::int64_t i = 0; i < nsel; ++i)
                EXPECT_EQ(static_cast<std::int64_t>(s.tensor("S")->at(0, i)) - 1, ref[static_cast<std::size_t>(i)]);
        }
    }
}

TEST(SteplmTest, PartialReuseExtendsCachedGrams) {
    Session s(quiet(LineageMode::ReusePartial));
    const auto x = testing::random_block(100, 5, 1.0, 31);
    std::vector<double> y(100);
    for (std::int64_t r = 0; r < 100; ++r) y[static_cast<std::size_t>(r)] = x.at(r, 0) + x.at(r, 3);
    steplm(s, x, column(y), 0.0);
    EXPECT_GT(s.cache_stats().partial_by_rule.count("R1") ? s.cache_stats().partial_by_rule.at("R1") : 0, 0);
}

// ---- cvlm ----

TEST(CvlmTest, LeaveOneOutMatchesDirectFits) {
    Session s(quiet());
    const auto x = testing::random_block(6, 2, 1.0, 3), y = testing::random_block(6, 1, 1.0, 4);
    const auto models = cvlm(s, x, y, 6, 0.0);
    ASSERT_EQ(models.size(), 6u);
    for (std::int64_t i = 0; i < 6; ++i) {
        std::vector<double> xc, yc;
        for (std::int64_t r = 0; r < 6; ++r)
            if (r != i) {
                xc.insert(xc.end(), {x.at(r, 0), x.at(r, 1)});
                yc.push_back(y.at(r, 0));
            }
        const auto xi = BasicTensorBlock::matrix(5, 2, xc), yi = column(yc);
        const auto ref = oracle_fit(xi, yi, {0, 1}, 0.0);
        EXPECT_LE(max_abs_diff(column(ref.beta), models[static_cast<std::size_t>(i)].beta), 1e-9);
        const double held = y.at(i, 0) - x.at(i, 0) * ref.beta[0] - x.at(i, 1) * ref.beta[1];
        EXPECT_NEAR(models[static_cast<std::size_t>(i)].rss, held * held, 1e-9);
    }
}

TEST(CvlmTest, TwoFoldsSplitContiguously) {
    Session s(quiet());
    const auto x = BasicTensorBlock::matrix(4, 1, {1, 2, 3, 4});
    const auto y = column({1, 2, 30, 40});
    const auto models = cvlm(s, x, y, 2, 0.0);
    // model 0 trains on rows {2,3}, model 1 on rows {0,1}
    EXPECT_NEAR(models[0].beta.at(0, 0), (90.0 + 160.0) / 25.0, 1e-12);
    EXPECT_NEAR(models[1].beta.at(0, 0), 1.0, 1e-12);
}

TEST(CvlmTest, FoldGramsComputedOnceWithPartialReuse) {
    const auto x = testing::random_block(120, 8, 1.0, 40), y = testing::random_block(120, 1, 1.0, 41);
    Session off(quiet(LineageMode::None));
    const auto a = cvlm(off, x, y, 6, 0.01);
    EXPECT_EQ(off.stats().count("tsmm"), 6 * 5);
    Session on(quiet(LineageMode::ReusePartial));
    const auto b = cvlm(on, x, y, 6, 0.01);
    EXPECT_EQ(on.stats().count("tsmm"), 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LE(max_abs_diff(a[i].beta, b[i].beta), 1e-9);
        EXPECT_NEAR(a[i].rss, b[i].rss, 1e-9 * std::max(1.0, a[i].rss));
    }
}

TEST(CvlmTest, RejectsTooManyFolds) {
    Session s(quiet());
    EXPECT_THROW(cvlm(s, testing::random_block(3, 2, 1.0, 1), testing::random_block(3, 1, 1.0, 2), 4, 0.0), Error);
}

TEST(CvlmTest, ShuffledFoldsArePermutedContiguousFolds) {
    Session s(quiet());
    s.set_input("X", share(testing::random_block(40, 3, 1.0, 9)));
    s.set_input("y", share(testing::random_block(40, 1, 1.0, 10)));
    s.run("[B1, r1] = cvlm(X, y, 4, 0.01, 5)\n[B2, r2] = cvlm(X, y, 4, 0.01, 5)\n[B3, r3] = cvlm(X, y, 4, 0.01)\n");
    EXPECT_EQ(*s.tensor("B1"), *s.tensor("B2"));
    EXPECT_GT(max_abs_diff(*s.tensor("B1"), *s.tensor("B3")), 0.0);
    // the folds still partition the rows: every row is held out once
    const auto r1 = s.tensor("r1");
    EXPECT_EQ(r1->cols(), 4);
}

// ---- gridSearchLM ----

TEST(GridSearchTest, SingleLambdaEqualsLmDS) {
    Session s(quiet());
    const auto x = testing::random_block(50, 4, 1.0, 1), y = testing::random_block(50, 1, 1.0, 2);
    const auto b = grid_search_lm(s, x, y, {0.5});
    EXPECT_EQ(b, lm_ds(s, x, y, 0.5));
}

TEST(GridSearchTest, HeavyOpsRunOnceWithReuse) {
    const auto x = testing::random_block(300, 10, 1.0, 3), y = testing::random_block(300, 1, 1.0, 4);
    std::vector<double> lambdas;
    for (int i = -3; i <= 3; ++i) lambdas.push_back(std::pow(10.0, i));
    Session off(quiet(LineageMode::None));
    const auto a = grid_search_lm(off, x, y, lambdas);
    EXPECT_EQ(off.stats().count("tsmm"), 7);
    EXPECT_EQ(off.stats().count("matmul"), 7);
    Session on(quiet(LineageMode::ReuseFull));
    const auto b = grid_search_lm(on, x, y, lambdas);
    EXPECT_EQ(on.stats().count("tsmm"), 1);
    EXPECT_EQ(on.stats().count("matmul"), 1);
    EXPECT_LE(max_abs_diff(a, b), 1e-12);
}

TEST(GridSearchTest, NormShrinksAsLambdaGrows) {
    Session s(quiet());
    const auto x = testing::random_block(100, 6, 1.0, 7), y = testing::random_block(100, 1, 1.0, 8);
    const std::vector<double> lambdas{0.0, 0.01, 0.1, 1, 10, 100, 1000};
    const auto b = grid_search_lm(s, x, y, lambdas);
    double prev = INFINITY;
    for (std::int64_t j = 0; j < b.cols(); ++j) {
        double n2 = 0.0;
        for (std::int64_t i = 0; i < b.rows(); ++i) n2 += b.at(i, j) * b.at(i, j);
        EXPECT_LT(n2, prev);
        prev = n2;
    }
    const auto ols = oracle_fit(x, y, {0, 1, 2, 3, 4, 5}, 0.0);
    for (std::int64_t i = 0; i < 6; ++i) EXPECT_NEAR(b.at(i, 0), ols.beta[static_cast<std::size_t>(i)], 1e-8);
}

// ---- detectSchema ----

DataTensorBlock strings(std::vector<std::vector<std::string>> columns) {
    const auto rows = static_cast<std::int64_t>(columns[0].size());
    std::vector<Cells> cols;
    for (auto& c : columns) {
        cols.emplace_back(std::move(c));
    }
    return DataTensorBlock::from_columns(rows, std::move(cols));
}

TEST(DetectSchemaTest, Examples) {
    EXPECT_EQ(detect_schema(strings({{"1", "2", "3"}})), std::vector<ValueType>{ValueType::INT64});
    EXPECT_EQ(detect_schema(strings({{"1.5", "2"}})), std::vector<ValueType>{ValueType::FP64});
    EXPECT_EQ(detect_schema(strings({{"1.5", "x"}})), std::vector<ValueType>{ValueType::STRING});
}

TEST(DetectSchemaTest, NarrowestTypePerColumn) {
    const auto f = strings({{"TRUE", "false", ""},
                            {"-7", "", "99999999999"},
                            {"1e-3", "4", ""},
                            {"99999999999999999999", "1", "2"},
                            {"true", "1", "0"},
                            {"", "", ""}});
    EXPECT_EQ(detect_schema(f), (std::vector<ValueType>{ValueType::BOOLEAN, ValueType::INT64, ValueType::FP64,
                                                        ValueType::FP64, ValueType::STRING, ValueType::STRING}));
}

// ---- genData ----

TEST(GenDataTest, DenseHasEveryCell) {
    const auto d = gen_data(30, 7, 1.0, 3);
    EXPECT_EQ(d.x.nnz(), 30 * 7);
    EXPECT_EQ(d.y.rows(), 30);
    EXPECT_EQ(d.y.cols(), 1);
}

TEST(GenDataTest, SparseDensityConcentrates) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto d = gen_data(1000, 1000, 0.1, seed);
        const double density = static_cast<double>(d.x.nnz()) / 1e6;
        EXPECT_GE(density, 0.095);
        EXPECT_LE(density, 0.105);
        for (std::int64_t i = 0; i < 100; ++i) {
            const double v = d.x.at(i, i);
            EXPECT_TRUE(v >= 0.0 && v < 1.0);
        }
    }
}

TEST(GenDataTest, DeterministicInSeed) {
    const auto a = gen_data(200, 20, 0.3, 11), b = gen_data(200, 20, 0.3, 11), c = gen_data(200, 20, 0.3, 12);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.y, b.y);
    EXPECT_NE(a.x, c.x);
}

TEST(GenDataTest, ResponseIsNearlyLinear) {
    Session s(quiet());
    const auto d = gen_data(500, 5, 1.0, 4);
    const auto beta = lm_ds(s, d.x, d.y, 0.0);
    const auto r = kernels::elementwise(kernels::BinaryOp::Sub, d.y, kernels::matmul(d.x, beta));
    double rss = 0.0;
    for (std::int64_t i = 0; i < r.numel(); ++i) rss += r.f64_at(i) * r.f64_at(i);
    EXPECT_LT(rss / 500.0, 2e-4); // noise variance is 1e-4
}

} // namespace
} // namespace tessera::builtins
