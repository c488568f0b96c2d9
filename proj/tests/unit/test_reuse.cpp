// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tessera/core/kernels.hpp"
#include "tessera/lineage/lineage.hpp"
#include "tessera/reuse/cache.hpp"
#include "tessera/reuse/partial.hpp"

namespace tessera::reuse {
namespace {

using lineage::Digest;
using tessera::testing::max_abs_diff;
using tessera::testing::random_block;

Digest key(std::uint64_t i) { return Digest{i, i * 31 + 7}; }

CacheValue tensor_value(std::int64_t rows, std::int64_t cols, double v = 1.0) {
    return CacheValue{share(BasicTensorBlock::filled({rows, cols}, v)), std::nullopt};
}

TEST(CacheTest, ProbeBeforePutMisses) {
    ReuseCache c;
    EXPECT_FALSE(c.probe(key(1)));
    EXPECT_EQ(c.stats().misses, 1);
}

TEST(CacheTest, PutThenProbeReturnsSameReference) {
    ReuseCache c;
    auto v = tensor_value(10, 10);
    ASSERT_TRUE(c.put(key(1), v, 5.0, "tsmm"));
    auto hit = c.probe(key(1), "tsmm");
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->tensor.get(), v.tensor.get());
    EXPECT_EQ(c.stats().hits, 1);
    EXPECT_EQ(c.stats().hits_by_opcode.at("tsmm"), 1);
}

TEST(CacheTest, CheapValuesAreNotCachedExceptHeavyOps) {
    ReuseCache c;
    EXPECT_FALSE(c.put(key(1), CacheValue{nullptr, Scalar::fp64(3.0)}, 0.01, "+"));
    EXPECT_FALSE(c.probe(key(1)));
    EXPECT_TRUE(c.put(key(2), tensor_value(2, 2), 0.01, "tsmm"));
    EXPECT_TRUE(c.put(key(3), tensor_value(2, 2), 0.01, "matmul"));
}

TEST(CacheTest, OversizeValueIsRejectedWithoutEviction) {
    ReuseCache c(CacheConfig{.capacity_bytes = 4096});
    ASSERT_TRUE(c.put(key(1), tensor_value(4, 4), 10.0));
    EXPECT_FALSE(c.put(key(2), tensor_value(100, 100), 1000.0));
    EXPECT_TRUE(c.contains(key(1)));
    EXPECT_EQ(c.stats().evictions, 0);
}

TEST(CacheTest, EvictsLowestCostPerByteFirst) {
    const std::size_t unit = tensor_value(16, 16).size_bytes();
    ReuseCache c(CacheConfig{.capacity_bytes = 4 * unit});
    ASSERT_TRUE(c.put(key(1), tensor_value(32, 16), 2.0));  // cheap and large
    ASSERT_TRUE(c.put(key(2), tensor_value(16, 16), 50.0)); // expensive and small
    ASSERT_TRUE(c.put(key(3), tensor_value(32, 16), 40.0));
    EXPECT_FALSE(c.contains(key(1)));
    EXPECT_TRUE(c.contains(key(2)));
    EXPECT_TRUE(c.contains(key(3)));
}

TEST(CacheTest, PinnedEntrySurvivesEviction) {
    const std::size_t unit = tensor_value(16, 16).size_bytes();
    ReuseCache c(CacheConfig{.capacity_bytes = 2 * unit});
    ASSERT_TRUE(c.put(key(1), tensor_value(16, 16), 1.5));
    c.pin(key(1));
    ASSERT_TRUE(c.put(key(2), tensor_value(16, 16), 100.0));
    EXPECT_FALSE(c.put(key(3), tensor_value(16, 16), 1000.0) && !c.contains(key(1)));
    EXPECT_TRUE(c.contains(key(1)));
    c.unpin(key(1));
}

TEST(CacheTest, LruBreaksTies) {
    const std::size_t unit = tensor_value(16, 16).size_bytes();
    ReuseCache c(CacheConfig{.capacity_bytes = 2 * unit});
    c.put(key(1), tensor_value(16, 16), 5.0);
    c.put(key(2), tensor_value(16, 16), 5.0);
    c.probe(key(1));
    c.put(key(3), tensor_value(16, 16), 5.0);
    EXPECT_TRUE(c.contains(key(1)));
    EXPECT_FALSE(c.contains(key(2)));
}

TEST(CacheTest, NeverExceedsBudgetUnderRandomWorkload) {
    ReuseCache c(CacheConfig{.capacity_bytes = 64 * 1024});
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const auto r = 1 + static_cast<std::int64_t>(rng() % 60);
        c.put(key(rng() % 300), tensor_value(r, 8), 1.0 + static_cast<double>(rng() % 100));
        if (rng() % 3 == 0) c.probe(key(rng() % 300));
        ASSERT_LE(c.bytes(), c.capacity());
    }
    EXPECT_GT(c.stats().evictions, 0);
}

// Builds the lineage of tsmm(bind(parts)) and registers the bind extents the
// way the interpreter does.
struct Fixture {
    lineage::Tracer tracer;
    ReuseCache cache;
    BindRegistry binds;
    PartialReuse partial{cache, binds};
    int kernels_run = 0;

    Fixture() {
        partial.set_observer([this](std::string_view, double) { ++kernels_run; });
    }

    lineage::LineageRef bind(kernels::Axis axis, const std::vector<std::string>& names,
                             const std::vector<std::int64_t>& extents) {
        std::vector<lineage::LineageRef> in;
        std::vector<Digest> parts;
        for (const auto& n : names) {
            in.push_back(tracer.input(n));
            parts.push_back(in.back().digest());
        }
        auto out = tracer.op(axis == kernels::Axis::Rows ? opcodes::kRbind : opcodes::kCbind, in);
        binds.record(out.digest(), {axis, extents, parts});
        return out;
    }
};

TEST(PartialTest, CbindRuleComputesOnlyNewColumn) {
    Fixture f;
    auto xs = random_block(40, 1, 1.0, 1), xj = random_block(40, 1, 1.0, 2);
    auto gs = f.tracer.op(opcodes::kTsmm, {f.tracer.input("a")});
    f.cache.put(gs.digest(), CacheValue{share(kernels::tsmm(xs)), std::nullopt}, 5.0, "tsmm");
    auto b = f.bind(kernels::Axis::Cols, {"a", "b"}, {1, 1});
    auto out = f.tracer.op(opcodes::kTsmm, {b});
    auto x = share(kernels::bind(kernels::Axis::Cols, {&xs, &xj}));
    auto r = f.partial.try_partial(*out.node, {x});
    ASSERT_TRUE(r);
    EXPECT_EQ(r->rule, "R1");
    EXPECT_LE(max_abs_diff(*r->value, kernels::tsmm(*x)), 1e-12);
    EXPECT_EQ(r->value->dims(), (Shape{2, 2}));
    EXPECT_EQ(f.kernels_run, 2);
}

TEST(PartialTest, CbindRuleWithWiderPrefix) {
    Fixture f;
    auto a = random_block(50, 3, 1.0, 3), b = random_block(50, 1, 1.0, 4), c = random_block(50, 1, 1.0, 5);
    auto prefix = f.bind(kernels::Axis::Cols, {"a", "b"}, {3, 1});
    auto ab = kernels::bind(kernels::Axis::Cols, {&a, &b});
    f.cache.put(f.tracer.op(opcodes::kTsmm, {prefix}).digest(), CacheValue{share(kernels::tsmm(ab)), std::nullopt}, 5.0,
                "tsmm");
    auto full = f.bind(kernels::Axis::Cols, {"a", "b", "c"}, {3, 1, 1});
    auto x = share(kernels::bind(kernels::Axis::Cols, {&a, &b, &c}));
    auto r = f.partial.try_partial(*f.tracer.op(opcodes::kTsmm, {full}).node, {x});
    ASSERT_TRUE(r);
    EXPECT_LE(max_abs_diff(*r->value, kernels::tsmm(*x)), 1e-12);
}

TEST(PartialTest, RbindRuleWithAllPartsCachedIsAPureSum) {
    Fixture f;
    auto ones = BasicTensorBlock::filled({10, 4}, 1.0);
    const auto g1 = kernels::tsmm(ones);
    for (const char* n : {"f1", "f2", "f3"})
        f.cache.put(f.tracer.op(opcodes::kTsmm, {f.tracer.input(n)}).digest(), CacheValue{share(g1), std::nullopt}, 5.0,
                    "tsmm");
    auto b = f.bind(kernels::Axis::Rows, {"f1", "f2", "f3"}, {10, 10, 10});
    auto x = share(kernels::bind(kernels::Axis::Rows, {&ones, &ones, &ones}));
    auto r = f.partial.try_partial(*f.tracer.op(opcodes::kTsmm, {b}).node, {x});
    ASSERT_TRUE(r);
    EXPECT_EQ(r->rule, "R2");
    EXPECT_EQ(f.kernels_run, 0);
    EXPECT_EQ(*r->value, kernels::elementwise(kernels::BinaryOp::Mul, g1, 3.0));
}

TEST(PartialTest, RbindRuleComputesAndCachesMissingParts) {
    Fixture f;
    auto p = random_block(7, 5, 1.0, 6), q = random_block(9, 5, 1.0, 7);
    auto b = f.bind(kernels::Axis::Rows, {"p", "q"}, {7, 9});
    auto x = share(kernels::bind(kernels::Axis::Rows, {&p, &q}));
    auto r = f.partial.try_partial(*f.tracer.op(opcodes::kTsmm, {b}).node, {x});
    ASSERT_TRUE(r);
    EXPECT_EQ(f.kernels_run, 2);
    EXPECT_LE(max_abs_diff(*r->value, kernels::tsmm(*x)), 1e-12);
    EXPECT_TRUE(f.cache.contains(f.tracer.op(opcodes::kTsmm, {f.tracer.input("q")}).digest()));
}

TEST(PartialTest, TransposedRbindMatmulRule) {
    Fixture f;
    auto p = random_block(6, 4, 1.0, 8), q = random_block(5, 4, 1.0, 9);
    auto yp = random_block(6, 1, 1.0, 10), yq = random_block(5, 1, 1.0, 11);
    auto xb = f.bind(kernels::Axis::Rows, {"p", "q"}, {6, 5});
    auto yb = f.bind(kernels::Axis::Rows, {"yp", "yq"}, {6, 5});
    auto out = f.tracer.op(opcodes::kMatmul, {f.tracer.op(opcodes::kTranspose, {xb}), yb});
    auto x = kernels::bind(kernels::Axis::Rows, {&p, &q});
    auto y = share(kernels::bind(kernels::Axis::Rows, {&yp, &yq}));
    auto t = share(kernels::transpose(x));
    auto r = f.partial.try_partial(*out.node, {t, y});
    ASSERT_TRUE(r);
    EXPECT_EQ(r->rule, "R3");
    EXPECT_LE(max_abs_diff(*r->value, kernels::matmul(*t, *y)), 1e-12);
}

TEST(PartialTest, UnrelatedLineageHasNoPlan) {
    Fixture f;
    auto a = share(random_block(3, 3, 1.0, 1));
    auto out = f.tracer.op(opcodes::kMatmul, {f.tracer.input("A"), f.tracer.input("B")});
    EXPECT_FALSE(f.partial.try_partial(*out.node, {a, a}));
    auto g = f.tracer.op(opcodes::kTsmm, {f.tracer.input("A")});
    EXPECT_FALSE(f.partial.try_partial(*g.node, {a}));
}

} // namespace
} // namespace tessera::reuse
