// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "oracles.hpp"
#include "tessera/core/kernels.hpp"
#include "tessera/fed/client.hpp"
#include "tessera/fed/federated.hpp"
#include "tessera/fed/protocol.hpp"
#include "tessera/fed/worker.hpp"
#include "tessera/io/io.hpp"

namespace tessera::fed {
namespace {

using tessera::testing::max_abs_diff;
using tessera::testing::random_block;

BasicTensorBlock M(std::int64_t r, std::int64_t c, std::vector<double> v) { return BasicTensorBlock::matrix(r, c, std::move(v)); }

struct Cluster {
    std::vector<std::unique_ptr<Worker>> workers;
    std::shared_ptr<Federation> fed = std::make_shared<Federation>();
    explicit Cluster(int n) {
        for (int i = 0; i < n; ++i) {
            workers.push_back(std::make_unique<Worker>(0));
            workers.back()->start();
        }
    }
    ~Cluster() {
        for (auto& w : workers) w->stop();
    }
    const std::string endpoint(std::size_t i) const { return workers[i]->endpoint(); }

    // Splits x into contiguous row parts of the given heights, one per worker.
    FederatedTensor split(const BasicTensorBlock& x, const std::vector<std::int64_t>& heights) {
        std::vector<FedPart> parts;
        std::int64_t row = 0;
        for (std::size_t i = 0; i < heights.size(); ++i) {
            kernels::Range r{row, row + heights[i]};
            parts.push_back({r, share(kernels::slice(x, {r, {0, x.cols()}})), endpoint(i % workers.size())});
            row += heights[i];
        }
        return fed_init(fed, x.dims(), std::move(parts));
    }
};

TEST(ProtocolTest, EncodeDecodeRoundTripAllTypes) {
    for (int t = 1; t <= 7; ++t)
        for (const std::string& payload : {std::string(), std::string("abc"), std::string(1000, '\0')}) {
            Message m{static_cast<MsgType>(t), 0x0102030405060708ULL + static_cast<std::uint64_t>(t), payload};
            const std::string bytes = encode(m);
            EXPECT_EQ(bytes.size(), kHeaderSize + payload.size());
            EXPECT_EQ(decode(bytes), m);
        }
}

TEST(ProtocolTest, FrameLayoutIsLittleEndian) {
    const std::string b = encode(Message{MsgType::Get, 1, "xy"});
    EXPECT_EQ(static_cast<unsigned char>(b[0]), 0xD5);
    EXPECT_EQ(static_cast<unsigned char>(b[1]), 0xFE);
    EXPECT_EQ(b[2], 1);
    EXPECT_EQ(b[3], 3);
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[12], 2);
    EXPECT_THROW(decode(b.substr(0, 21)), FedError);
    std::string bad = b;
    bad[0] = 0;
    EXPECT_THROW(decode(bad), FedError);
}

TEST(WorkerTest, PutGetExecAndErrors) {
    Cluster c(1);
    WorkerClient client(c.endpoint(0));
    auto x = M(2, 2, {1, 2, 3, 4});
    const auto id = client.put(x);
    EXPECT_EQ(id, 0u);
    EXPECT_EQ(io::encode_binary(client.get(id)), io::encode_binary(x));
    const auto v = client.put(M(2, 1, {1, 1}));
    const auto r = client.exec(ExecRequest{"matvec", {{true, id, {}}, {true, v, {}}}});
    EXPECT_EQ(client.get(r), M(2, 1, {3, 7}));
    try {
        client.get(999);
        FAIL();
    } catch (const FedError& e) {
        EXPECT_NE(std::string(e.what()).find("unknown variable"), std::string::npos);
    }
    EXPECT_THROW(client.exec(ExecRequest{"solve", {{true, id, {}}}}), FedError);
    // The connection stays usable after errors.
    EXPECT_EQ(client.get(id), x);
    client.remove(id);
    EXPECT_THROW(client.get(id), FedError);
}

TEST(WorkerTest, ConnectionsHaveSeparateNamespaces) {
    Cluster c(1);
    WorkerClient a(c.endpoint(0)), b(c.endpoint(0));
    const auto id = a.put(M(1, 1, {5}));
    EXPECT_THROW(b.get(id), FedError);
    EXPECT_EQ(a.get(id), M(1, 1, {5}));
}

TEST(WorkerTest, RemoteShutdownEndsServe) {
    Worker w(0);
    std::thread t([&] { w.serve(); });
    WorkerClient client(w.endpoint());
    client.shutdown();
    t.join();
    SUCCEED();
}

TEST(FederatedTest, InitValidatesRanges) {
    Cluster c(2);
    auto x = share(M(4, 2, {1, 2, 3, 4, 5, 6, 7, 8}));
    auto f = c.split(*x, {2, 2});
    EXPECT_EQ(f.ranges.size(), 2u);
    EXPECT_EQ(collect(f), *x);
    std::vector<FedPart> overlap{{{0, 3}, share(kernels::slice(*x, {{0, 3}, {0, 2}})), c.endpoint(0)},
                                 {{2, 4}, share(kernels::slice(*x, {{2, 4}, {0, 2}})), c.endpoint(1)}};
    EXPECT_THROW(fed_init(c.fed, {4, 2}, overlap), FedError);
    std::vector<FedPart> unreachable{{{0, 4}, x, "127.0.0.1:1"}};
    try {
        fed_init(c.fed, {4, 2}, unreachable);
        FAIL();
    } catch (const FedError& e) {
        EXPECT_NE(std::string(e.what()).find("127.0.0.1:1"), std::string::npos);
    }
}

TEST(FederatedTest, MatvecAndVecmatExamples) {
    Cluster c(2);
    auto f = c.split(M(2, 2, {1, 2, 3, 4}), {1, 1});
    EXPECT_EQ(fed_matvec(f, M(2, 1, {1, 1})), M(2, 1, {3, 7}));
    EXPECT_EQ(fed_vecmat(M(2, 1, {1, 1}), f), M(1, 2, {4, 6}));
    EXPECT_EQ(fed_matvec(f, BasicTensorBlock::zeros({2, 1})).nnz(), 0);
    EXPECT_THROW(fed_matvec(f, M(3, 1, {1, 1, 1})), ShapeError);
}

TEST(FederatedTest, UncoveredRowsAreZero) {
    Cluster c(1);
    auto x = M(3, 2, {1, 2, 3, 4, 5, 6});
    std::vector<FedPart> parts{{{1, 2}, share(kernels::slice(x, {{1, 2}, {0, 2}})), c.endpoint(0)}};
    auto f = fed_init(c.fed, {3, 2}, parts);
    EXPECT_EQ(collect(f), M(3, 2, {0, 0, 3, 4, 0, 0}));
    EXPECT_EQ(fed_matvec(f, M(2, 1, {1, 1})), M(3, 1, {0, 7, 0}));
    FederatedTensor empty{{2, 2}, ValueType::FP64, {}, c.fed};
    EXPECT_EQ(collect(empty), BasicTensorBlock::zeros({2, 2}));
}

TEST(FederatedTest, AggregatesMatchLocal) {
    Cluster c(2);
    auto ones = BasicTensorBlock::filled({4, 2}, 1.0);
    EXPECT_EQ(fed_sum(c.split(ones, {2, 2})), 8.0);
    auto x = random_block(37, 6, 1.0, 3);
    auto f = c.split(x, {10, 27});
    EXPECT_LE(max_abs_diff(fed_aggregate(kernels::AggKind::ColSums, f), kernels::aggregate_vector(kernels::AggKind::ColSums, x)),
              1e-12);
    EXPECT_EQ(fed_aggregate(kernels::AggKind::RowSums, f), kernels::aggregate_vector(kernels::AggKind::RowSums, x));
}

TEST(FederatedTest, RandomizedEquivalenceAndSliceEconomy) {
    Cluster c(4);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 25; ++t) {
        const std::size_t k = 1 + rng() % 4;
        const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 30);
        std::vector<std::int64_t> heights;
        std::int64_t m = 0;
        for (std::size_t i = 0; i < k; ++i) {
            heights.push_back(1 + static_cast<std::int64_t>(rng() % 50));
            m += heights.back();
        }
        auto x = random_block(m, n, 1.0, rng());
        auto f = c.split(x, heights);
        auto v = random_block(n, 1, 1.0, rng());
        auto u = random_block(m, 1, 1.0, rng());
        EXPECT_LE(max_abs_diff(fed_matvec(f, v), kernels::matmul(x, v)), 1e-12);

        std::vector<std::uint64_t> before;
        for (std::size_t i = 0; i < k; ++i) before.push_back(c.fed->client(c.endpoint(i))->bytes_sent(MsgType::Put));
        EXPECT_LE(max_abs_diff(fed_vecmat(u, f), kernels::matmul(kernels::transpose(u), x)), 1e-12);
        for (std::size_t i = 0; i < k; ++i) {
            const auto sent = c.fed->client(c.endpoint(i))->bytes_sent(MsgType::Put) - before[i];
            EXPECT_EQ(sent, kHeaderSize + 24 + 8 * static_cast<std::uint64_t>(heights[i]));
        }
        release(f);
    }
}

} // namespace
} // namespace tessera::fed
