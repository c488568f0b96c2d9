// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "tessera/core/error.hpp"
#include "tessera/core/parallel.hpp"
#include "tessera/io/io.hpp"

namespace tessera::io {
namespace {

namespace fs = std::filesystem;
using tessera::testing::random_block;

class IoTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("tessera_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write_with_sidecar(const std::string& name, const std::string& body, const std::string& mtd) {
        write_file(path(name), body);
        write_file(sidecar_path(path(name)), mtd);
    }

    fs::path dir_;
};

bool bit_equal(const BasicTensorBlock& a, const BasicTensorBlock& b) {
    const auto x = a.to_dense_f64(), y = b.to_dense_f64();
    return a.dims() == b.dims() && x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

TEST(MetadataTest, RoundTrip) {
    Metadata md;
    md.rows = 3;
    md.cols = 2;
    md.vtype = ValueType::INT64;
    md.header = true;
    md.delimiter = '\t';
    md.nnz = 4;
    const auto back = parse_metadata(format_metadata(md));
    EXPECT_EQ(back.rows, 3);
    EXPECT_EQ(back.vtype, ValueType::INT64);
    EXPECT_TRUE(back.header);
    EXPECT_EQ(back.delimiter, '\t');
    EXPECT_EQ(back.nnz, 4);
    EXPECT_THROW(parse_metadata("rows: x\ncols: 2\n"), IoError);
    EXPECT_THROW(parse_metadata("cols: 2\n"), IoError);
}

TEST_F(IoTest, ReadSimpleCsv) {
    write_with_sidecar("a.csv", "1.5,2\n3,4", "rows: 2\ncols: 2\nvalue_type: FP64\n");
    auto d = read(path("a.csv"));
    ASSERT_TRUE(std::holds_alternative<TensorPtr>(d));
    EXPECT_EQ(*std::get<TensorPtr>(d), BasicTensorBlock::matrix(2, 2, {1.5, 2, 3, 4}));
}

TEST_F(IoTest, RowCountMismatchNamesBothCounts) {
    write_with_sidecar("b.csv", "1,2\n3,4\n", "rows: 3\ncols: 2\nvalue_type: FP64\n");
    try {
        read(path("b.csv"));
        FAIL();
    } catch (const IoError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find('3'), std::string::npos);
        EXPECT_NE(msg.find('2'), std::string::npos);
    }
}

TEST_F(IoTest, MissingSidecarAndBadCell) {
    write_file(path("c.csv"), "1,2\n");
    EXPECT_THROW(read(path("c.csv")), IoError);
    write_with_sidecar("d.csv", "1,zz\n", "rows: 1\ncols: 2\nvalue_type: FP64\n");
    EXPECT_THROW(read(path("d.csv")), IoError);
}

TEST_F(IoTest, ParallelReadEqualsSerialRead) {
    auto x = random_block(100000, 4, 0.7, 5);
    write_csv(x, path("big.csv"));
    const int before = num_threads();
    set_num_threads(1);
    auto one = std::get<TensorPtr>(read(path("big.csv")));
    set_num_threads(8);
    auto eight = std::get<TensorPtr>(read(path("big.csv")));
    set_num_threads(before);
    EXPECT_TRUE(bit_equal(*one, *eight));
    EXPECT_TRUE(bit_equal(*one, x));
}

TEST_F(IoTest, CsvRoundTripIsBitExact) {
    std::mt19937_64 rng(1);
    std::vector<double> v;
    for (int i = 0; i < 200; ++i) v.push_back(std::ldexp(static_cast<double>(rng() >> 11), -static_cast<int>(rng() % 80)) - 1e5);
    v.push_back(1e-310);
    v.push_back(-0.0);
    v.push_back(1.0 / 3.0);
    v.push_back(0.1 + 0.2);
    auto x = BasicTensorBlock::matrix(static_cast<std::int64_t>(v.size()) / 2, 2, v);
    write_csv(x, path("r.csv"), CsvOptions{';', true});
    EXPECT_TRUE(bit_equal(*std::get<TensorPtr>(read(path("r.csv"))), x));
}

TEST_F(IoTest, TypedRoundTrips) {
    auto ints = BasicTensorBlock::from_cells({2, 2}, Cells(std::vector<std::int64_t>{1, -2, 9007199254740993LL, 0}));
    write_csv(ints, path("i.csv"));
    EXPECT_EQ(*std::get<TensorPtr>(read(path("i.csv"))), ints);
    auto bools = BasicTensorBlock::from_cells({1, 3}, Cells(std::vector<std::uint8_t>{1, 0, 1}));
    write_csv(bools, path("b.csv"));
    EXPECT_EQ(*std::get<TensorPtr>(read(path("b.csv"))), bools);
}

TEST_F(IoTest, FrameWithQuotedStrings) {
    auto f = DataTensorBlock::from_columns(
        3, {Cells(std::vector<std::string>{"a", "with,comma", "say \"hi\""}), Cells(std::vector<double>{1, 2, 3})});
    write_csv(f, path("f.csv"), CsvOptions{',', true});
    auto d = read(path("f.csv"));
    ASSERT_TRUE(std::holds_alternative<FramePtr>(d));
    const auto& back = *std::get<FramePtr>(d);
    EXPECT_EQ(back.schema(), f.schema());
    for (std::int64_t i = 0; i < 3; ++i)
        for (std::int64_t j = 0; j < 2; ++j) EXPECT_EQ(back.get(i, j), f.get(i, j));
}

TEST_F(IoTest, MixedSidecarYieldsStringFrame) {
    write_with_sidecar("m.csv", "x,1\ny,2\n", "rows: 2\ncols: 2\nvalue_type: MIXED\n");
    auto d = read(path("m.csv"));
    ASSERT_TRUE(std::holds_alternative<FramePtr>(d));
    EXPECT_EQ(std::get<FramePtr>(d)->schema(), (std::vector<ValueType>{ValueType::STRING, ValueType::STRING}));
}

TEST_F(IoTest, EmptyBlockRejectedAtWrite) {
    EXPECT_THROW(write_csv(BasicTensorBlock::zeros({0, 0}), path("e.csv")), IoError);
}

TEST_F(IoTest, BinaryRoundTripPreservesLayout) {
    auto sparse = random_block(300, 200, 0.02, 9).with_auto_layout();
    ASSERT_TRUE(sparse.is_sparse());
    write_binary(sparse, path("s.bin"));
    auto back = std::get<TensorPtr>(read(path("s.bin")));
    EXPECT_TRUE(back->is_sparse());
    EXPECT_EQ(back->nnz(), sparse.nnz());
    EXPECT_EQ(*back, sparse);

    auto dense = random_block(20, 30, 1.0, 2);
    EXPECT_TRUE(bit_equal(decode_binary(encode_binary(dense)), dense));
    std::vector<double> cells(24, 1.5);
    auto cube = BasicTensorBlock::fp64({2, 3, 4}, cells);
    EXPECT_EQ(decode_binary(encode_binary(cube)), cube);
    auto strs = BasicTensorBlock::from_cells({1, 2}, Cells(std::vector<std::string>{"a", ""}));
    EXPECT_EQ(decode_binary(encode_binary(strs)), strs);
}

TEST(BinaryFormatTest, HeaderLayout) {
    const std::string b = encode_binary(BasicTensorBlock::matrix(2, 1, {1, 2}));
    EXPECT_EQ(b.substr(0, 4), "DSTB");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[6], 2);
    EXPECT_EQ(b.size(), 4u + 3 + 16 + 1 + 16);
    EXPECT_THROW(decode_binary(b.substr(0, 10)), IoError);
    EXPECT_THROW(decode_binary("XXXX" + b.substr(4)), IoError);
}

} // namespace
} // namespace tessera::io
