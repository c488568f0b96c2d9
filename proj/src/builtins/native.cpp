// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include "tessera/builtins/builtins.hpp"
#include "tessera/core/kernels.hpp"

namespace tessera::builtins {

double aic(double rss, double m, double p) {
    if (m <= 0) throw Error("aic needs m > 0");
    return m * std::log(std::max(rss, 1e-300) / m) + 2.0 * (p + 1.0);
}

namespace {

enum class CellClass { Empty = 0, Boolean = 1, Int = 2, Float = 3, String = 4 };

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return std::tolower(x) == std::tolower(y); });
}

CellClass classify(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.empty()) return CellClass::Empty;
    if (iequals(s, "true") || iequals(s, "false")) return CellClass::Boolean;
    std::string_view body = s.front() == '+' ? s.substr(1) : s;
    if (body.empty()) return CellClass::String;
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), i);
    if (ec == std::errc() && p == body.data() + body.size()) return CellClass::Int;
    // integers beyond 64 bits fall through to FP64
    double d = 0;
    auto [q, ec2] = std::from_chars(body.data(), body.data() + body.size(), d);
    if ((ec2 == std::errc() || ec2 == std::errc::result_out_of_range) && q == body.data() + body.size())
        return CellClass::Float;
    return CellClass::String;
}

} // namespace

std::vector<ValueType> detect_schema(const DataTensorBlock& frame) {
    if (frame.dims().size() != 2) throw ShapeError("detectSchema needs a rank-2 frame");
    std::vector<ValueType> out;
    for (std::int64_t j = 0; j < frame.cols(); ++j) {
        const Cells col = frame.column(j);
        CellClass widest = CellClass::Empty;
        bool boolean = false, numeric = false;
        for (std::size_t i = 0; i < col.size(); ++i) {
            CellClass c = col.vtype() == ValueType::STRING ? classify(col.str(i)) : classify(col.scalar(i).to_display());
            if (col.vtype() == ValueType::BOOLEAN) c = CellClass::Boolean;
            boolean |= c == CellClass::Boolean;
            numeric |= c == CellClass::Int || c == CellClass::Float;
            widest = std::max(widest, c);
        }
        if (boolean && numeric) widest = CellClass::String; // no narrower type parses both
        switch (widest) {
        case CellClass::Boolean: out.push_back(ValueType::BOOLEAN); break;
        case CellClass::Int: out.push_back(ValueType::INT64); break;
        case CellClass::Float: out.push_back(ValueType::FP64); break;
        default: out.push_back(ValueType::STRING); break;
        }
    }
    return out;
}

Generated gen_data(std::int64_t rows, std::int64_t cols, double sparsity, std::uint64_t seed) {
    if (rows < 1 || cols < 1) throw ShapeError("genData needs positive dimensions");
    if (!(sparsity > 0.0 && sparsity <= 1.0)) throw Error("genData sparsity must lie in (0, 1]");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> w(static_cast<std::size_t>(cols));
    for (auto& v : w) v = 2.0 * u(gen) - 1.0;

    std::vector<double> y(static_cast<std::size_t>(rows), 0.0);
    BasicTensorBlock x;
    if (sparsity >= 1.0) {
        std::vector<double> cells(static_cast<std::size_t>(rows * cols));
        for (std::int64_t i = 0; i < rows; ++i)
            for (std::int64_t j = 0; j < cols; ++j) {
                const double v = u(gen);
                cells[static_cast<std::size_t>(i * cols + j)] = v;
                y[static_cast<std::size_t>(i)] += v * w[static_cast<std::size_t>(j)];
            }
        x = BasicTensorBlock::fp64({rows, cols}, std::move(cells));
    } else {
        std::vector<BasicTensorBlock::Entry> entries;
        entries.reserve(static_cast<std::size_t>(static_cast<double>(rows * cols) * sparsity * 1.1));
        for (std::int64_t i = 0; i < rows; ++i)
            for (std::int64_t j = 0; j < cols; ++j)
                if (u(gen) < sparsity) {
                    double v = u(gen);
                    if (v == 0.0) v = 0.5; // keep retained cells nonzero
                    entries.push_back({{i, j}, v});
                    y[static_cast<std::size_t>(i)] += v * w[static_cast<std::size_t>(j)];
                }
        x = BasicTensorBlock::from_entries({rows, cols}, ValueType::FP64, std::move(entries)).with_auto_layout();
    }
    for (auto& v : y) v += 0.01 * noise(gen);
    return {std::move(x), BasicTensorBlock::fp64({rows, 1}, std::move(y))};
}

} // namespace tessera::builtins
