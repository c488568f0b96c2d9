// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>

#include "executor.hpp"
#include "tessera/builtins/builtins.hpp"
#include "tessera/core/kernels.hpp"
#include "tessera/io/io.hpp"

namespace tessera::interp {

namespace {

using kernels::BinaryOp;
using kernels::UnaryOp;

using Args = std::vector<Value>;

bool present(const Args& in, std::size_t i) {
    return i < in.size() && !std::holds_alternative<std::monostate>(in[i]);
}

Scalar scalar_arg(const Args& in, std::size_t i, const std::string& op) {
    if (!present(in, i)) throw Error(op + ": missing argument " + std::to_string(i + 1));
    if (const auto* t = std::get_if<TensorPtr>(&in[i]); t && (*t)->numel() == 1) return (*t)->scalar_at(0);
    return as_scalar(in[i], op.c_str());
}

double num(const Args& in, std::size_t i, const std::string& op, double fallback) {
    return present(in, i) ? scalar_arg(in, i, op).as_double() : fallback;
}

std::int64_t int_arg(const Args& in, std::size_t i, const std::string& op) { return scalar_arg(in, i, op).as_int(); }

TensorPtr tensor_arg(const Args& in, std::size_t i, const std::string& op) {
    if (!present(in, i)) throw Error(op + ": missing argument " + std::to_string(i + 1));
    if (const auto* s = std::get_if<Scalar>(&in[i])) {
        if (s->is_string()) return share(BasicTensorBlock::from_cells({1, 1}, Cells(std::vector<std::string>{s->as_string()})));
        return share(BasicTensorBlock::fp64({1, 1}, {s->as_double()}));
    }
    return as_tensor(in[i], op.c_str());
}

std::optional<BinaryOp> binary_op(const std::string& op) {
    static const std::map<std::string, BinaryOp> ops{
        {"+", BinaryOp::Add},  {"-", BinaryOp::Sub},  {"*", BinaryOp::Mul},   {"/", BinaryOp::Div},
        {"^", BinaryOp::Pow},  {"%%", BinaryOp::Mod}, {"%/%", BinaryOp::IntDiv}, {"<", BinaryOp::Lt},
        {"<=", BinaryOp::Le},  {">", BinaryOp::Gt},   {">=", BinaryOp::Ge},   {"==", BinaryOp::Eq},
        {"!=", BinaryOp::Ne},  {"&", BinaryOp::And},  {"&&", BinaryOp::And},  {"|", BinaryOp::Or},
        {"||", BinaryOp::Or},  {"min", BinaryOp::Min}, {"max", BinaryOp::Max}};
    auto it = ops.find(op);
    if (it == ops.end()) return std::nullopt;
    return it->second;
}

std::optional<UnaryOp> unary_op(const std::string& op) {
    static const std::map<std::string, UnaryOp> ops{
        {"u-", UnaryOp::Neg},  {"!", UnaryOp::Not},       {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs},
        {"exp", UnaryOp::Exp}, {"log", UnaryOp::Log},     {"floor", UnaryOp::Floor}, {"ceil", UnaryOp::Ceil},
        {"round", UnaryOp::Round}};
    auto it = ops.find(op);
    if (it == ops.end()) return std::nullopt;
    return it->second;
}

bool is_comparison(BinaryOp op) {
    return op == BinaryOp::Lt || op == BinaryOp::Le || op == BinaryOp::Gt || op == BinaryOp::Ge ||
           op == BinaryOp::Eq || op == BinaryOp::Ne;
}

Scalar scalar_binary(BinaryOp op, const std::string& sym, const Scalar& a, const Scalar& b) {
    if (a.is_string() || b.is_string()) {
        if (op == BinaryOp::Add) return Scalar::string(a.to_display() + b.to_display());
        if (op == BinaryOp::Eq) return Scalar::boolean(a.to_display() == b.to_display());
        if (op == BinaryOp::Ne) return Scalar::boolean(a.to_display() != b.to_display());
        throw TypeError("operator '" + sym + "' is not defined for strings");
    }
    if (is_comparison(op) || op == BinaryOp::And || op == BinaryOp::Or)
        return Scalar::boolean(kernels::apply(op, a.as_double(), b.as_double()) != 0.0);
    const bool ints = (a.is_integral() || a.vtype() == ValueType::BOOLEAN) &&
                      (b.is_integral() || b.vtype() == ValueType::BOOLEAN);
    if (ints) {
        const std::int64_t x = a.as_int(), y = b.as_int();
        switch (op) {
        case BinaryOp::Add: return Scalar::int64(x + y);
        case BinaryOp::Sub: return Scalar::int64(x - y);
        case BinaryOp::Mul: return Scalar::int64(x * y);
        case BinaryOp::Min: return Scalar::int64(std::min(x, y));
        case BinaryOp::Max: return Scalar::int64(std::max(x, y));
        case BinaryOp::Mod:
            if (y != 0) return Scalar::int64(((x % y) + y) % y);
            break;
        case BinaryOp::IntDiv:
            if (y != 0) {
                std::int64_t q = x / y;
                if ((x % y != 0) && ((x < 0) != (y < 0))) --q;
                return Scalar::int64(q);
            }
            break;
        default: break;
        }
    }
    return Scalar::fp64(kernels::apply(op, a.as_double(), b.as_double()));
}

Value binary(const std::string& sym, BinaryOp op, const Args& in) {
    if (is_scalar(in[0]) && is_scalar(in[1]))
        return scalar_binary(op, sym, std::get<Scalar>(in[0]), std::get<Scalar>(in[1]));
    if (is_scalar(in[1])) return share(kernels::elementwise(op, *as_tensor(in[0], sym.c_str()), std::get<Scalar>(in[1]).as_double()));
    if (is_scalar(in[0])) return share(kernels::elementwise(op, std::get<Scalar>(in[0]).as_double(), *as_tensor(in[1], sym.c_str())));
    return share(kernels::elementwise(op, *as_tensor(in[0], sym.c_str()), *as_tensor(in[1], sym.c_str())));
}

Value unary(const std::string& sym, UnaryOp op, const Value& v) {
    if (const auto* s = std::get_if<Scalar>(&v)) {
        if (op == UnaryOp::Not) return Scalar::boolean(!truthy(v));
        if (op == UnaryOp::Neg && s->is_integral()) return Scalar::int64(-s->as_int());
        if (op == UnaryOp::Abs && s->is_integral()) return Scalar::int64(std::llabs(s->as_int()));
        return Scalar::fp64(kernels::apply(op, s->as_double()));
    }
    return share(kernels::unary(op, *as_tensor(v, sym.c_str())));
}

kernels::Range one_based(const Args& in, std::size_t lo, std::size_t hi, std::int64_t extent, const char* dim) {
    if (!present(in, lo)) return {0, extent};
    const std::int64_t a = int_arg(in, lo, "index");
    const std::int64_t b = present(in, hi) ? int_arg(in, hi, "index") : a;
    if (a < 1 || b > extent || a > b)
        throw ShapeError(std::string(dim) + " index " + std::to_string(a) + ":" + std::to_string(b) +
                         " out of range 1:" + std::to_string(extent));
    return {a - 1, b};
}

Value right_index(const Args& in) {
    if (const auto* s = std::get_if<Scalar>(&in[0])) {
        one_based(in, 1, 2, 1, "row");
        one_based(in, 3, 4, 1, "column");
        return *s;
    }
    const auto& x = *as_tensor(in[0], "index");
    if (x.rank() != 2) throw ShapeError("indexing needs a matrix, got " + shape_string(x.dims()));
    const auto rows = one_based(in, 1, 2, x.rows(), "row");
    const auto cols = one_based(in, 3, 4, x.cols(), "column");
    if (rows.begin == 0 && rows.end == x.rows() && cols.begin == 0 && cols.end == x.cols()) return in[0];
    return share(kernels::slice(x, {rows, cols}));
}

Value left_index(const Args& in) {
    const auto& x = *as_tensor(in[0], "left index");
    const auto rows = one_based(in, 2, 3, x.rows(), "row");
    const auto cols = one_based(in, 4, 5, x.cols(), "column");
    if (const auto* s = std::get_if<Scalar>(&in[1]))
        return share(kernels::assign_region(x, rows, cols,
                                            BasicTensorBlock::filled({rows.width(), cols.width()}, s->as_double())));
    return share(kernels::assign_region(x, rows, cols, *as_tensor(in[1], "left index")));
}

BasicTensorBlock uniform(std::int64_t rows, std::int64_t cols, double lo, double hi, double sparsity,
                         std::uint64_t seed) {
    if (rows < 1 || cols < 1) throw ShapeError("rand needs positive dimensions");
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw Error("rand sparsity must lie in [0, 1]");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (sparsity >= 1.0) {
        std::vector<double> v(static_cast<std::size_t>(rows * cols));
        for (auto& x : v) x = lo + (hi - lo) * u(gen);
        return BasicTensorBlock::fp64({rows, cols}, std::move(v));
    }
    std::vector<BasicTensorBlock::Entry> entries;
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < cols; ++j)
            if (u(gen) < sparsity) entries.push_back({{i, j}, lo + (hi - lo) * u(gen)});
    return BasicTensorBlock::from_entries({rows, cols}, ValueType::FP64, std::move(entries)).with_auto_layout();
}

BasicTensorBlock sequence(double from, double to, std::optional<double> by_arg) {
    const double by = by_arg.value_or(from <= to ? 1.0 : -1.0);
    if (by == 0.0 || (to - from) / by < 0) throw Error("seq: step does not reach the end point");
    const auto n = static_cast<std::int64_t>(std::floor((to - from) / by + 1e-10)) + 1;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = from + static_cast<double>(i) * by;
    return BasicTensorBlock::fp64({n, 1}, std::move(v));
}

Value bind(kernels::Axis axis, const Args& in) {
    std::vector<TensorPtr> parts;
    if (in.size() == 1 && is_list(in[0])) {
        for (const auto& item : std::get<ListPtr>(in[0])->items) parts.push_back(tensor_arg({item}, 0, "bind"));
    } else {
        for (std::size_t i = 0; i < in.size(); ++i) parts.push_back(tensor_arg(in, i, "bind"));
    }
    std::vector<const BasicTensorBlock*> ptrs;
    for (const auto& p : parts) ptrs.push_back(p.get());
    return share(kernels::bind(axis, ptrs));
}

DataTensorBlock frame_of(const Value& v) {
    if (const auto* f = std::get_if<FramePtr>(&v)) return **f;
    const auto& t = *as_tensor(v, "detectSchema");
    if (t.rank() != 2) throw ShapeError("detectSchema needs rank 2");
    const Cells cells = t.to_dense_cells();
    std::vector<Cells> cols;
    for (std::int64_t j = 0; j < t.cols(); ++j) {
        Cells c(t.vtype(), 0);
        for (std::int64_t i = 0; i < t.rows(); ++i) c.push_from(cells, static_cast<std::size_t>(i * t.cols() + j));
        cols.push_back(std::move(c));
    }
    return DataTensorBlock::from_columns(t.rows(), std::move(cols));
}

std::int64_t file_bytes(const std::string& path) {
    std::error_code ec;
    const auto n = std::filesystem::file_size(path, ec);
    return ec ? 0 : static_cast<std::int64_t>(n);
}

Value aggregate(const std::string& op, const Args& in) {
    static const std::map<std::string, kernels::AggKind> kinds{{"sum", kernels::AggKind::Sum},
                                                              {"mean", kernels::AggKind::Mean},
                                                              {"min", kernels::AggKind::Min},
                                                              {"max", kernels::AggKind::Max},
                                                              {"rowSums", kernels::AggKind::RowSums},
                                                              {"colSums", kernels::AggKind::ColSums}};
    const auto kind = kinds.at(op);
    if (op == "rowSums" || op == "colSums") return share(kernels::aggregate_vector(kind, *tensor_arg(in, 0, op)));
    if (const auto* s = std::get_if<Scalar>(&in[0])) return *s;
    return Scalar::fp64(kernels::aggregate(kind, *as_tensor(in[0], op.c_str())));
}

} // namespace

std::vector<Value> evaluate(const std::string& op, const std::vector<Value>& in, OpContext& ctx) {
    if (auto b = binary_op(op); b && in.size() == 2 && present(in, 1)) return {binary(op, *b, in)};
    if (auto u = unary_op(op)) return {unary(op, *u, in.at(0))};
    if (op == "sum" || op == "mean" || op == "min" || op == "max" || op == "rowSums" || op == "colSums")
        return {aggregate(op, in)};
    if (op == "matmul") return {share(kernels::matmul(*tensor_arg(in, 0, op), *tensor_arg(in, 1, op)))};
    if (op == "tsmm") return {share(kernels::tsmm(*tensor_arg(in, 0, op)))};
    if (op == "transpose") {
        if (is_scalar(in[0])) return {in[0]};
        return {share(kernels::transpose(*as_tensor(in[0], "t")))};
    }
    if (op == "solve") return {share(kernels::solve(*tensor_arg(in, 0, op), *tensor_arg(in, 1, op)))};
    if (op == "diag") return {share(kernels::diag(*tensor_arg(in, 0, op)))};
    if (op == "rix") return {right_index(in)};
    if (op == "lix") return {left_index(in)};
    if (op == "rbind") return {bind(kernels::Axis::Rows, in)};
    if (op == "cbind") return {bind(kernels::Axis::Cols, in)};
    if (op == "nrow" || op == "ncol") {
        const bool rows = op == "nrow";
        if (const auto* t = std::get_if<TensorPtr>(&in[0])) return {Scalar::int64(rows ? (*t)->rows() : (*t)->cols())};
        if (const auto* f = std::get_if<FramePtr>(&in[0])) return {Scalar::int64(rows ? (*f)->rows() : (*f)->cols())};
        if (is_scalar(in[0])) return {Scalar::int64(1)};
        throw TypeError(op + " expects a matrix, got " + type_name(in[0]));
    }
    if (op == "length") {
        if (const auto* l = std::get_if<ListPtr>(&in[0])) return {Scalar::int64(static_cast<std::int64_t>((*l)->items.size()))};
        if (const auto* t = std::get_if<TensorPtr>(&in[0])) return {Scalar::int64((*t)->numel())};
        if (const auto* f = std::get_if<FramePtr>(&in[0])) return {Scalar::int64((*f)->rows() * (*f)->cols())};
        return {Scalar::int64(1)};
    }
    if (op == "seq") {
        std::optional<double> by;
        if (present(in, 2)) by = num(in, 2, op, 1.0);
        return {share(sequence(num(in, 0, op, 0), num(in, 1, op, 0), by))};
    }
    if (op == "matrix") {
        const std::int64_t rows = int_arg(in, 1, op), cols = int_arg(in, 2, op);
        if (rows < 1 || cols < 1) throw ShapeError("matrix needs positive dimensions");
        if (const auto* s = std::get_if<Scalar>(&in[0])) {
            if (s->as_double() == 0.0) return {share(BasicTensorBlock::zeros({rows, cols}))};
            return {share(BasicTensorBlock::filled({rows, cols}, s->as_double()))};
        }
        const auto& t = *as_tensor(in[0], "matrix");
        if (t.numel() != rows * cols)
            throw ShapeError("matrix: " + std::to_string(t.numel()) + " cells do not fill " + std::to_string(rows) +
                             "x" + std::to_string(cols));
        return {share(BasicTensorBlock::from_cells({rows, cols}, t.to_dense_cells()).with_auto_layout())};
    }
    if (op == "rand") {
        return {share(uniform(int_arg(in, 0, op), int_arg(in, 1, op), num(in, 2, op, 0.0), num(in, 3, op, 1.0),
                              num(in, 4, op, 1.0), static_cast<std::uint64_t>(int_arg(in, 5, op))))};
    }
    if (op == "permutation") {
        // row i of P %*% X is row perm[i] of X
        const std::int64_t n = int_arg(in, 0, op);
        if (n < 1) throw ShapeError("permutation needs n >= 1");
        std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 gen(static_cast<std::uint64_t>(int_arg(in, 1, op)));
        for (std::int64_t i = n - 1; i > 0; --i)
            std::swap(perm[static_cast<std::size_t>(i)],
                      perm[std::uniform_int_distribution<std::int64_t>(0, i)(gen)]);
        std::vector<BasicTensorBlock::Entry> entries;
        for (std::int64_t i = 0; i < n; ++i) entries.push_back({{i, perm[static_cast<std::size_t>(i)]}, 1.0});
        return {share(BasicTensorBlock::from_entries({n, n}, ValueType::FP64, std::move(entries)).with_auto_layout())};
    }
    if (op == "genData") {
        auto g = builtins::gen_data(int_arg(in, 0, op), int_arg(in, 1, op), num(in, 2, op, 1.0),
                                    static_cast<std::uint64_t>(int_arg(in, 3, op)));
        return {share(std::move(g.x)), share(std::move(g.y))};
    }
    if (op == "read") {
        const std::string path = scalar_arg(in, 0, op).as_string();
        io::Dataset d = io::read(path);
        ctx.stats.bytes_read += file_bytes(path);
        if (const auto* t = std::get_if<TensorPtr>(&d)) return {*t};
        return {std::get<FramePtr>(d)};
    }
    if (op == "write") {
        const std::string path = scalar_arg(in, 1, op).as_string();
        const std::string format = present(in, 2) ? scalar_arg(in, 2, op).as_string() : "csv";
        if (format != "csv" && format != "binary") throw Error("write: unknown format '" + format + "'");
        if (const auto* f = std::get_if<FramePtr>(&in[0])) {
            if (format != "csv") throw Error("write: frames are written as csv");
            io::write_csv(**f, path);
        } else {
            const auto t = tensor_arg(in, 0, op);
            if (format == "csv")
                io::write_csv(*t, path);
            else
                io::write_binary(*t, path);
        }
        ctx.stats.bytes_written += file_bytes(path);
        return {Value{}};
    }
    if (op == "print") {
        ctx.out << to_display(in[0]) << '\n';
        return {Value{}};
    }
    if (op == "stop") throw Error(to_display(in[0]));
    if (op == "as.scalar") {
        if (is_scalar(in[0])) return {in[0]};
        const auto& t = *as_tensor(in[0], "as.scalar");
        if (t.numel() != 1) throw ShapeError("as.scalar needs a 1x1 matrix, got " + shape_string(t.dims()));
        return {t.scalar_at(0)};
    }
    if (op == "as.matrix") {
        if (const auto* f = std::get_if<FramePtr>(&in[0])) return {share(kernels::as_matrix(**f, {0, (*f)->cols()}))};
        return {tensor_arg(in, 0, op)};
    }
    if (op == "as.double") {
        if (const auto* s = std::get_if<Scalar>(&in[0])) return {Scalar::fp64(s->as_double())};
        return {share(as_tensor(in[0], "as.double")->to_fp64())};
    }
    if (op == "as.integer") return {Scalar::int64(static_cast<std::int64_t>(std::trunc(scalar_arg(in, 0, op).as_double())))};
    if (op == "toString") return {Scalar::string(to_display(in[0]))};
    if (op == "aic") return {Scalar::fp64(builtins::aic(num(in, 0, op, 0), num(in, 1, op, 0), num(in, 2, op, 0)))};
    if (op == "detectSchema") {
        const auto types = builtins::detect_schema(frame_of(in[0]));
        std::vector<std::string> names;
        for (auto t : types) names.emplace_back(to_string(t));
        const auto n = static_cast<std::int64_t>(names.size());
        return {share(BasicTensorBlock::from_cells({1, n}, Cells(std::move(names))))};
    }
    if (op == "collect") return {in[0]};
    throw Error("unsupported operation '" + op + "' for " + (in.empty() ? std::string("no operands") : type_name(in[0])));
}

} // namespace tessera::interp
