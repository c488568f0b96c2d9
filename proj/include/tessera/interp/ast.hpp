// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Abstract syntax of the scripting language.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tessera/core/error.hpp"
#include "tessera/core/value_type.hpp"

namespace tessera::interp {

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, int line, int column)
        : Error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + what), line_(line),
          column_(column) {}
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Semantic error detected before execution (undefined names, bad arity).
class CompileError : public Error {
public:
    CompileError(const std::string& what, int line) : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

/// One dimension of an index expression: empty (all), a single position or lo:hi.
struct IndexSpec {
    ExprPtr lo;
    ExprPtr hi; // null for a single position
    bool all() const noexcept { return !lo; }
};

struct Expr {
    enum class Kind { Literal, Ident, Unary, Binary, Call, Index };

    Kind kind = Kind::Literal;
    int line = 0;
    int column = 0;
    Scalar value;              // Literal
    std::string name;          // Ident, Call, operator symbol for Unary/Binary
    std::vector<ExprPtr> args; // operands, call arguments, or the indexed target
    std::vector<std::string> arg_names; // Call: "" for positional arguments
    std::vector<IndexSpec> index;       // Index: one or two dimensions
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;
using StmtList = std::vector<StmtPtr>;

struct Stmt {
    enum class Kind { Assign, MultiAssign, IndexAssign, Expr, If, For, While };

    Kind kind = Kind::Expr;
    int line = 0;
    std::vector<std::string> targets; // Assign (1), MultiAssign (n), For (loop variable)
    ExprPtr target;                   // IndexAssign: the Index expression
    ExprPtr expr;                     // right-hand side or condition
    ExprPtr from, to, by;             // For bounds (by may be null)
    StmtList body;
    StmtList orelse;
};

struct Param {
    std::string name;
    std::string type; // as written, informational only
    ExprPtr default_value;
};

struct Function {
    std::string name;
    std::vector<Param> params;
    std::vector<Param> outputs;
    StmtList body;
    int line = 0;
};

struct Program {
    StmtList body;
    std::map<std::string, Function> functions;
};

ExprPtr make_literal(Scalar v, int line = 0, int column = 0);
ExprPtr make_ident(std::string name, int line = 0, int column = 0);
ExprPtr make_call(std::string name, std::vector<ExprPtr> args, int line = 0, int column = 0);

/// Structural equality ignoring source positions.
bool equal(const Expr& a, const Expr& b);
bool equal(const StmtList& a, const StmtList& b);
bool equal(const Program& a, const Program& b);

/// Parses a script. `nvargs` bind `$name` placeholders.
Program parse(std::string_view source, const std::map<std::string, std::string>& nvargs = {});

/// Script text that parses back to an equal program.
std::string unparse(const Program& p);
std::string unparse(const Expr& e);

/// Literal for a command-line value: integer, float, TRUE/FALSE, else string.
Scalar literal_from_text(std::string_view text);

} // namespace tessera::interp
