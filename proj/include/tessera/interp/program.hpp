// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Compiled form of a script: statement blocks holding instruction sequences.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tessera/interp/ast.hpp"

namespace tessera::interp {

struct Operand {
    enum class Kind : std::uint8_t { None, Var, Literal };
    Kind kind = Kind::None;
    std::string name;
    Scalar value;

    static Operand var(std::string n) { return {Kind::Var, std::move(n), {}}; }
    static Operand lit(Scalar v) { return {Kind::Literal, {}, std::move(v)}; }
    static Operand none() { return {}; }
};

struct Instruction {
    std::string opcode;
    std::vector<Operand> inputs;
    std::vector<std::string> outputs;
    std::string callee; // fcall only
    int line = 0;
    /// tsmm/matmul over a row bind may be evaluated part by part.
    bool decompose = false;
};

struct Block {
    enum class Kind { Basic, If, For, While };
    Kind kind = Kind::Basic;
    int line = 0;
    /// Basic: the statements; If/While: predicate; For: bound expressions.
    std::vector<Instruction> instructions;
    Operand cond, from, to, by;
    std::string var;
    std::string site; // loops: static site id for lineage deduplication
    std::vector<Block> body;
    std::vector<Block> orelse;
};

struct CompiledFunction {
    std::string name;
    std::vector<std::string> params;
    std::vector<Operand> defaults; // None marks a required parameter
    std::vector<std::string> outputs;
    std::vector<Block> body;
};

struct CompiledProgram {
    std::vector<Block> main;
    std::map<std::string, CompiledFunction> functions;
};

struct CompileOptions {
    bool dead_code = true;
    bool constant_branches = true;
    bool inline_functions = true;
    bool tsmm_rewrite = true;
    bool cv_rewrite = true;
};

/// Names of builtins callable from scripts.
bool is_builtin(const std::string& name);

/// Copy sharing no nodes with `p`.
Program deep_copy(const Program& p);

/// Applies the enabled AST rewrites in place.
void rewrite(Program& p, const CompileOptions& opts, const std::optional<std::set<std::string>>& keep);

/// Lowers a program (plus library functions it references) to blocks.
/// `defined` lists variables bound before the script starts; `keep`
/// names main-scope variables that must survive dead-code elimination
/// (nullopt keeps every variable).
CompiledProgram compile(Program program, const CompileOptions& opts, const std::set<std::string>& defined = {},
                        const std::optional<std::set<std::string>>& keep = std::nullopt);

} // namespace tessera::interp
