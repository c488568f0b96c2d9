// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>

#include "tessera/interp/ast.hpp"

namespace tessera::interp {

namespace {

bool equal_ptr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return equal(*a, *b);
}

bool equal_stmt(const Stmt& a, const Stmt& b) {
    return a.kind == b.kind && a.targets == b.targets && equal_ptr(a.target, b.target) && equal_ptr(a.expr, b.expr) &&
           equal_ptr(a.from, b.from) && equal_ptr(a.to, b.to) && equal_ptr(a.by, b.by) && equal(a.body, b.body) &&
           equal(a.orelse, b.orelse);
}

bool equal_params(const std::vector<Param>& a, const std::vector<Param>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].name != b[i].name || a[i].type != b[i].type || !equal_ptr(a[i].default_value, b[i].default_value))
            return false;
    return true;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        case '\0': out += "\\0"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

void write_expr(std::ostream& out, const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Literal:
        switch (e.value.vtype()) {
        case ValueType::STRING: out << quote(e.value.as_string()); break;
        case ValueType::BOOLEAN: out << (e.value.as_bool() ? "TRUE" : "FALSE"); break;
        case ValueType::INT64:
        case ValueType::INT32:
            if (e.value.as_int() < 0)
                out << "(" << e.value.as_int() << ")";
            else
                out << e.value.as_int();
            break;
        default: {
            const double v = e.value.as_double();
            std::string text = format_double(v);
            if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
            if (std::signbit(v))
                out << "(" << text << ")";
            else
                out << text;
        }
        }
        break;
    case Expr::Kind::Ident: out << e.name; break;
    case Expr::Kind::Unary:
        out << "(" << e.name;
        write_expr(out, *e.args[0]);
        out << ")";
        break;
    case Expr::Kind::Binary:
        out << "(";
        write_expr(out, *e.args[0]);
        out << " " << e.name << " ";
        write_expr(out, *e.args[1]);
        out << ")";
        break;
    case Expr::Kind::Call:
        out << e.name << "(";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i) out << ", ";
            if (!e.arg_names[i].empty()) out << e.arg_names[i] << " = ";
            write_expr(out, *e.args[i]);
        }
        out << ")";
        break;
    case Expr::Kind::Index:
        write_expr(out, *e.args[0]);
        out << "[";
        for (std::size_t d = 0; d < e.index.size(); ++d) {
            if (d) out << ", ";
            const auto& s = e.index[d];
            if (s.all()) continue;
            write_expr(out, *s.lo);
            if (s.hi) {
                out << ":";
                write_expr(out, *s.hi);
            }
        }
        out << "]";
        break;
    }
}

void write_block(std::ostream& out, const StmtList& body, int depth);

void write_stmt(std::ostream& out, const Stmt& s, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    out << pad;
    switch (s.kind) {
    case Stmt::Kind::Assign:
        out << s.targets[0] << " = ";
        write_expr(out, *s.expr);
        break;
    case Stmt::Kind::MultiAssign:
        out << "[";
        for (std::size_t i = 0; i < s.targets.size(); ++i) out << (i ? ", " : "") << s.targets[i];
        out << "] = ";
        write_expr(out, *s.expr);
        break;
    case Stmt::Kind::IndexAssign:
        write_expr(out, *s.target);
        out << " = ";
        write_expr(out, *s.expr);
        break;
    case Stmt::Kind::Expr: write_expr(out, *s.expr); break;
    case Stmt::Kind::If:
        out << "if (";
        write_expr(out, *s.expr);
        out << ") ";
        write_block(out, s.body, depth);
        if (!s.orelse.empty()) {
            out << " else ";
            write_block(out, s.orelse, depth);
        }
        break;
    case Stmt::Kind::For:
        out << "for (" << s.targets[0] << " in ";
        if (s.by) {
            out << "seq(";
            write_expr(out, *s.from);
            out << ", ";
            write_expr(out, *s.to);
            out << ", ";
            write_expr(out, *s.by);
            out << ")";
        } else {
            write_expr(out, *s.from);
            out << ":";
            write_expr(out, *s.to);
        }
        out << ") ";
        write_block(out, s.body, depth);
        break;
    case Stmt::Kind::While:
        out << "while (";
        write_expr(out, *s.expr);
        out << ") ";
        write_block(out, s.body, depth);
        break;
    }
    out << "\n";
}

void write_block(std::ostream& out, const StmtList& body, int depth) {
    out << "{\n";
    for (const auto& s : body) write_stmt(out, *s, depth + 1);
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "}";
}

void write_params(std::ostream& out, const std::vector<Param>& ps) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i) out << ", ";
        if (!ps[i].type.empty()) out << ps[i].type << " ";
        out << ps[i].name;
        if (ps[i].default_value) {
            out << " = ";
            write_expr(out, *ps[i].default_value);
        }
    }
}

} // namespace

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.name != b.name || !(a.value == b.value) || a.arg_names != b.arg_names ||
        a.args.size() != b.args.size() || a.index.size() != b.index.size())
        return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equal(*a.args[i], *b.args[i])) return false;
    for (std::size_t i = 0; i < a.index.size(); ++i)
        if (!equal_ptr(a.index[i].lo, b.index[i].lo) || !equal_ptr(a.index[i].hi, b.index[i].hi)) return false;
    return true;
}

bool equal(const StmtList& a, const StmtList& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!equal_stmt(*a[i], *b[i])) return false;
    return true;
}

bool equal(const Program& a, const Program& b) {
    if (!equal(a.body, b.body) || a.functions.size() != b.functions.size()) return false;
    for (const auto& [name, fa] : a.functions) {
        auto it = b.functions.find(name);
        if (it == b.functions.end()) return false;
        const auto& fb = it->second;
        if (!equal_params(fa.params, fb.params) || !equal_params(fa.outputs, fb.outputs) || !equal(fa.body, fb.body))
            return false;
    }
    return true;
}

std::string unparse(const Expr& e) {
    std::ostringstream out;
    write_expr(out, e);
    return out.str();
}

std::string unparse(const Program& p) {
    std::ostringstream out;
    for (const auto& [name, fn] : p.functions) {
        out << name << " = function(";
        write_params(out, fn.params);
        out << ")";
        if (!fn.outputs.empty()) {
            out << " return (";
            write_params(out, fn.outputs);
            out << ")";
        }
        out << " ";
        write_block(out, fn.body, 0);
        out << "\n";
    }
    for (const auto& s : p.body) write_stmt(out, *s, 0);
    return out.str();
}

} // namespace tessera::interp
