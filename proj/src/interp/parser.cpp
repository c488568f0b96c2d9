// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>

#include "lexer.hpp"
#include "tessera/interp/ast.hpp"

namespace tessera::interp {

ExprPtr make_literal(Scalar v, int line, int column) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Literal;
    e->value = std::move(v);
    e->line = line;
    e->column = column;
    return e;
}

ExprPtr make_ident(std::string name, int line, int column) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Ident;
    e->name = std::move(name);
    e->line = line;
    e->column = column;
    return e;
}

ExprPtr make_call(std::string name, std::vector<ExprPtr> args, int line, int column) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Call;
    e->name = std::move(name);
    e->arg_names.assign(args.size(), "");
    e->args = std::move(args);
    e->line = line;
    e->column = column;
    return e;
}

Scalar literal_from_text(std::string_view text) {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
    if (ec == std::errc() && p == text.data() + text.size() && !text.empty()) return Scalar::int64(i);
    double d = 0;
    auto [q, ec2] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (ec2 == std::errc() && q == text.data() + text.size() && !text.empty()) return Scalar::fp64(d);
    if (text == "TRUE") return Scalar::boolean(true);
    if (text == "FALSE") return Scalar::boolean(false);
    return Scalar::string(std::string(text));
}

namespace {

class Parser {
public:
    Parser(std::vector<Token> toks, const std::map<std::string, std::string>& nvargs)
        : toks_(std::move(toks)), nvargs_(nvargs) {}

    Program program() {
        Program p;
        while (true) {
            skip_separators();
            if (peek().kind == Tok::End) break;
            if (auto fn = try_function()) {
                const std::string name = fn->name;
                const int line = fn->line;
                if (!p.functions.emplace(name, std::move(*fn)).second)
                    throw SyntaxError("function '" + name + "' defined twice", line, 1);
                continue;
            }
            p.body.push_back(statement());
        }
        return p;
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool is_op(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Op && peek(k).text == s; }
    bool is_ident(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == s; }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& what, const Token& at) const {
        const std::string found = at.kind == Tok::End       ? "end of input"
                                  : at.kind == Tok::Newline ? "end of line"
                                                            : "'" + at.text + "'";
        throw SyntaxError(what + ", found " + found, at.line, at.column);
    }

    void expect(const char* op) {
        if (!is_op(op)) fail(std::string("expected '") + op + "'", peek());
        next();
    }

    void skip_newlines() {
        while (peek().kind == Tok::Newline) next();
    }
    void skip_separators() {
        while (peek().kind == Tok::Newline || is_op(";")) next();
    }

    std::string identifier(const char* what) {
        if (peek().kind != Tok::Ident) fail(std::string("expected ") + what, peek());
        return next().text;
    }

    bool assign_op(std::size_t k = 0) const { return is_op("=", k) || is_op("<-", k); }

    std::optional<Function> try_function() {
        if (!(peek().kind == Tok::Ident && assign_op(1) && is_ident("function", 2))) return std::nullopt;
        Function fn;
        fn.line = peek().line;
        fn.name = next().text;
        next();
        next();
        expect("(");
        skip_newlines();
        fn.params = params(true);
        expect(")");
        skip_newlines();
        if (is_ident("return")) {
            next();
            expect("(");
            skip_newlines();
            fn.outputs = params(false);
            expect(")");
        }
        skip_newlines();
        if (!is_op("{")) fail("expected '{' to open the function body", peek());
        fn.body = block();
        return fn;
    }

    std::vector<Param> params(bool defaults) {
        std::vector<Param> out;
        while (!is_op(")")) {
            Param p;
            if (peek().kind == Tok::Ident && (is_op("[", 1) || peek(1).kind == Tok::Ident)) {
                p.type = next().text;
                if (is_op("[")) {
                    next();
                    p.type += "[" + identifier("a value type") + "]";
                    expect("]");
                }
            }
            p.name = identifier("a parameter name");
            if (defaults && is_op("=")) {
                next();
                p.default_value = expr();
            }
            out.push_back(std::move(p));
            skip_newlines();
            if (!is_op(",")) break;
            next();
            skip_newlines();
        }
        return out;
    }

    StmtList block() {
        StmtList out;
        if (!is_op("{")) {
            out.push_back(statement());
            return out;
        }
        next();
        while (true) {
            skip_separators();
            if (is_op("}")) {
                next();
                return out;
            }
            if (peek().kind == Tok::End) fail("expected '}'", peek());
            out.push_back(statement());
        }
    }

    void end_statement() {
        if (peek().kind == Tok::Newline || is_op(";")) {
            next();
            return;
        }
        if (is_op("}") || peek().kind == Tok::End) return;
        fail("expected end of statement", peek());
    }

    StmtList body_after_header() {
        skip_newlines();
        return block();
    }

    StmtPtr statement() {
        auto s = std::make_shared<Stmt>();
        const Token& t = peek();
        s->line = t.line;
        if (is_ident("if")) {
            next();
            s->kind = Stmt::Kind::If;
            expect("(");
            s->expr = expr();
            expect(")");
            s->body = body_after_header();
            std::size_t save = pos_;
            skip_newlines();
            if (is_ident("else")) {
                next();
                s->orelse = body_after_header();
            } else {
                pos_ = save;
            }
            return s;
        }
        if (is_ident("for")) {
            next();
            s->kind = Stmt::Kind::For;
            expect("(");
            s->targets.push_back(identifier("a loop variable"));
            if (!is_ident("in")) fail("expected 'in'", peek());
            next();
            auto range = expr();
            if (range->kind == Expr::Kind::Binary && range->name == ":") {
                s->from = range->args[0];
                s->to = range->args[1];
            } else if (range->kind == Expr::Kind::Call && range->name == "seq" && range->args.size() >= 2 &&
                       range->args.size() <= 3) {
                s->from = range->args[0];
                s->to = range->args[1];
                if (range->args.size() == 3) s->by = range->args[2];
            } else {
                throw SyntaxError("for loops iterate over 'a:b' or seq(a, b[, by])", range->line, range->column);
            }
            expect(")");
            s->body = body_after_header();
            return s;
        }
        if (is_ident("while")) {
            next();
            s->kind = Stmt::Kind::While;
            expect("(");
            s->expr = expr();
            expect(")");
            s->body = body_after_header();
            return s;
        }
        if (is_op("[")) {
            next();
            s->kind = Stmt::Kind::MultiAssign;
            while (true) {
                s->targets.push_back(identifier("an assignment target"));
                if (is_op(",")) {
                    next();
                    continue;
                }
                break;
            }
            expect("]");
            if (!assign_op()) fail("expected '='", peek());
            next();
            skip_newlines();
            s->expr = expr();
            if (s->expr->kind != Expr::Kind::Call) fail("multi-assignment needs a function call", peek());
            end_statement();
            return s;
        }
        auto lhs = expr();
        if (assign_op()) {
            const Token op = next();
            skip_newlines();
            if (lhs->kind == Expr::Kind::Ident) {
                s->kind = Stmt::Kind::Assign;
                s->targets.push_back(lhs->name);
            } else if (lhs->kind == Expr::Kind::Index && lhs->args[0]->kind == Expr::Kind::Ident) {
                s->kind = Stmt::Kind::IndexAssign;
                s->target = lhs;
            } else {
                fail("invalid assignment target", op);
            }
            s->expr = expr();
        } else {
            s->kind = Stmt::Kind::Expr;
            s->expr = lhs;
        }
        end_statement();
        return s;
    }

    ExprPtr binary(std::string op, ExprPtr a, ExprPtr b, const Token& at) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Binary;
        e->name = std::move(op);
        e->args = {std::move(a), std::move(b)};
        e->line = at.line;
        e->column = at.column;
        return e;
    }

    ExprPtr unary(std::string op, ExprPtr a, const Token& at) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Unary;
        e->name = std::move(op);
        e->args = {std::move(a)};
        e->line = at.line;
        e->column = at.column;
        return e;
    }

    ExprPtr expr() { return or_expr(); }

    template <class Next>
    ExprPtr left_assoc(std::initializer_list<const char*> ops, Next next_level) {
        auto lhs = (this->*next_level)();
        while (true) {
            const char* hit = nullptr;
            for (const char* o : ops)
                if (is_op(o)) hit = o;
            if (!hit) return lhs;
            const Token at = next();
            skip_newlines();
            lhs = binary(hit, lhs, (this->*next_level)(), at);
        }
    }

    ExprPtr or_expr() { return left_assoc({"|", "||"}, &Parser::and_expr); }
    ExprPtr and_expr() { return left_assoc({"&", "&&"}, &Parser::not_expr); }
    ExprPtr not_expr() {
        if (is_op("!")) {
            const Token at = next();
            return unary("!", not_expr(), at);
        }
        return comparison();
    }
    ExprPtr comparison() { return left_assoc({"<", "<=", ">", ">=", "==", "!="}, &Parser::additive); }
    ExprPtr additive() { return left_assoc({"+", "-"}, &Parser::multiplicative); }
    ExprPtr multiplicative() { return left_assoc({"*", "/"}, &Parser::special); }
    ExprPtr special() { return left_assoc({"%*%", "%%", "%/%"}, &Parser::range); }
    ExprPtr range() { return left_assoc({":"}, &Parser::sign); }
    ExprPtr sign() {
        if (is_op("-") || is_op("+")) {
            const Token at = next();
            auto operand = sign();
            if (at.text == "+") return operand;
            return unary("-", operand, at);
        }
        return power();
    }
    ExprPtr power() {
        auto base = postfix();
        if (is_op("^")) {
            const Token at = next();
            skip_newlines();
            return binary("^", base, sign(), at); // right associative, binds tighter than unary minus on the left
        }
        return base;
    }

    ExprPtr postfix() {
        auto e = primary();
        while (is_op("[")) {
            const Token at = next();
            auto idx = std::make_shared<Expr>();
            idx->kind = Expr::Kind::Index;
            idx->line = at.line;
            idx->column = at.column;
            idx->args.push_back(e);
            idx->index.push_back(index_spec());
            if (is_op(",")) {
                next();
                idx->index.push_back(index_spec());
            }
            expect("]");
            e = idx;
        }
        return e;
    }

    IndexSpec index_spec() {
        IndexSpec s;
        if (is_op(",") || is_op("]")) return s;
        auto e = expr();
        if (e->kind == Expr::Kind::Binary && e->name == ":") {
            s.lo = e->args[0];
            s.hi = e->args[1];
        } else {
            s.lo = e;
        }
        return s;
    }

    ExprPtr primary() {
        const Token t = peek();
        switch (t.kind) {
        case Tok::Int: {
            next();
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc()) return make_literal(Scalar::fp64(std::stod(t.text)), t.line, t.column);
            return make_literal(Scalar::int64(v), t.line, t.column);
        }
        case Tok::Float: next(); return make_literal(Scalar::fp64(std::stod(t.text)), t.line, t.column);
        case Tok::String: next(); return make_literal(Scalar::string(t.text), t.line, t.column);
        case Tok::NvArg: {
            next();
            auto it = nvargs_.find(t.text);
            if (it == nvargs_.end()) return make_ident("$" + t.text, t.line, t.column);
            return make_literal(literal_from_text(it->second), t.line, t.column);
        }
        case Tok::Ident: {
            next();
            if (t.text == "TRUE" || t.text == "FALSE") return make_literal(Scalar::boolean(t.text == "TRUE"), t.line, t.column);
            if (t.text == "function") fail("functions may only be defined at top level as 'name = function(...)'", t);
            if (!is_op("(")) return make_ident(t.text, t.line, t.column);
            next();
            auto call = make_call(t.text, {}, t.line, t.column);
            skip_newlines();
            while (!is_op(")")) {
                std::string name;
                if (peek().kind == Tok::Ident && is_op("=", 1)) {
                    name = next().text;
                    next();
                }
                call->args.push_back(expr());
                call->arg_names.push_back(name);
                skip_newlines();
                if (!is_op(",")) break;
                next();
                skip_newlines();
            }
            expect(")");
            if (call->name == "ifdef") {
                if (call->args.size() != 2) throw SyntaxError("ifdef expects ($name, default)", t.line, t.column);
                const auto& a = call->args[0];
                const bool unbound = a->kind == Expr::Kind::Ident && !a->name.empty() && a->name[0] == '$';
                return unbound ? call->args[1] : a;
            }
            return call;
        }
        case Tok::Op:
            if (t.text == "(") {
                next();
                skip_newlines();
                auto e = expr();
                skip_newlines();
                expect(")");
                return e;
            }
            break;
        default: break;
        }
        fail("expected an expression", t);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const std::map<std::string, std::string>& nvargs_;
};

} // namespace

Program parse(std::string_view source, const std::map<std::string, std::string>& nvargs) {
    return Parser(tokenize(source), nvargs).program();
}

} // namespace tessera::interp
