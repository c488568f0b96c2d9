// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <functional>

#include "tessera/interp/program.hpp"

namespace tessera::interp {

namespace {

using Live = std::set<std::string>;

void for_each_expr(const Expr& e, const std::function<void(const Expr&)>& f) {
    f(e);
    for (const auto& a : e.args) for_each_expr(*a, f);
    for (const auto& s : e.index) {
        if (s.lo) for_each_expr(*s.lo, f);
        if (s.hi) for_each_expr(*s.hi, f);
    }
}

void for_each_expr(const StmtList& body, const std::function<void(const Expr&)>& f) {
    for (const auto& s : body) {
        for (const ExprPtr* e : {&s->target, &s->expr, &s->from, &s->to, &s->by})
            if (*e) for_each_expr(**e, f);
        for_each_expr(s->body, f);
        for_each_expr(s->orelse, f);
    }
}

void reads(const Expr& e, Live& out) {
    for_each_expr(e, [&](const Expr& x) {
        if (x.kind == Expr::Kind::Ident) out.insert(x.name);
    });
}

bool impure_builtin(const std::string& name) {
    return name == "print" || name == "write" || name == "stop" || name == "rand" || name == "genData" ||
           name == "federated";
}

class Purity {
public:
    explicit Purity(const Program& p) : p_(p) {}

    bool expr(const Expr& e) {
        bool pure = true;
        for_each_expr(e, [&](const Expr& x) {
            if (x.kind == Expr::Kind::Call && !call(x.name)) pure = false;
        });
        return pure;
    }

    bool call(const std::string& name) {
        if (impure_builtin(name)) return false;
        auto fn = p_.functions.find(name);
        if (fn == p_.functions.end()) return true;
        if (auto it = memo_.find(name); it != memo_.end()) return it->second;
        memo_[name] = false; // recursion is treated as impure
        bool pure = true;
        for_each_expr(fn->second.body, [&](const Expr& x) {
            if (x.kind == Expr::Kind::Call && !call(x.name)) pure = false;
        });
        memo_[name] = pure;
        return pure;
    }

private:
    const Program& p_;
    std::map<std::string, bool> memo_;
};

// Dead-code elimination over structured control flow. With apply=false
// only the live-in set is computed.
class DeadCode {
public:
    explicit DeadCode(Purity& purity) : purity_(purity) {}

    Live run(StmtList& body, Live live, bool apply) {
        StmtList kept;
        for (auto it = body.rbegin(); it != body.rend(); ++it) {
            Stmt& s = **it;
            if (!visit(s, live, apply) && apply) continue;
            if (apply) kept.push_back(*it);
        }
        if (apply) body.assign(kept.rbegin(), kept.rend());
        return live;
    }

private:
    // Returns false when the statement is dead.
    bool visit(Stmt& s, Live& live, bool apply) {
        switch (s.kind) {
        case Stmt::Kind::Assign:
        case Stmt::Kind::MultiAssign: {
            bool used = false;
            for (const auto& t : s.targets) used |= live.count(t) > 0;
            if (!used && purity_.expr(*s.expr)) return false;
            for (const auto& t : s.targets) live.erase(t);
            reads(*s.expr, live);
            return true;
        }
        case Stmt::Kind::IndexAssign: {
            const std::string& x = s.target->args[0]->name;
            if (!live.count(x) && purity_.expr(*s.expr) && purity_.expr(*s.target)) return false;
            reads(*s.target, live);
            reads(*s.expr, live);
            return true;
        }
        case Stmt::Kind::Expr:
            if (purity_.expr(*s.expr)) return false;
            reads(*s.expr, live);
            return true;
        case Stmt::Kind::If: {
            Live a = run(s.body, live, apply);
            Live b = run(s.orelse, live, apply);
            live = std::move(a);
            live.insert(b.begin(), b.end());
            reads(*s.expr, live);
            return true;
        }
        case Stmt::Kind::For:
        case Stmt::Kind::While: {
            const bool is_for = s.kind == Stmt::Kind::For;
            Live carried;
            while (true) {
                Live out = live;
                out.insert(carried.begin(), carried.end());
                if (!is_for) reads(*s.expr, out);
                Live in = run(s.body, out, false);
                if (is_for) in.erase(s.targets[0]);
                if (in == carried) break;
                carried = std::move(in);
            }
            Live out = live;
            out.insert(carried.begin(), carried.end());
            if (!is_for) reads(*s.expr, out);
            run(s.body, out, apply);
            live.insert(carried.begin(), carried.end());
            if (is_for) {
                live.erase(s.targets[0]);
                for (const ExprPtr* e : {&s.from, &s.to, &s.by})
                    if (*e) reads(**e, live);
            } else {
                reads(*s.expr, live);
            }
            return true;
        }
        }
        return true;
    }

    Purity& purity_;
};

bool truthy(const Scalar& v) {
    if (v.is_string()) return !v.as_string().empty();
    return v.as_double() != 0.0;
}

void fold_branches(StmtList& body) {
    StmtList out;
    for (auto& s : body) {
        fold_branches(s->body);
        fold_branches(s->orelse);
        const bool constant = s->expr && s->expr->kind == Expr::Kind::Literal;
        if (s->kind == Stmt::Kind::If && constant) {
            auto& taken = truthy(s->expr->value) ? s->body : s->orelse;
            out.insert(out.end(), taken.begin(), taken.end());
            continue;
        }
        if (s->kind == Stmt::Kind::While && constant && !truthy(s->expr->value)) continue;
        out.push_back(s);
    }
    body = std::move(out);
}

void tsmm_expr(ExprPtr& e, Purity& purity) {
    if (!e) return;
    for (auto& a : e->args) tsmm_expr(a, purity);
    for (auto& s : e->index) {
        tsmm_expr(s.lo, purity);
        tsmm_expr(s.hi, purity);
    }
    if (e->kind == Expr::Kind::Binary && e->name == "%*%") {
        const auto& lhs = e->args[0];
        if (lhs->kind == Expr::Kind::Call && lhs->name == "t" && lhs->args.size() == 1 && lhs->arg_names[0].empty() &&
            equal(*lhs->args[0], *e->args[1]) && purity.expr(*e->args[1]))
            e = make_call("tsmm", {e->args[1]}, e->line, e->column);
    }
}

void tsmm_body(StmtList& body, Purity& purity) {
    for (auto& s : body) {
        for (ExprPtr* e : {&s->target, &s->expr, &s->from, &s->to, &s->by}) tsmm_expr(*e, purity);
        tsmm_body(s->body, purity);
        tsmm_body(s->orelse, purity);
    }
}

// ---- inlining ----

ExprPtr clone(const ExprPtr& e, const std::function<std::string(const std::string&)>& rename) {
    if (!e) return nullptr;
    auto c = std::make_shared<Expr>(*e);
    if (c->kind == Expr::Kind::Ident) c->name = rename(c->name);
    for (auto& a : c->args) a = clone(a, rename);
    for (auto& s : c->index) {
        s.lo = clone(s.lo, rename);
        s.hi = clone(s.hi, rename);
    }
    return c;
}

StmtList clone(const StmtList& body, const std::function<std::string(const std::string&)>& rename) {
    StmtList out;
    for (const auto& s : body) {
        auto c = std::make_shared<Stmt>(*s);
        for (auto& t : c->targets) t = rename(t);
        for (ExprPtr* e : {&c->target, &c->expr, &c->from, &c->to, &c->by}) *e = clone(*e, rename);
        c->body = clone(s->body, rename);
        c->orelse = clone(s->orelse, rename);
        out.push_back(c);
    }
    return out;
}

std::map<std::string, int> call_sites(const Program& p) {
    std::map<std::string, int> n;
    const auto count = [&](const Expr& x) {
        if (x.kind == Expr::Kind::Call && p.functions.count(x.name)) ++n[x.name];
    };
    for_each_expr(p.body, count);
    for (const auto& [name, fn] : p.functions) for_each_expr(fn.body, count);
    return n;
}

bool calls_itself(const Function& fn) {
    bool found = false;
    for_each_expr(fn.body, [&](const Expr& x) {
        if (x.kind == Expr::Kind::Call && x.name == fn.name) found = true;
    });
    return found;
}

// Replaces a statement-level call of `fn` inside `body`. Returns true when found.
bool inline_into(StmtList& body, const Function& fn, int& counter) {
    for (std::size_t i = 0; i < body.size(); ++i) {
        Stmt& s = *body[i];
        if (inline_into(s.body, fn, counter) || inline_into(s.orelse, fn, counter)) return true;
        const bool direct = (s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::MultiAssign ||
                             s.kind == Stmt::Kind::Expr) &&
                            s.expr && s.expr->kind == Expr::Kind::Call && s.expr->name == fn.name;
        if (!direct) continue;
        const Expr& call = *s.expr;
        if (s.targets.size() > fn.outputs.size()) return false;
        const std::string prefix = "__" + fn.name + std::to_string(counter++) + "_";
        const auto rename = [&](const std::string& v) { return prefix + v; };

        std::vector<ExprPtr> bound(fn.params.size());
        std::size_t positional = 0;
        for (std::size_t a = 0; a < call.args.size(); ++a) {
            std::size_t slot = positional;
            if (!call.arg_names[a].empty()) {
                slot = fn.params.size();
                for (std::size_t k = 0; k < fn.params.size(); ++k)
                    if (fn.params[k].name == call.arg_names[a]) slot = k;
            } else {
                ++positional;
            }
            if (slot >= fn.params.size() || bound[slot]) return false; // left for the compiler to report
            bound[slot] = call.args[a];
        }
        StmtList replacement;
        for (std::size_t k = 0; k < fn.params.size(); ++k) {
            ExprPtr value = bound[k] ? bound[k] : fn.params[k].default_value;
            if (!value) return false;
            auto a = std::make_shared<Stmt>();
            a->kind = Stmt::Kind::Assign;
            a->line = s.line;
            a->targets = {rename(fn.params[k].name)};
            a->expr = value;
            replacement.push_back(a);
        }
        for (auto& b : clone(fn.body, rename)) replacement.push_back(b);
        for (std::size_t k = 0; k < s.targets.size(); ++k) {
            auto a = std::make_shared<Stmt>();
            a->kind = Stmt::Kind::Assign;
            a->line = s.line;
            a->targets = {s.targets[k]};
            a->expr = make_ident(rename(fn.outputs[k].name), s.line, 0);
            replacement.push_back(a);
        }
        body.erase(body.begin() + static_cast<std::ptrdiff_t>(i));
        body.insert(body.begin() + static_cast<std::ptrdiff_t>(i), replacement.begin(), replacement.end());
        return true;
    }
    return false;
}

void inline_functions(Program& p) {
    int counter = 0;
    for (int round = 0; round < 8; ++round) {
        bool changed = false;
        const auto sites = call_sites(p);
        for (const auto& [name, n] : sites) {
            if (n != 1) continue;
            const Function fn = p.functions.at(name);
            if (calls_itself(fn)) continue;
            bool done = inline_into(p.body, fn, counter);
            for (auto& [other, f] : p.functions)
                if (!done && other != name) done = inline_into(f.body, fn, counter);
            if (done) {
                p.functions.erase(name);
                changed = true;
                break; // call-site counts changed
            }
        }
        if (!changed) break;
    }
}

} // namespace

Program deep_copy(const Program& p) {
    const auto same = [](const std::string& v) { return v; };
    Program out;
    out.body = clone(p.body, same);
    for (const auto& [name, fn] : p.functions) {
        Function f = fn;
        for (auto& prm : f.params) prm.default_value = clone(prm.default_value, same);
        f.body = clone(fn.body, same);
        out.functions.emplace(name, std::move(f));
    }
    return out;
}

void rewrite(Program& p, const CompileOptions& opts, const std::optional<std::set<std::string>>& keep) {
    if (opts.constant_branches) {
        fold_branches(p.body);
        for (auto& [name, fn] : p.functions) fold_branches(fn.body);
    }
    if (opts.inline_functions) inline_functions(p);
    Purity purity(p);
    if (opts.tsmm_rewrite) {
        tsmm_body(p.body, purity);
        for (auto& [name, fn] : p.functions) tsmm_body(fn.body, purity);
    }
    if (opts.dead_code) {
        DeadCode dce(purity);
        for (auto& [name, fn] : p.functions) {
            Live live;
            for (const auto& o : fn.outputs) live.insert(o.name);
            dce.run(fn.body, live, true);
        }
        if (keep) dce.run(p.body, *keep, true);
    }
}

} // namespace tessera::interp
