// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <functional>

#include "tessera/builtins/builtins.hpp"
#include "tessera/interp/program.hpp"

namespace tessera::interp {

namespace {

struct Signature {
    std::size_t min_args;
    std::size_t max_args; // SIZE_MAX for variadic
    std::vector<std::string> params;
    std::size_t outputs = 1;
};

constexpr std::size_t kVariadic = static_cast<std::size_t>(-1);

const std::map<std::string, Signature>& signatures() {
    static const std::map<std::string, Signature> table = [] {
        std::map<std::string, Signature> t;
        for (const char* unary_fn : {"t", "tsmm", "diag", "sum", "mean", "rowSums", "colSums", "nrow", "ncol",
                                     "length", "sqrt", "abs", "exp", "log", "floor", "ceil", "round", "print", "stop",
                                     "as.scalar", "as.matrix", "as.double", "as.integer", "detectSchema", "collect",
                                     "read", "toString"})
            t[unary_fn] = {1, 1, {"x"}};
        t["min"] = {1, 2, {"x", "y"}};
        t["max"] = {1, 2, {"x", "y"}};
        t["solve"] = {2, 2, {"A", "b"}};
        t["matrix"] = {3, 3, {"data", "rows", "cols"}};
        t["rand"] = {2, 6, {"rows", "cols", "min", "max", "sparsity", "seed"}};
        t["seq"] = {2, 3, {"from", "to", "by"}};
        t["rbind"] = {1, kVariadic, {}};
        t["cbind"] = {1, kVariadic, {}};
        t["list"] = {0, kVariadic, {}};
        t["write"] = {2, 3, {"x", "file", "format"}};
        t["remove"] = {2, 2, {"list", "index"}};
        t["append"] = {2, 2, {"list", "x"}};
        t["aic"] = {3, 3, {"rss", "m", "p"}};
        t["permutation"] = {2, 2, {"n", "seed"}};
        t["genData"] = {2, 4, {"rows", "cols", "sparsity", "seed"}, 2};
        t["federated"] = {2, 3, {"X", "endpoints", "splits"}};
        return t;
    }();
    return table;
}

std::string opcode_of(const std::string& fn) { return fn == "t" ? "transpose" : fn; }

void collect_assigned(const StmtList& body, std::set<std::string>& out) {
    for (const auto& s : body) {
        for (const auto& t : s->targets) out.insert(t);
        if (s->kind == Stmt::Kind::IndexAssign) out.insert(s->target->args[0]->name);
        collect_assigned(s->body, out);
        collect_assigned(s->orelse, out);
    }
}

void collect_calls(const Expr& e, std::set<std::string>& out) {
    if (e.kind == Expr::Kind::Call) out.insert(e.name);
    for (const auto& a : e.args) collect_calls(*a, out);
    for (const auto& s : e.index) {
        if (s.lo) collect_calls(*s.lo, out);
        if (s.hi) collect_calls(*s.hi, out);
    }
}

void collect_calls(const StmtList& body, std::set<std::string>& out) {
    for (const auto& s : body) {
        for (const ExprPtr* e : {&s->target, &s->expr, &s->from, &s->to, &s->by})
            if (*e) collect_calls(**e, out);
        collect_calls(s->body, out);
        collect_calls(s->orelse, out);
    }
}

// Pulls in library functions referenced (transitively) by the program.
void link_library(Program& p) {
    std::optional<Program> lib;
    std::set<std::string> seen;
    while (true) {
        std::set<std::string> calls;
        collect_calls(p.body, calls);
        for (const auto& [name, fn] : p.functions) {
            collect_calls(fn.body, calls);
            for (const auto& prm : fn.params)
                if (prm.default_value) collect_calls(*prm.default_value, calls);
        }
        bool added = false;
        for (const auto& c : calls) {
            if (p.functions.count(c) || is_builtin(c) || seen.count(c)) continue;
            seen.insert(c);
            if (!lib) lib = parse(builtins::library_source());
            auto it = lib->functions.find(c);
            if (it == lib->functions.end()) continue;
            p.functions.emplace(c, it->second);
            added = true;
        }
        if (!added) return;
    }
}

class Lowering {
public:
    Lowering(const std::string& scope, std::set<std::string> defined, const Program& program, const CompileOptions& opts)
        : scope_(scope), defined_(std::move(defined)), program_(program), opts_(opts) {}

    std::vector<Block> lower(const StmtList& body) {
        std::vector<Block> blocks;
        Block current;
        const auto flush = [&] {
            if (!current.instructions.empty()) blocks.push_back(std::move(current));
            current = Block{};
        };
        for (const auto& s : body) {
            switch (s->kind) {
            case Stmt::Kind::If: {
                flush();
                Block b;
                b.kind = Block::Kind::If;
                b.line = s->line;
                out_ = &b.instructions;
                b.cond = expr(*s->expr);
                out_ = nullptr;
                b.body = lower(s->body);
                b.orelse = lower(s->orelse);
                blocks.push_back(std::move(b));
                break;
            }
            case Stmt::Kind::For: {
                flush();
                Block b;
                b.kind = Block::Kind::For;
                b.line = s->line;
                b.var = s->targets[0];
                out_ = &b.instructions;
                b.from = expr(*s->from);
                b.to = expr(*s->to);
                if (s->by) b.by = expr(*s->by);
                out_ = nullptr;
                b.site = site(s->line);
                b.body = lower(s->body);
                blocks.push_back(std::move(b));
                break;
            }
            case Stmt::Kind::While: {
                flush();
                Block b;
                b.kind = Block::Kind::While;
                b.line = s->line;
                out_ = &b.instructions;
                b.cond = expr(*s->expr);
                out_ = nullptr;
                b.site = site(s->line);
                b.body = lower(s->body);
                blocks.push_back(std::move(b));
                break;
            }
            default:
                current.line = current.instructions.empty() ? s->line : current.line;
                out_ = &current.instructions;
                statement(*s);
                out_ = nullptr;
            }
        }
        flush();
        return blocks;
    }

private:
    std::string site(int line) { return scope_ + ":" + std::to_string(line) + ":" + std::to_string(sites_++); }

    void statement(const Stmt& s) {
        switch (s.kind) {
        case Stmt::Kind::Assign: assign(*s.expr, {s.targets[0]}); break;
        case Stmt::Kind::MultiAssign: assign(*s.expr, s.targets); break;
        case Stmt::Kind::IndexAssign: {
            const Expr& idx = *s.target;
            Instruction ins;
            ins.opcode = "lix";
            ins.line = s.line;
            ins.inputs.push_back(expr(*idx.args[0]));
            ins.inputs.push_back(expr(*s.expr));
            index_operands(idx, ins.inputs);
            ins.outputs = {idx.args[0]->name};
            out_->push_back(std::move(ins));
            break;
        }
        case Stmt::Kind::Expr: expr(*s.expr); break;
        default: break;
        }
    }

    void assign(const Expr& e, const std::vector<std::string>& targets) {
        if (e.kind == Expr::Kind::Literal || e.kind == Expr::Kind::Ident) {
            Instruction ins;
            ins.opcode = "assign";
            ins.line = e.line;
            ins.inputs = {expr(e)};
            ins.outputs = targets;
            out_->push_back(std::move(ins));
            return;
        }
        Instruction ins = instruction(e);
        std::size_t available = 1;
        if (ins.opcode == "fcall")
            available = program_.functions.at(ins.callee).outputs.size();
        else if (auto it = signatures().find(e.name); e.kind == Expr::Kind::Call && it != signatures().end())
            available = it->second.outputs;
        if (targets.size() > available)
            throw CompileError("'" + e.name + "' returns " + std::to_string(available) + " value(s), " +
                                   std::to_string(targets.size()) + " requested",
                               e.line);
        ins.outputs = targets;
        out_->push_back(std::move(ins));
    }

    Operand expr(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Literal: return Operand::lit(e.value);
        case Expr::Kind::Ident:
            if (!e.name.empty() && e.name[0] == '$')
                throw CompileError("no value bound for script argument " + e.name, e.line);
            if (!defined_.count(e.name)) throw CompileError("undefined variable '" + e.name + "'", e.line);
            return Operand::var(e.name);
        default: {
            Instruction ins = instruction(e);
            std::string tmp = "_t" + std::to_string(temps_++);
            ins.outputs = {tmp};
            out_->push_back(std::move(ins));
            return Operand::var(std::move(tmp));
        }
        }
    }

    void index_operands(const Expr& idx, std::vector<Operand>& inputs) {
        for (std::size_t d = 0; d < 2; ++d) {
            if (d >= idx.index.size() || idx.index[d].all()) {
                inputs.push_back(Operand::none());
                inputs.push_back(Operand::none());
                continue;
            }
            const auto& spec = idx.index[d];
            Operand lo = expr(*spec.lo);
            inputs.push_back(lo);
            inputs.push_back(spec.hi ? expr(*spec.hi) : lo);
        }
    }

    Instruction instruction(const Expr& e) {
        Instruction ins;
        ins.line = e.line;
        switch (e.kind) {
        case Expr::Kind::Unary:
            ins.opcode = e.name == "-" ? "u-" : e.name;
            ins.inputs = {expr(*e.args[0])};
            return ins;
        case Expr::Kind::Binary:
            ins.opcode = e.name == "%*%" ? "matmul" : e.name == ":" ? "seq" : e.name;
            ins.inputs = {expr(*e.args[0]), expr(*e.args[1])};
            ins.decompose = opts_.cv_rewrite && ins.opcode == "matmul";
            return ins;
        case Expr::Kind::Index:
            ins.opcode = "rix";
            ins.inputs.push_back(expr(*e.args[0]));
            index_operands(e, ins.inputs);
            return ins;
        case Expr::Kind::Call: return call(e);
        default: throw CompileError("not an operation", e.line);
        }
    }

    Instruction call(const Expr& e) {
        Instruction ins;
        ins.line = e.line;
        auto fn = program_.functions.find(e.name);
        const std::vector<std::string>* names = nullptr;
        std::vector<std::string> fn_params;
        std::size_t min_args = 0, max_args = kVariadic;
        if (fn != program_.functions.end()) {
            ins.opcode = "fcall";
            ins.callee = e.name;
            for (const auto& p : fn->second.params) fn_params.push_back(p.name);
            names = &fn_params;
            max_args = fn_params.size();
            if (fn->second.outputs.empty()) ins.outputs = {};
        } else if (auto sig = signatures().find(e.name); sig != signatures().end()) {
            ins.opcode = opcode_of(e.name);
            names = &sig->second.params;
            min_args = sig->second.min_args;
            max_args = sig->second.max_args;
            ins.decompose = opts_.cv_rewrite && ins.opcode == "tsmm";
        } else {
            throw CompileError("undefined function '" + e.name + "'", e.line);
        }

        if (max_args == kVariadic) {
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (!e.arg_names[i].empty())
                    throw CompileError("'" + e.name + "' takes no named arguments", e.line);
                ins.inputs.push_back(expr(*e.args[i]));
            }
            if (ins.inputs.size() < min_args)
                throw CompileError("'" + e.name + "' needs at least " + std::to_string(min_args) + " argument(s)",
                                   e.line);
            return ins;
        }
        std::vector<const Expr*> slots(max_args, nullptr);
        std::size_t positional = 0;
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            std::size_t slot = positional;
            if (e.arg_names[i].empty()) {
                ++positional;
            } else {
                slot = max_args;
                for (std::size_t k = 0; k < names->size(); ++k)
                    if ((*names)[k] == e.arg_names[i]) slot = k;
                if (slot == max_args)
                    throw CompileError("'" + e.name + "' has no parameter '" + e.arg_names[i] + "'", e.line);
            }
            if (slot >= max_args)
                throw CompileError("too many arguments to '" + e.name + "'", e.line);
            if (slots[slot]) throw CompileError("argument " + std::to_string(slot + 1) + " of '" + e.name +
                                                    "' given twice", e.line);
            slots[slot] = e.args[i].get();
        }
        std::size_t last = 0;
        for (std::size_t k = 0; k < slots.size(); ++k)
            if (slots[k]) last = k + 1;
        for (std::size_t k = 0; k < last; ++k)
            ins.inputs.push_back(slots[k] ? expr(*slots[k]) : Operand::none());
        if (fn == program_.functions.end()) {
            for (std::size_t k = 0; k < min_args; ++k)
                if (k >= ins.inputs.size() || ins.inputs[k].kind == Operand::Kind::None)
                    throw CompileError("'" + e.name + "' is missing argument '" + (*names)[k] + "'", e.line);
        } else {
            const auto& params = fn->second.params;
            for (std::size_t k = 0; k < params.size(); ++k)
                if (!params[k].default_value && (k >= ins.inputs.size() || ins.inputs[k].kind == Operand::Kind::None))
                    throw CompileError("'" + e.name + "' is missing argument '" + params[k].name + "'", e.line);
        }
        return ins;
    }

    std::string scope_;
    std::set<std::string> defined_;
    const Program& program_;
    const CompileOptions& opts_;
    std::vector<Instruction>* out_ = nullptr;
    int temps_ = 0;
    int sites_ = 0;
};

Operand default_operand(const Param& p, const std::string& fn) {
    if (!p.default_value) return Operand::none();
    const Expr& d = *p.default_value;
    if (d.kind == Expr::Kind::Literal) return Operand::lit(d.value);
    if (d.kind == Expr::Kind::Unary && d.name == "-" && d.args[0]->kind == Expr::Kind::Literal) {
        const Scalar& v = d.args[0]->value;
        if (v.is_integral()) return Operand::lit(Scalar::int64(-v.as_int()));
        if (!v.is_string()) return Operand::lit(Scalar::fp64(-v.as_double()));
    }
    throw CompileError("default of parameter '" + p.name + "' in '" + fn + "' must be a literal", d.line);
}

} // namespace

bool is_builtin(const std::string& name) { return signatures().count(name) > 0; }

CompiledProgram compile(Program program, const CompileOptions& opts, const std::set<std::string>& defined,
                        const std::optional<std::set<std::string>>& keep) {
    program = deep_copy(program);
    for (const auto& [name, fn] : program.functions)
        if (is_builtin(name)) throw CompileError("function '" + name + "' shadows a builtin", fn.line);
    link_library(program);
    rewrite(program, opts, keep);

    CompiledProgram out;
    for (const auto& [name, fn] : program.functions) {
        CompiledFunction cf;
        cf.name = name;
        std::set<std::string> scope;
        for (const auto& p : fn.params) {
            cf.params.push_back(p.name);
            cf.defaults.push_back(default_operand(p, name));
            scope.insert(p.name);
        }
        for (const auto& o : fn.outputs) cf.outputs.push_back(o.name);
        collect_assigned(fn.body, scope);
        for (const auto& o : fn.outputs)
            if (!scope.count(o.name))
                throw CompileError("output '" + o.name + "' of '" + name + "' is never assigned", fn.line);
        cf.body = Lowering(name, std::move(scope), program, opts).lower(fn.body);
        out.functions.emplace(name, std::move(cf));
    }
    std::set<std::string> scope = defined;
    collect_assigned(program.body, scope);
    out.main = Lowering("main", std::move(scope), program, opts).lower(program.body);
    return out;
}

} // namespace tessera::interp
