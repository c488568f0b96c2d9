// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "executor.hpp"

#include <chrono>
#include <iostream>

#include "tessera/core/kernels.hpp"

namespace tessera::interp {

using lineage::LineageRef;

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool is_temp(const std::string& name) { return name.size() > 2 && name[0] == '_' && name[1] == 't'; }

void erase_temps(Frame& frame) {
    for (auto it = frame.begin(); it != frame.end();) {
        if (is_temp(it->first))
            it = frame.erase(it);
        else
            ++it;
    }
}

std::string at_line(const std::string& what, int line) {
    if (what.rfind("line ", 0) == 0) return what;
    return "line " + std::to_string(line) + ": " + what;
}

// Rethrows the active exception with the script line, keeping its type.
[[noreturn]] void rethrow_at(int line) {
    try {
        throw;
    } catch (const SingularError& e) {
        throw SingularError(at_line(e.what(), line), e.pivot());
    } catch (const ShapeError& e) {
        throw ShapeError(at_line(e.what(), line));
    } catch (const TypeError& e) {
        throw TypeError(at_line(e.what(), line));
    } catch (const IoError& e) {
        throw IoError(at_line(e.what(), line));
    } catch (const CompileError&) {
        throw;
    } catch (const Error& e) {
        throw Error(at_line(e.what(), line));
    } catch (const std::bad_variant_access&) {
        throw TypeError(at_line("operand has the wrong type", line));
    }
}

bool non_cacheable(const std::string& op) {
    static const std::set<std::string, std::less<>> ops{
        "read", "write", "print", "stop", "list", "remove", "append", "fcall", "assign", "federated", "collect"};
    return ops.count(op) > 0;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<std::string> endpoint_list(const Value& v) {
    std::vector<std::string> out;
    if (const auto* s = std::get_if<Scalar>(&v)) {
        out.push_back(s->as_string());
        return out;
    }
    for (const auto& item : as_list(v, "federated").items) out.push_back(as_scalar(item, "federated").as_string());
    return out;
}

std::vector<std::int64_t> split_heights(const Value& v, std::int64_t rows, std::size_t parts) {
    std::vector<std::int64_t> h;
    if (std::holds_alternative<std::monostate>(v)) {
        for (std::size_t i = 0; i < parts; ++i)
            h.push_back(static_cast<std::int64_t>((i + 1) * rows / parts - i * rows / parts));
        return h;
    }
    if (const auto* l = std::get_if<ListPtr>(&v)) {
        for (const auto& item : (*l)->items) h.push_back(as_scalar(item, "federated").as_int());
    } else {
        const auto& t = *as_tensor(v, "federated");
        for (std::int64_t i = 0; i < t.numel(); ++i) h.push_back(static_cast<std::int64_t>(t.f64_at(i)));
    }
    if (h.size() != parts)
        throw ShapeError("federated: " + std::to_string(h.size()) + " split heights for " + std::to_string(parts) +
                         " endpoints");
    return h;
}

} // namespace

bool truthy(const Value& v) {
    if (const auto* s = std::get_if<Scalar>(&v)) {
        if (s->is_string()) return !s->as_string().empty();
        return s->as_double() != 0.0;
    }
    if (const auto* t = std::get_if<TensorPtr>(&v)) {
        if ((*t)->numel() != 1) throw TypeError("condition must be a single value, got " + type_name(v));
        return (*t)->f64_at(0) != 0.0;
    }
    throw TypeError("condition must be a scalar, got " + type_name(v));
}

Executor::Executor(SessionConfig cfg)
    : config(std::move(cfg)), dedup(tracer),
      cache(reuse::CacheConfig{config.cache_bytes, 1.0, {"tsmm", "matmul"}}),
      scratch_(reuse::CacheConfig{0, 1.0, {}}), partial_(cache, binds), scratch_partial_(scratch_, binds) {
    const auto observe = [this](std::string_view opcode, double ms) { count(opcode, ms); };
    partial_.set_observer(observe);
    scratch_partial_.set_observer(observe);
    null_lin_ = tracer.literal("NULL");
}

std::ostream& Executor::out() const { return config.out ? *config.out : std::cout; }

void Executor::count(std::string_view opcode, double ms) {
    auto it = stats.ops.find(opcode);
    if (it == stats.ops.end()) it = stats.ops.emplace(std::string(opcode), OpStats{}).first;
    ++it->second.count;
    it->second.millis += ms;
}

std::uint64_t Executor::derive_seed() {
    return splitmix64(config.seed ^ splitmix64(++seed_counter_)) >> 1;
}

void Executor::run(const CompiledProgram& program) {
    program_ = &program;
    try {
        blocks(program.main, globals);
    } catch (...) {
        erase_temps(globals);
        if (dedup.active()) dedup.abort_iteration();
        program_ = nullptr;
        throw;
    }
    erase_temps(globals);
    program_ = nullptr;
}

void Executor::instructions(const std::vector<Instruction>& is, Frame& frame) {
    for (const auto& ins : is) {
        try {
            exec(ins, frame);
        } catch (...) {
            rethrow_at(ins.line);
        }
    }
}

Scalar Executor::operand_scalar(const Operand& op, const Frame& frame, const char* what) const {
    if (op.kind == Operand::Kind::Literal) return op.value;
    auto it = frame.find(op.name);
    if (it == frame.end()) throw Error("variable '" + op.name + "' used before assignment");
    if (const auto* t = std::get_if<TensorPtr>(&it->second.value); t && (*t)->numel() == 1)
        return (*t)->scalar_at(0);
    return as_scalar(it->second.value, what);
}

void Executor::blocks(const std::vector<Block>& bs, Frame& frame) {
    for (const auto& b : bs) {
        switch (b.kind) {
        case Block::Kind::Basic:
            instructions(b.instructions, frame);
            erase_temps(frame);
            break;
        case Block::Kind::If: {
            instructions(b.instructions, frame);
            bool taken = false;
            try {
                Value c = b.cond.kind == Operand::Kind::Literal ? Value(b.cond.value) : frame.at(b.cond.name).value;
                taken = truthy(c);
            } catch (...) {
                rethrow_at(b.line);
            }
            erase_temps(frame);
            if (dedup.active()) dedup.record_decision(taken ? 'T' : 'F');
            blocks(taken ? b.body : b.orelse, frame);
            break;
        }
        case Block::Kind::For: {
            instructions(b.instructions, frame);
            std::int64_t from = 0, to = 0, by = 1;
            try {
                from = operand_scalar(b.from, frame, "for").as_int();
                to = operand_scalar(b.to, frame, "for").as_int();
                if (b.by.kind != Operand::Kind::None) by = operand_scalar(b.by, frame, "for").as_int();
                if (by == 0) throw Error("for loop step is zero");
            } catch (...) {
                rethrow_at(b.line);
            }
            erase_temps(frame);
            for (std::int64_t i = from; by > 0 ? i <= to : i >= to; i += by) {
                const Scalar v = Scalar::int64(i);
                frame[b.var] = Var{v, tracer.literal(v.canonical())};
                iterate(b, frame);
            }
            break;
        }
        case Block::Kind::While:
            while (true) {
                instructions(b.instructions, frame);
                bool go = false;
                try {
                    Value c = b.cond.kind == Operand::Kind::Literal ? Value(b.cond.value) : frame.at(b.cond.name).value;
                    go = truthy(c);
                } catch (...) {
                    rethrow_at(b.line);
                }
                erase_temps(frame);
                if (!go) break;
                iterate(b, frame);
            }
            break;
        }
    }
}

void Executor::iterate(const Block& loop, Frame& frame) {
    if (dedup.active()) {
        dedup.record_decision('L');
        blocks(loop.body, frame);
        return;
    }
    const bool capture = config.dedup && dedup.begin_iteration(loop.site);
    try {
        blocks(loop.body, frame);
    } catch (...) {
        if (capture) dedup.abort_iteration();
        throw;
    }
    if (!capture) return;
    std::vector<std::pair<std::string, LineageRef*>> vars;
    vars.reserve(frame.size());
    for (auto& [name, var] : frame)
        if (var.lin) vars.emplace_back(name, &var.lin);
    std::sort(vars.begin(), vars.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    dedup.end_iteration(vars);
}

void Executor::exec(const Instruction& ins, Frame& frame) {
    ++stats.instructions;
    std::vector<Value> vals;
    std::vector<LineageRef> lins;
    vals.reserve(ins.inputs.size());
    lins.reserve(ins.inputs.size());
    for (const auto& op : ins.inputs) {
        switch (op.kind) {
        case Operand::Kind::None:
            vals.emplace_back();
            lins.push_back(null_lin_);
            break;
        case Operand::Kind::Literal:
            vals.emplace_back(op.value);
            lins.push_back(tracer.literal(op.value.canonical()));
            break;
        case Operand::Kind::Var: {
            auto it = frame.find(op.name);
            if (it == frame.end()) throw Error("variable '" + op.name + "' used before assignment");
            vals.push_back(it->second.value);
            lins.push_back(it->second.lin);
            break;
        }
        }
    }

    if (ins.opcode == "assign") {
        for (const auto& o : ins.outputs) frame[o] = Var{vals[0], lins[0]};
        return;
    }
    if (ins.opcode == "fcall") {
        call(ins, std::move(vals), std::move(lins), frame);
        return;
    }
    // Derived seeds enter the lineage as seed leaves.
    const std::size_t seed_slot = ins.opcode == "rand" ? 5 : ins.opcode == "genData" ? 3 : SIZE_MAX;
    if (seed_slot != SIZE_MAX) {
        vals.resize(std::max(vals.size(), seed_slot + 1));
        lins.resize(vals.size(), null_lin_);
        std::int64_t seed = -1;
        if (!std::holds_alternative<std::monostate>(vals[seed_slot]))
            seed = as_scalar(vals[seed_slot], ins.opcode.c_str()).as_int();
        if (seed < 0) seed = static_cast<std::int64_t>(derive_seed());
        vals[seed_slot] = Scalar::int64(seed);
        lins[seed_slot] = tracer.seed(static_cast<std::uint64_t>(seed));
    }
    if (ins.opcode == "federated") {
        if (!federation_) federation_ = std::make_shared<fed::Federation>();
        const auto x = as_tensor(vals[0], "federated");
        const auto endpoints = endpoint_list(vals[1]);
        const auto heights = split_heights(vals.size() > 2 ? vals[2] : Value{}, x->rows(), endpoints.size());
        std::vector<fed::FedPart> parts;
        std::int64_t row = 0;
        for (std::size_t i = 0; i < endpoints.size(); ++i) {
            if (heights[i] < 0 || row + heights[i] > x->rows()) throw ShapeError("federated: split heights exceed the rows");
            if (heights[i] > 0)
                parts.push_back({{row, row + heights[i]},
                                 share(kernels::slice(*x, {{row, row + heights[i]}, {0, x->cols()}})),
                                 endpoints[i]});
            row += heights[i];
        }
        const auto t0 = Clock::now();
        auto f = std::make_shared<const fed::FederatedTensor>(fed::fed_init(federation_, x->dims(), std::move(parts)));
        count("federated", millis_since(t0));
        frame[ins.outputs.at(0)] = Var{std::move(f), tracer.op(ins.opcode, lins)};
        return;
    }
    for (const auto& v : vals)
        if (is_fed(v)) {
            federated_op(ins, vals, lins, frame);
            return;
        }
    if (list_op(ins, vals, lins, frame)) return;

    std::vector<LineageRef> outs;
    if (ins.outputs.size() > 1) {
        for (std::size_t k = 0; k < ins.outputs.size(); ++k) outs.push_back(tracer.op(ins.opcode, lins, std::to_string(k)));
    } else {
        outs.push_back(tracer.op(ins.opcode, lins));
    }
    if (ins.opcode == "rbind" || ins.opcode == "cbind") record_bind(ins.opcode, vals, lins, outs[0]);

    const bool cacheable = reuse_enabled() && ins.outputs.size() == 1 && !non_cacheable(ins.opcode);
    const lineage::Digest key = outs[0].digest();
    if (cacheable) {
        if (auto hit = cache.probe(key, ins.opcode)) {
            Value v = hit->tensor ? Value(hit->tensor) : Value(*hit->scalar);
            frame[ins.outputs[0]] = Var{std::move(v), outs[0]};
            return;
        }
    }
    if (ins.opcode == "tsmm" || ins.opcode == "matmul") {
        const auto t0 = Clock::now();
        if (auto r = decompose(ins, *outs[0].node, vals)) {
            if (reuse_enabled()) cache.put(key, reuse::CacheValue{*r, std::nullopt}, millis_since(t0), ins.opcode);
            frame[ins.outputs[0]] = Var{*r, outs[0]};
            return;
        }
    }

    OpContext ctx{out(), stats, ins.line};
    const auto t0 = Clock::now();
    std::vector<Value> results = evaluate(ins.opcode, vals, ctx);
    const double ms = millis_since(t0);
    count(ins.opcode, ms);
    if (cacheable && !results.empty()) {
        if (const auto* t = std::get_if<TensorPtr>(&results[0]))
            cache.put(key, reuse::CacheValue{*t, std::nullopt}, ms, ins.opcode);
        else if (const auto* s = std::get_if<Scalar>(&results[0]))
            cache.put(key, reuse::CacheValue{nullptr, *s}, ms, ins.opcode);
    }
    for (std::size_t k = 0; k < ins.outputs.size(); ++k)
        frame[ins.outputs[k]] = Var{k < results.size() ? results[k] : Value{}, outs[std::min(k, outs.size() - 1)]};
}

std::optional<TensorPtr> Executor::decompose(const Instruction& ins, const lineage::LineageItem& node,
                                             const std::vector<Value>& vals) {
    std::vector<TensorPtr> operands;
    for (const auto& v : vals) {
        if (!is_tensor(v)) return std::nullopt;
        operands.push_back(std::get<TensorPtr>(v));
    }
    std::optional<reuse::PartialResult> r;
    if (config.lineage == LineageMode::ReusePartial) {
        // every partial-reuse rule applies, including prefix Grams across cbind
        r = partial_.try_partial(node, operands);
    } else if (ins.decompose) {
        // the CV rewrite: products over row binds are evaluated part by part
        const auto rows_bind = [&](const LineageRef& ref) {
            auto info = binds.find(ref.digest());
            return info && info->axis == kernels::Axis::Rows;
        };
        bool eligible = false;
        if (ins.opcode == "tsmm") {
            eligible = rows_bind(node.inputs()[0]);
        } else {
            const auto& lhs = node.inputs()[0];
            eligible = lhs.node->kind() == lineage::NodeKind::Op && lhs.node->opcode() == "transpose" &&
                       rows_bind(lhs.node->inputs()[0]) && rows_bind(node.inputs()[1]);
        }
        if (eligible) r = (reuse_enabled() ? partial_ : scratch_partial_).try_partial(node, operands);
    }
    if (!r) return std::nullopt;
    return r->value;
}

void Executor::record_bind(const std::string& opcode, const std::vector<Value>& parts,
                           const std::vector<LineageRef>& lins, const LineageRef& out) {
    const auto axis = opcode == "rbind" ? kernels::Axis::Rows : kernels::Axis::Cols;
    reuse::BindRegistry::Info info{axis, {}, {}};
    if (parts.size() == 1 && is_list(parts[0])) {
        const auto& l = std::get<ListPtr>(parts[0]);
        for (std::size_t i = 0; i < l->items.size(); ++i) {
            if (!is_tensor(l->items[i])) return;
            const auto& t = std::get<TensorPtr>(l->items[i]);
            info.extents.push_back(axis == kernels::Axis::Rows ? t->rows() : t->cols());
            info.parts.push_back(l->lineage[i].digest());
        }
    } else {
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (!is_tensor(parts[i])) return;
            const auto& t = std::get<TensorPtr>(parts[i]);
            info.extents.push_back(axis == kernels::Axis::Rows ? t->rows() : t->cols());
            info.parts.push_back(lins[i].digest());
        }
    }
    binds.record(out.digest(), std::move(info));
}

void Executor::call(const Instruction& ins, std::vector<Value> vals, std::vector<LineageRef> lins, Frame& frame) {
    const CompiledFunction& fn = program_->functions.at(ins.callee);
    Frame local;
    for (std::size_t k = 0; k < fn.params.size(); ++k) {
        if (k < vals.size() && ins.inputs[k].kind != Operand::Kind::None) {
            local[fn.params[k]] = Var{std::move(vals[k]), std::move(lins[k])};
            continue;
        }
        const Operand& d = fn.defaults[k];
        if (d.kind == Operand::Kind::None)
            throw Error("missing argument '" + fn.params[k] + "' in call to '" + fn.name + "'");
        local[fn.params[k]] = Var{d.value, tracer.literal(d.value.canonical())};
    }
    ++stats.function_calls;
    blocks(fn.body, local);
    for (std::size_t k = 0; k < ins.outputs.size(); ++k) {
        if (k >= fn.outputs.size()) {
            frame[ins.outputs[k]] = Var{};
            continue;
        }
        auto it = local.find(fn.outputs[k]);
        if (it == local.end())
            throw Error("function '" + fn.name + "' did not assign its output '" + fn.outputs[k] + "'");
        frame[ins.outputs[k]] = std::move(it->second);
    }
}

bool Executor::list_op(const Instruction& ins, const std::vector<Value>& vals, const std::vector<LineageRef>& lins,
                       Frame& frame) {
    const std::string& op = ins.opcode;
    const auto bind_list = [&](ListValue l) {
        frame[ins.outputs.at(0)] = Var{std::make_shared<const ListValue>(std::move(l)), tracer.op(op, lins)};
        return true;
    };
    const auto position = [&](const Value& v, std::size_t size) {
        const std::int64_t i = as_scalar(v, op.c_str()).as_int();
        if (i < 1 || static_cast<std::size_t>(i) > size)
            throw ShapeError("list index " + std::to_string(i) + " out of range 1.." + std::to_string(size));
        return static_cast<std::size_t>(i - 1);
    };
    if (op == "list") {
        ListValue l;
        l.items = vals;
        l.lineage = lins;
        return bind_list(std::move(l));
    }
    if (op == "append") {
        ListValue l = as_list(vals[0], "append");
        l.items.push_back(vals[1]);
        l.lineage.push_back(lins[1]);
        return bind_list(std::move(l));
    }
    if (op == "remove") {
        ListValue l = as_list(vals[0], "remove");
        const std::size_t i = position(vals[1], l.items.size());
        l.items.erase(l.items.begin() + static_cast<std::ptrdiff_t>(i));
        l.lineage.erase(l.lineage.begin() + static_cast<std::ptrdiff_t>(i));
        return bind_list(std::move(l));
    }
    if (op == "rix" && is_list(vals[0])) {
        const ListValue& l = as_list(vals[0], "index");
        if (!std::holds_alternative<std::monostate>(vals[3]))
            throw ShapeError("lists take a single index");
        if (std::holds_alternative<std::monostate>(vals[1])) {
            frame[ins.outputs.at(0)] = Var{vals[0], lins[0]};
            return true;
        }
        const std::size_t lo = position(vals[1], l.items.size());
        const std::size_t hi = position(vals[2], l.items.size());
        if (lo == hi) {
            frame[ins.outputs.at(0)] = Var{l.items[lo], l.lineage[lo]};
            return true;
        }
        ListValue sub;
        for (std::size_t i = lo; i <= hi; ++i) {
            sub.items.push_back(l.items[i]);
            sub.lineage.push_back(l.lineage[i]);
        }
        return bind_list(std::move(sub));
    }
    return false;
}

void Executor::federated_op(const Instruction& ins, std::vector<Value>& vals, const std::vector<LineageRef>& lins,
                            Frame& frame) {
    const std::string& op = ins.opcode;
    const auto bind = [&](Value v) { frame[ins.outputs.at(0)] = Var{std::move(v), tracer.op(op, lins)}; };
    const auto timed = [&](const char* name, auto&& fn) {
        const auto t0 = Clock::now();
        auto r = fn();
        count(name, millis_since(t0));
        return r;
    };
    if (op == "matmul" && is_fed(vals[0]) && is_tensor(vals[1])) {
        const auto& f = *std::get<FedPtr>(vals[0]);
        bind(share(timed("fed_matvec", [&] { return fed::fed_matvec(f, *std::get<TensorPtr>(vals[1])); })));
        return;
    }
    if (op == "matmul" && is_tensor(vals[0]) && is_fed(vals[1])) {
        const auto& f = *std::get<FedPtr>(vals[1]);
        const auto& u = *std::get<TensorPtr>(vals[0]);
        bind(share(timed("fed_vecmat", [&] {
            return fed::fed_vecmat(u.rank() == 2 && u.rows() == 1 ? kernels::transpose(u) : u, f);
        })));
        return;
    }
    if (vals.size() == 1) {
        const auto& f = *std::get<FedPtr>(vals[0]);
        if (op == "sum") {
            bind(Scalar::fp64(timed("fed_sum", [&] { return fed::fed_sum(f); })));
            return;
        }
        if (op == "rowSums" || op == "colSums") {
            const auto kind = op == "rowSums" ? kernels::AggKind::RowSums : kernels::AggKind::ColSums;
            bind(share(timed("fed_aggregate", [&] { return fed::fed_aggregate(kind, f); })));
            return;
        }
        if (op == "collect" || op == "as.matrix") {
            ++stats.fed_collects;
            bind(share(timed("fed_collect", [&] { return fed::collect(f); })));
            return;
        }
        if (op == "nrow" || op == "ncol") {
            bind(Scalar::int64(op == "nrow" ? f.dims[0] : f.dims[1]));
            return;
        }
    }
    out() << "warning: line " << ins.line << ": '" << op << "' has no federated form; collecting the operand\n";
    for (auto& v : vals)
        if (is_fed(v)) {
            ++stats.fed_collects;
            v = share(timed("fed_collect", [&] { return fed::collect(*std::get<FedPtr>(v)); }));
        }
    OpContext ctx{out(), stats, ins.line};
    const auto t0 = Clock::now();
    std::vector<Value> results = evaluate(op, vals, ctx);
    count(op, millis_since(t0));
    for (std::size_t k = 0; k < ins.outputs.size(); ++k)
        frame[ins.outputs[k]] = Var{k < results.size() ? results[k] : Value{},
                                    tracer.op(op, lins, ins.outputs.size() > 1 ? std::to_string(k) : "")};
}

} // namespace tessera::interp
