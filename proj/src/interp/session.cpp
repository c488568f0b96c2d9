// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/interp/session.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "executor.hpp"
#include "tessera/core/parallel.hpp"
#include "tessera/io/io.hpp"
#include "tessera/lineage/serialize.hpp"

namespace tessera::interp {

std::optional<LineageMode> parse_lineage_mode(std::string_view text) {
    if (text == "none") return LineageMode::None;
    if (text == "trace") return LineageMode::Trace;
    if (text == "reuse_full") return LineageMode::ReuseFull;
    if (text == "reuse_partial") return LineageMode::ReusePartial;
    return std::nullopt;
}

const char* to_string(LineageMode mode) {
    switch (mode) {
    case LineageMode::None: return "none";
    case LineageMode::Trace: return "trace";
    case LineageMode::ReuseFull: return "reuse_full";
    case LineageMode::ReusePartial: return "reuse_partial";
    }
    return "?";
}

std::int64_t ExecStats::count(std::string_view opcode) const {
    auto it = ops.find(opcode);
    return it == ops.end() ? 0 : it->second.count;
}

Session::Session(SessionConfig config) : exec_(std::make_unique<Executor>(std::move(config))) {
    if (exec_->config.threads > 0) set_num_threads(exec_->config.threads);
}

Session::~Session() = default;

namespace {

// Inputs are identified by name and content so that rebinding a name with
// new data never hits results cached for the old data.
lineage::Digest content_digest(const Value& v) {
    using lineage::murmur3_128;
    if (const auto* s = std::get_if<Scalar>(&v)) {
        const std::string c = s->canonical();
        return murmur3_128(c.data(), c.size(), lineage::kDigestSeed);
    }
    if (const auto* t = std::get_if<TensorPtr>(&v)) {
        const auto& x = **t;
        if (x.vtype() == ValueType::FP64 && !x.is_sparse()) {
            const auto cells = x.dense_f64();
            lineage::Digest d = murmur3_128(cells.data(), cells.size_bytes(), lineage::kDigestSeed);
            const auto& dims = x.dims();
            return murmur3_128(dims.data(), dims.size() * sizeof(dims[0]), d.hi ^ d.lo);
        }
        const std::string bytes = io::encode_binary(x);
        return murmur3_128(bytes.data(), bytes.size(), lineage::kDigestSeed);
    }
    if (const auto* l = std::get_if<ListPtr>(&v)) {
        std::string acc;
        for (const auto& item : (*l)->items) acc += content_digest(item).hex();
        return murmur3_128(acc.data(), acc.size(), lineage::kDigestSeed);
    }
    if (const auto* f = std::get_if<FramePtr>(&v)) {
        std::string acc;
        for (const auto& g : (*f)->groups()) acc += io::encode_binary(g.block);
        return murmur3_128(acc.data(), acc.size(), lineage::kDigestSeed);
    }
    return {};
}

} // namespace

void Session::set_input(const std::string& name, Value value) {
    lineage::LineageRef lin;
    if (const auto* l = std::get_if<ListPtr>(&value)) {
        // list elements keep their own lineage
        ListValue copy = **l;
        copy.lineage.clear();
        for (std::size_t i = 0; i < copy.items.size(); ++i)
            copy.lineage.push_back(
                exec_->tracer.input(name + "[" + std::to_string(i + 1) + "]@" + content_digest(copy.items[i]).hex()));
        lin = exec_->tracer.op("list", copy.lineage);
        value = std::make_shared<const ListValue>(std::move(copy));
    } else {
        lin = exec_->tracer.input(name + "@" + content_digest(value).hex());
    }
    exec_->globals[name] = Var{std::move(value), std::move(lin)};
}

void Session::run(std::string_view script, const std::optional<std::set<std::string>>& outputs,
                  const std::map<std::string, std::string>& nvargs) {
    std::set<std::string> defined;
    for (const auto& [name, var] : exec_->globals) defined.insert(name);
    std::optional<std::set<std::string>> keep = outputs;
    if (keep) keep->insert(defined.begin(), defined.end());
    const CompiledProgram program = compile(parse(script, nvargs), exec_->config.compile, defined, keep);
    exec_->run(program);
}

bool Session::has(const std::string& name) const { return exec_->globals.count(name) > 0; }

std::vector<std::string> Session::variables() const {
    std::vector<std::string> names;
    for (const auto& [name, var] : exec_->globals)
        if (name.rfind("__", 0) != 0) names.push_back(name); // variables of inlined functions
    std::sort(names.begin(), names.end());
    return names;
}

const Value& Session::get(const std::string& name) const {
    auto it = exec_->globals.find(name);
    if (it == exec_->globals.end()) throw Error("no variable '" + name + "' in the session");
    return it->second.value;
}

TensorPtr Session::tensor(const std::string& name) const {
    const Value& v = get(name);
    if (const auto* s = std::get_if<Scalar>(&v)) return share(BasicTensorBlock::fp64({1, 1}, {s->as_double()}));
    return as_tensor(v, name.c_str());
}

Scalar Session::scalar(const std::string& name) const {
    const Value& v = get(name);
    if (const auto* t = std::get_if<TensorPtr>(&v); t && (*t)->numel() == 1) return (*t)->scalar_at(0);
    return as_scalar(v, name.c_str());
}

lineage::LineageRef Session::lineage_of(const std::string& name) const {
    auto it = exec_->globals.find(name);
    if (it == exec_->globals.end()) throw Error("no variable '" + name + "' in the session");
    return it->second.lin;
}

std::string Session::trace(const std::vector<std::string>& names) const {
    std::vector<std::pair<std::string, lineage::LineageRef>> outs;
    for (const auto& n : names) outs.emplace_back(n, lineage_of(n));
    return lineage::serialize_outputs(outs);
}

const SessionConfig& Session::config() const noexcept { return exec_->config; }
const ExecStats& Session::stats() const noexcept { return exec_->stats; }
void Session::reset_stats() { exec_->stats = ExecStats{}; }
reuse::CacheStats Session::cache_stats() const { return exec_->cache.stats(); }
const reuse::ReuseCache& Session::cache() const { return exec_->cache; }
lineage::Tracer& Session::tracer() { return exec_->tracer; }
const lineage::LoopDeduplicator& Session::dedup() const { return exec_->dedup; }

std::string Session::report() const {
    std::ostringstream out;
    char line[160];
    const ExecStats& s = exec_->stats;
    out << "lineage mode: " << to_string(exec_->config.lineage) << "\n";
    std::snprintf(line, sizeof line, "%-16s %10s %12s\n", "opcode", "count", "time(ms)");
    out << line;
    for (const auto& [op, st] : s.ops) {
        std::snprintf(line, sizeof line, "%-16s %10lld %12.3f\n", op.c_str(), static_cast<long long>(st.count),
                      st.millis);
        out << line;
    }
    const reuse::CacheStats c = exec_->cache.stats();
    out << "instructions: " << s.instructions << "  function calls: " << s.function_calls << "\n";
    out << "cache hits: " << c.hits << "  misses: " << c.misses << "  partial: " << c.partial_hits
        << "  puts: " << c.puts << "  rejected: " << c.rejected << "  evictions: " << c.evictions << "\n";
    if (!c.partial_by_rule.empty()) {
        out << "partial reuse by rule:";
        for (const auto& [rule, n] : c.partial_by_rule) out << " " << rule << "=" << n;
        out << "\n";
    }
    out << "cache bytes: " << exec_->cache.bytes() << " / " << exec_->cache.capacity() << "\n";
    out << "bytes read: " << s.bytes_read << "  bytes written: " << s.bytes_written << "\n";
    const auto& d = exec_->dedup.stats();
    out << "lineage nodes live: " << exec_->tracer.live_nodes() << "  loop templates: " << d.templates
        << "  path nodes: " << d.path_nodes << "\n";
    return out.str();
}

} // namespace tessera::interp
