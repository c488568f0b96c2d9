// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/lineage/serialize.hpp"

#include <charconv>
#include <sstream>
#include <unordered_map>

#include "graph.hpp"
#include "tessera/core/error.hpp"

namespace tessera::lineage {

namespace {

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else if (c == '\r') out += "\\r";
        else out.push_back(c);
    }
    return out;
}

std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            const char n = s[++i];
            out.push_back(n == 'n' ? '\n' : n == 'r' ? '\r' : n);
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::int64_t parse_id(std::string_view s, std::size_t line) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw Error("lineage trace line " + std::to_string(line) + ": bad id '" + std::string(s) + "'");
    return v;
}

NodeKind kind_of(std::string_view opcode) {
    for (NodeKind k : {NodeKind::Input, NodeKind::Literal, NodeKind::Seed, NodeKind::Placeholder})
        if (opcode == leaf_opcode(k)) return k;
    return NodeKind::Op;
}

std::string write(const std::vector<std::pair<std::string, LineageRef>>& outputs, bool with_names) {
    Tracer scratch;
    Expander expander(scratch);
    std::vector<LineageRef> roots;
    std::vector<NodePtr> nodes;
    for (const auto& [name, ref] : outputs) {
        roots.push_back(expander.expand(ref));
        nodes.push_back(roots.back().node);
    }
    std::unordered_map<const LineageItem*, std::int64_t> ids;
    std::ostringstream out;
    post_order(nodes, [&](const NodePtr& n) {
        const std::int64_t id = static_cast<std::int64_t>(ids.size());
        ids[n.get()] = id;
        out << id << ' ' << n->opcode() << " (" << escape(n->payload()) << ") [";
        for (std::size_t i = 0; i < n->inputs().size(); ++i) {
            if (i) out << ',';
            out << ids.at(n->inputs()[i].node.get());
        }
        out << "]\n";
    });
    if (with_names)
        for (std::size_t i = 0; i < outputs.size(); ++i)
            out << "OUT " << outputs[i].first << ' ' << ids.at(roots[i].node.get()) << '\n';
    return out.str();
}

} // namespace

std::string serialize(const LineageRef& root) { return write({{"", root}}, false); }

std::string serialize_outputs(const std::vector<std::pair<std::string, LineageRef>>& outputs) {
    return write(outputs, true);
}

ParsedTrace parse_trace(std::string_view text, Tracer& tracer) {
    ParsedTrace trace;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        const auto bad = [&](const char* what) {
            return Error("lineage trace line " + std::to_string(line_no) + ": " + what);
        };
        if (line.starts_with("OUT ")) {
            const auto sp = line.rfind(' ');
            if (sp <= 4) throw bad("malformed output line");
            const auto id = parse_id(line.substr(sp + 1), line_no);
            if (id < 0 || id >= static_cast<std::int64_t>(trace.nodes.size())) throw bad("unknown node id");
            trace.outputs.emplace_back(std::string(line.substr(4, sp - 4)), trace.nodes[static_cast<std::size_t>(id)]);
            continue;
        }
        const auto sp = line.find(' ');
        const auto open = line.find(" (");
        const auto close = line.rfind(") [");
        if (sp == std::string_view::npos || open == std::string_view::npos || close == std::string_view::npos ||
            close < open || line.back() != ']')
            throw bad("malformed node line");
        const auto id = parse_id(line.substr(0, sp), line_no);
        if (id != static_cast<std::int64_t>(trace.nodes.size())) throw bad("node ids must be consecutive");
        const std::string opcode(line.substr(sp + 1, open - sp - 1));
        const std::string payload = unescape(line.substr(open + 2, close - open - 2));
        std::string_view kids = line.substr(close + 3, line.size() - close - 4);
        std::vector<LineageRef> inputs;
        while (!kids.empty()) {
            const auto comma = kids.find(',');
            const auto cid = parse_id(kids.substr(0, comma), line_no);
            if (cid < 0 || cid >= id) throw bad("child id must refer to an earlier node");
            inputs.push_back(trace.nodes[static_cast<std::size_t>(cid)]);
            kids = comma == std::string_view::npos ? std::string_view{} : kids.substr(comma + 1);
        }
        trace.nodes.push_back(tracer.make(kind_of(opcode), opcode, payload, std::move(inputs)));
    }
    return trace;
}

} // namespace tessera::lineage
