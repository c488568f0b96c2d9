// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/lineage/lineage.hpp"

#include <cstring>
#include <stdexcept>
#include <unordered_set>

#include "graph.hpp"

namespace tessera::lineage {

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::vector<Digest> child_digests(const std::vector<LineageRef>& inputs) {
    std::vector<Digest> d;
    d.reserve(inputs.size());
    for (const auto& r : inputs) d.push_back(r.digest());
    return d;
}

} // namespace

Digest LineageRef::digest() const { return node->digest(output); }

Digest compute_digest(NodeKind kind, std::string_view opcode, std::string_view payload,
                      const std::vector<Digest>& children) {
    std::string buf;
    buf.reserve(16 + opcode.size() + payload.size() + 16 * children.size());
    buf.push_back(static_cast<char>(kind));
    put_u32(buf, static_cast<std::uint32_t>(opcode.size()));
    buf.append(opcode);
    put_u32(buf, static_cast<std::uint32_t>(payload.size()));
    buf.append(payload);
    put_u32(buf, static_cast<std::uint32_t>(children.size()));
    for (const auto& c : children) {
        put_u64(buf, c.hi);
        put_u64(buf, c.lo);
    }
    return murmur3_128(buf.data(), buf.size(), kDigestSeed);
}

const char* leaf_opcode(NodeKind kind) {
    switch (kind) {
    case NodeKind::Input: return "IN";
    case NodeKind::Literal: return "LIT";
    case NodeKind::Seed: return "SEED";
    case NodeKind::Placeholder: return "PH";
    case NodeKind::Path: return "PATH";
    case NodeKind::Op: break;
    }
    return "";
}

LineageItem::LineageItem(std::int64_t id, NodeKind kind, std::string opcode, std::string payload,
                         std::vector<LineageRef> inputs, LiveCounter live)
    : id_(id), kind_(kind), opcode_(std::move(opcode)), payload_(std::move(payload)), inputs_(std::move(inputs)),
      live_(std::move(live)) {
    digests_.push_back(compute_digest(kind_, opcode_, payload_, child_digests(inputs_)));
    if (live_) live_->fetch_add(1, std::memory_order_relaxed);
}

LineageItem::LineageItem(std::int64_t id, std::string payload, std::vector<LineageRef> inputs,
                         std::vector<std::pair<std::uint32_t, std::string>> literals,
                         std::shared_ptr<const PathTemplate> tmpl, std::vector<Digest> digests, LiveCounter live)
    : id_(id), kind_(NodeKind::Path), opcode_(leaf_opcode(NodeKind::Path)), payload_(std::move(payload)),
      inputs_(std::move(inputs)), digests_(std::move(digests)), template_(std::move(tmpl)),
      literals_(std::move(literals)), live_(std::move(live)) {
    if (live_) live_->fetch_add(1, std::memory_order_relaxed);
}

LineageItem::~LineageItem() {
    if (live_) live_->fetch_sub(1, std::memory_order_relaxed);
    // Release long chains without recursing through nested destructors.
    std::vector<LineageRef> pending = std::move(inputs_);
    while (!pending.empty()) {
        LineageRef r = std::move(pending.back());
        pending.pop_back();
        if (r.node && r.node.use_count() == 1) {
            auto& children = r.node->inputs_;
            for (auto& c : children) pending.push_back(std::move(c));
            children.clear();
        }
    }
}

Tracer::Tracer() : live_(std::make_shared<std::atomic<std::int64_t>>(0)) {}

LineageRef Tracer::make(NodeKind kind, std::string opcode, std::string payload, std::vector<LineageRef> inputs) {
    return {std::make_shared<const LineageItem>(next_id_++, kind, std::move(opcode), std::move(payload),
                                                std::move(inputs), live_),
            0};
}

LineageRef Tracer::input(std::string name) { return make(NodeKind::Input, leaf_opcode(NodeKind::Input), std::move(name), {}); }

LineageRef Tracer::literal(std::string text) {
    return make(NodeKind::Literal, leaf_opcode(NodeKind::Literal), std::move(text), {});
}

LineageRef Tracer::seed(std::uint64_t value) {
    return make(NodeKind::Seed, leaf_opcode(NodeKind::Seed), std::to_string(value), {});
}

LineageRef Tracer::op(std::string opcode, std::vector<LineageRef> inputs, std::string payload) {
    return make(NodeKind::Op, std::move(opcode), std::move(payload), std::move(inputs));
}

LineageRef Tracer::placeholder(std::size_t index) {
    return make(NodeKind::Placeholder, leaf_opcode(NodeKind::Placeholder), std::to_string(index), {});
}

LineageRef Tracer::path(std::string payload, std::vector<LineageRef> inputs, std::shared_ptr<const PathTemplate> tmpl,
                        std::vector<Digest> digests, std::vector<std::pair<std::uint32_t, std::string>> literals) {
    return {std::make_shared<const LineageItem>(next_id_++, std::move(payload), std::move(inputs), std::move(literals),
                                                std::move(tmpl), std::move(digests), live_),
            0};
}

std::vector<LineageRef> instantiate(Tracer& tracer, const PathTemplate& tmpl, const std::vector<LineageRef>& bound) {
    if (bound.size() != tmpl.num_placeholders)
        throw std::invalid_argument("template expects " + std::to_string(tmpl.num_placeholders) + " bound inputs");
    std::unordered_map<const LineageItem*, LineageRef> made;
    std::vector<NodePtr> roots;
    for (const auto& o : tmpl.outputs) roots.push_back(o.node);
    post_order(roots, [&](const NodePtr& n) {
        if (n->kind() == NodeKind::Placeholder) {
            made[n.get()] = bound.at(std::stoul(n->payload()));
            return;
        }
        std::vector<LineageRef> inputs;
        for (const auto& c : n->inputs()) inputs.push_back(made.at(c.node.get()));
        made[n.get()] = tracer.make(n->kind(), n->opcode(), n->payload(), std::move(inputs));
    });
    std::vector<LineageRef> out;
    for (const auto& o : tmpl.outputs) out.push_back(made.at(o.node.get()));
    return out;
}

LineageRef Expander::resolve(const LineageRef& ref) const {
    if (ref.node->kind() == NodeKind::Path) return paths_.at(ref.node.get()).at(ref.output);
    return {nodes_.at(ref.node.get()), 0};
}

LineageRef Expander::expand(const LineageRef& ref) {
    if (!ref) return ref;
    // nodes resolved by earlier calls are reused, keeping shared history shared
    const auto seen = [&](const NodePtr& n) { return nodes_.count(n.get()) > 0 || paths_.count(n.get()) > 0; };
    post_order({ref.node}, [&](const NodePtr& n) {
        if (seen(n)) return;
        if (n->kind() == NodeKind::Path) {
            std::vector<LineageRef> bound;
            auto lit = n->bound_literals().begin();
            for (const auto& c : n->inputs()) {
                for (; lit != n->bound_literals().end() && lit->first == bound.size(); ++lit)
                    bound.push_back(tracer_.literal(lit->second));
                bound.push_back(resolve(c));
            }
            for (; lit != n->bound_literals().end(); ++lit) bound.push_back(tracer_.literal(lit->second));
            paths_[n.get()] = instantiate(tracer_, *n->path_template(), bound);
            return;
        }
        bool changed = false;
        std::vector<LineageRef> inputs;
        for (const auto& c : n->inputs()) {
            inputs.push_back(resolve(c));
            changed = changed || !(inputs.back() == c);
        }
        nodes_[n.get()] = changed ? tracer_.make(n->kind(), n->opcode(), n->payload(), std::move(inputs)).node : n;
    }, [&](const NodePtr& n) { return !seen(n); });
    return resolve(ref);
}

} // namespace tessera::lineage
