// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/lineage/dedup.hpp"

#include <algorithm>
#include <unordered_map>

#include "graph.hpp"

namespace tessera::lineage {

namespace {

struct RefKey {
    const LineageItem* node;
    std::uint32_t output;
    bool operator==(const RefKey&) const = default;
};

struct RefKeyHash {
    std::size_t operator()(const RefKey& k) const noexcept {
        return std::hash<const void*>()(k.node) ^ (static_cast<std::size_t>(k.output) << 1);
    }
};

} // namespace

LoopDeduplicator::LoopDeduplicator(Tracer& tracer, std::size_t max_paths) : tracer_(tracer), max_paths_(max_paths) {}

bool LoopDeduplicator::begin_iteration(const std::string& site) {
    if (active_) return false;
    auto& s = sites_[site];
    if (s.disabled) {
        ++stats_.eager_iterations;
        return false;
    }
    active_ = true;
    site_ = site;
    decisions_.clear();
    start_id_ = tracer_.next_id();
    return true;
}

void LoopDeduplicator::record_decision(char decision) {
    if (active_) decisions_.push_back(decision);
}

const PathTemplate* LoopDeduplicator::find_template(const std::string& site, const std::string& path_id) const {
    auto it = sites_.find(site);
    if (it == sites_.end()) return nullptr;
    auto p = it->second.paths.find(path_id);
    return p == it->second.paths.end() ? nullptr : p->second.get();
}

std::size_t LoopDeduplicator::num_paths(const std::string& site) const {
    auto it = sites_.find(site);
    return it == sites_.end() ? 0 : it->second.paths.size();
}

void LoopDeduplicator::end_iteration(const std::vector<std::pair<std::string, LineageRef*>>& vars) {
    if (!active_) return;
    active_ = false;

    std::vector<std::pair<std::string, LineageRef*>> outputs;
    for (const auto& [name, ref] : vars)
        if (ref && *ref && internal(*ref->node)) outputs.emplace_back(name, ref);
    if (outputs.empty()) return;
    std::sort(outputs.begin(), outputs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    // Digests of the iteration trace with placeholders standing in for
    // everything that flows into it.
    std::unordered_map<RefKey, std::size_t, RefKeyHash> slot;
    std::vector<LineageRef> bound;
    std::unordered_map<const LineageItem*, Digest> shape;
    const auto input_digest = [&](const LineageRef& c) {
        if (internal(*c.node)) return shape.at(c.node.get());
        auto [it, fresh] = slot.try_emplace(RefKey{c.node.get(), c.output}, bound.size());
        if (fresh) bound.push_back(c);
        return compute_digest(NodeKind::Placeholder, leaf_opcode(NodeKind::Placeholder), std::to_string(it->second), {});
    };
    std::vector<NodePtr> roots;
    for (const auto& o : outputs) roots.push_back(o.second->node);
    post_order(
        roots,
        [&](const NodePtr& n) {
            if (!internal(*n)) return;
            std::vector<Digest> kids;
            for (const auto& c : n->inputs()) kids.push_back(input_digest(c));
            shape[n.get()] = compute_digest(n->kind(), n->opcode(), n->payload(), kids);
        },
        [&](const NodePtr& n) { return internal(*n); });

    std::vector<std::string> names;
    std::vector<Digest> signature;
    for (const auto& o : outputs) {
        names.push_back(o.first);
        signature.push_back(shape.at(o.second->node.get()));
    }

    Site& site = sites_[site_];
    std::shared_ptr<const PathTemplate> tmpl;
    if (auto it = site.paths.find(decisions_); it != site.paths.end()) {
        tmpl = it->second;
        bool same = tmpl->output_names == names && tmpl->num_placeholders == bound.size();
        for (std::size_t k = 0; same && k < signature.size(); ++k) same = tmpl->outputs[k].digest() == signature[k];
        if (!same) {
            ++stats_.eager_iterations;
            return;
        }
    } else {
        if (site.paths.size() >= max_paths_) {
            site.disabled = true;
            ++stats_.disabled_sites;
            ++stats_.eager_iterations;
            return;
        }
        auto fresh = std::make_shared<PathTemplate>();
        fresh->site = site_;
        fresh->path_id = decisions_;
        fresh->num_placeholders = bound.size();
        fresh->output_names = names;
        std::vector<LineageRef> holders;
        for (std::size_t i = 0; i < bound.size(); ++i) holders.push_back(tracer_.placeholder(i));
        std::unordered_map<const LineageItem*, LineageRef> clone;
        post_order(
            roots,
            [&](const NodePtr& n) {
                if (!internal(*n)) return;
                std::vector<LineageRef> inputs;
                for (const auto& c : n->inputs())
                    inputs.push_back(internal(*c.node) ? clone.at(c.node.get())
                                                       : holders[slot.at(RefKey{c.node.get(), c.output})]);
                clone[n.get()] = tracer_.make(n->kind(), n->opcode(), n->payload(), std::move(inputs));
            },
            [&](const NodePtr& n) { return internal(*n); });
        for (const auto& o : outputs) fresh->outputs.push_back(clone.at(o.second->node.get()));
        tmpl = fresh;
        site.paths.emplace(decisions_, tmpl);
        ++stats_.templates;
    }

    // literal leaves (loop variables mostly) are kept by value
    std::vector<LineageRef> held;
    std::vector<std::pair<std::uint32_t, std::string>> literals;
    for (std::uint32_t i = 0; i < bound.size(); ++i) {
        const auto& b = bound[i];
        if (b.node->kind() == NodeKind::Literal && b.node->inputs().empty())
            literals.emplace_back(i, b.node->payload());
        else
            held.push_back(b);
    }
    std::vector<Digest> digests;
    for (const auto& o : outputs) digests.push_back(o.second->digest());
    LineageRef node =
        tracer_.path(site_ + ":" + decisions_, std::move(held), tmpl, std::move(digests), std::move(literals));
    for (std::uint32_t k = 0; k < outputs.size(); ++k) *outputs[k].second = LineageRef{node.node, k};
    ++stats_.path_nodes;
}

} // namespace tessera::lineage
