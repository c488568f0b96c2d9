// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unordered_set>
#include <utility>
#include <vector>

#include "tessera/lineage/lineage.hpp"

namespace tessera::lineage {

using NodePtr = std::shared_ptr<const LineageItem>;

/// Visits every node reachable from `roots` once, children before parents,
/// without recursion. `descend(node)` may stop the walk below a node.
template <class Visit, class Descend>
void post_order(const std::vector<NodePtr>& roots, Visit&& visit, Descend&& descend) {
    std::unordered_set<const LineageItem*> done;
    std::vector<std::pair<NodePtr, std::size_t>> stack;
    for (const auto& root : roots) {
        if (!root || done.count(root.get())) continue;
        stack.emplace_back(root, 0);
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            const bool walk = descend(node);
            if (walk && next < node->inputs().size()) {
                const NodePtr& child = node->inputs()[next++].node;
                if (!done.count(child.get())) stack.emplace_back(child, 0);
                continue;
            }
            if (done.insert(node.get()).second) visit(node);
            stack.pop_back();
        }
    }
}

template <class Visit>
void post_order(const std::vector<NodePtr>& roots, Visit&& visit) {
    post_order(roots, std::forward<Visit>(visit), [](const NodePtr&) { return true; });
}

} // namespace tessera::lineage
