// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Lineage DAGs: one node per executed operation, with leaves for named
// inputs, literals and system-generated seeds. Every node carries a 128-bit
// Merkle digest of its opcode, payload and ordered child digests.

#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tessera/lineage/digest.hpp"

namespace tessera::lineage {

enum class NodeKind : std::uint8_t { Input = 0, Literal = 1, Seed = 2, Op = 3, Placeholder = 4, Path = 5 };

class LineageItem;
struct PathTemplate;

/// One output of a lineage node. Path nodes have one output per
/// variable assigned in the deduplicated loop iteration.
struct LineageRef {
    std::shared_ptr<const LineageItem> node;
    std::uint32_t output = 0;

    Digest digest() const;
    explicit operator bool() const noexcept { return node != nullptr; }
    friend bool operator==(const LineageRef& a, const LineageRef& b) {
        return a.node == b.node && a.output == b.output;
    }
};

using LiveCounter = std::shared_ptr<std::atomic<std::int64_t>>;

class LineageItem {
public:
    LineageItem(std::int64_t id, NodeKind kind, std::string opcode, std::string payload,
                std::vector<LineageRef> inputs, LiveCounter live);
    /// Path node: digests are supplied per output. Literal leaves bound to
    /// the template are stored by value as (placeholder, text) pairs; the
    /// other placeholders take `inputs` in order.
    LineageItem(std::int64_t id, std::string payload, std::vector<LineageRef> inputs,
                std::vector<std::pair<std::uint32_t, std::string>> literals, std::shared_ptr<const PathTemplate> tmpl,
                std::vector<Digest> digests, LiveCounter live);
    ~LineageItem();
    LineageItem(const LineageItem&) = delete;
    LineageItem& operator=(const LineageItem&) = delete;

    std::int64_t id() const noexcept { return id_; }
    NodeKind kind() const noexcept { return kind_; }
    const std::string& opcode() const noexcept { return opcode_; }
    const std::string& payload() const noexcept { return payload_; }
    const std::vector<LineageRef>& inputs() const noexcept { return inputs_; }
    const Digest& digest(std::uint32_t output = 0) const { return digests_.at(output); }
    std::size_t num_outputs() const noexcept { return digests_.size(); }
    const std::shared_ptr<const PathTemplate>& path_template() const noexcept { return template_; }
    const std::vector<std::pair<std::uint32_t, std::string>>& bound_literals() const noexcept { return literals_; }

private:
    std::int64_t id_;
    NodeKind kind_;
    std::string opcode_;
    std::string payload_;
    mutable std::vector<LineageRef> inputs_; // released iteratively on destruction
    std::vector<Digest> digests_;
    std::shared_ptr<const PathTemplate> template_;
    std::vector<std::pair<std::uint32_t, std::string>> literals_;
    LiveCounter live_;
};

/// Digest of a node from its parts; used for hypothetical lineage as well.
Digest compute_digest(NodeKind kind, std::string_view opcode, std::string_view payload,
                      const std::vector<Digest>& children);

/// Opcode text of leaf kinds in serialized traces.
const char* leaf_opcode(NodeKind kind);

/// Creates nodes for one session and tracks how many are alive.
class Tracer {
public:
    Tracer();

    LineageRef input(std::string name);
    LineageRef literal(std::string canonical_text);
    LineageRef seed(std::uint64_t value);
    LineageRef op(std::string opcode, std::vector<LineageRef> inputs, std::string payload = {});
    LineageRef placeholder(std::size_t index);
    LineageRef path(std::string payload, std::vector<LineageRef> inputs, std::shared_ptr<const PathTemplate> tmpl,
                    std::vector<Digest> digests, std::vector<std::pair<std::uint32_t, std::string>> literals = {});
    LineageRef make(NodeKind kind, std::string opcode, std::string payload, std::vector<LineageRef> inputs);

    std::int64_t next_id() const noexcept { return next_id_; }
    /// Nodes created by this tracer that are still referenced.
    std::int64_t live_nodes() const noexcept { return live_->load(); }

private:
    std::int64_t next_id_ = 0;
    LiveCounter live_;
};

/// Per-path loop body trace with placeholder leaves for the values flowing
/// into the iteration.
struct PathTemplate {
    std::string site;
    std::string path_id;
    std::size_t num_placeholders = 0;
    std::vector<std::string> output_names;
    std::vector<LineageRef> outputs;
};

/// Materializes deduplicated path nodes into an equivalent eager DAG.
class Expander {
public:
    explicit Expander(Tracer& tracer) : tracer_(tracer) {}
    LineageRef expand(const LineageRef& ref);

private:
    LineageRef resolve(const LineageRef& ref) const;

    Tracer& tracer_;
    std::unordered_map<const LineageItem*, std::shared_ptr<const LineageItem>> nodes_;
    std::unordered_map<const LineageItem*, std::vector<LineageRef>> paths_;
};

/// Instantiates a template with concrete leaves bound to its placeholders.
std::vector<LineageRef> instantiate(Tracer& tracer, const PathTemplate& tmpl, const std::vector<LineageRef>& bound);

} // namespace tessera::lineage
