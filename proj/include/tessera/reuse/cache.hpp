// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Lineage-keyed cache of intermediates with cost-per-byte eviction.

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "tessera/core/tensor_block.hpp"
#include "tessera/lineage/digest.hpp"

namespace tessera::reuse {

using lineage::Digest;

/// A cached intermediate: a tensor or a scalar.
struct CacheValue {
    TensorPtr tensor;
    std::optional<Scalar> scalar;

    std::size_t size_bytes() const;
};

struct CacheConfig {
    std::size_t capacity_bytes = std::size_t{256} << 20;
    double cost_floor_ms = 1.0;
    /// Opcodes admitted regardless of the cost floor.
    std::set<std::string, std::less<>> always_admit{"tsmm", "matmul"};
};

struct CacheStats {
    std::int64_t hits = 0;
    std::int64_t misses = 0;
    std::int64_t puts = 0;
    std::int64_t rejected = 0;
    std::int64_t evictions = 0;
    std::int64_t partial_hits = 0;
    std::map<std::string, std::int64_t, std::less<>> hits_by_opcode;
    std::map<std::string, std::int64_t, std::less<>> partial_by_rule;
};

class ReuseCache {
public:
    explicit ReuseCache(CacheConfig config = {});

    /// Full-reuse lookup; counts a hit or miss.
    std::optional<CacheValue> probe(const Digest& key, std::string_view opcode = {});
    /// Lookup without touching statistics or recency.
    std::optional<CacheValue> peek(const Digest& key) const;
    bool contains(const Digest& key) const;

    /// Best-effort insert. Returns whether the value was admitted.
    bool put(const Digest& key, CacheValue value, double cost_ms, std::string_view opcode = {});

    void pin(const Digest& key);
    void unpin(const Digest& key);
    void record_partial(std::string_view rule);
    void clear();

    std::size_t bytes() const;
    std::size_t entries() const;
    std::size_t capacity() const noexcept { return config_.capacity_bytes; }
    CacheStats stats() const;

private:
    struct Entry {
        CacheValue value;
        std::size_t size = 0;
        double cost_ms = 0.0;
        std::uint64_t last_used = 0;
        int pins = 0;
    };

    bool make_room(std::size_t needed);

    CacheConfig config_;
    mutable std::mutex mu_;
    std::unordered_map<Digest, Entry> entries_;
    std::size_t bytes_ = 0;
    std::uint64_t clock_ = 0;
    CacheStats stats_;
};

} // namespace tessera::reuse
