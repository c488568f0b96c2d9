// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/reuse/cache.hpp"

#include <algorithm>
#include <vector>

namespace tessera::reuse {

std::size_t CacheValue::size_bytes() const {
    if (tensor) return tensor->size_bytes();
    if (scalar && scalar->vtype() == ValueType::STRING) return scalar->as_string().size() + 8;
    return 8;
}

ReuseCache::ReuseCache(CacheConfig config) : config_(std::move(config)) {}

std::optional<CacheValue> ReuseCache::probe(const Digest& key, std::string_view opcode) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        ++stats_.misses;
        return std::nullopt;
    }
    ++stats_.hits;
    if (!opcode.empty()) {
        auto h = stats_.hits_by_opcode.find(opcode);
        if (h == stats_.hits_by_opcode.end()) h = stats_.hits_by_opcode.emplace(std::string(opcode), 0).first;
        ++h->second;
    }
    it->second.last_used = ++clock_;
    return it->second.value;
}

std::optional<CacheValue> ReuseCache::peek(const Digest& key) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
}

bool ReuseCache::contains(const Digest& key) const {
    std::lock_guard lock(mu_);
    return entries_.count(key) > 0;
}

bool ReuseCache::make_room(std::size_t needed) {
    if (bytes_ + needed <= config_.capacity_bytes) return true;
    std::vector<std::pair<const Digest*, const Entry*>> victims;
    for (const auto& [k, e] : entries_)
        if (e.pins == 0) victims.emplace_back(&k, &e);
    std::sort(victims.begin(), victims.end(), [](const auto& a, const auto& b) {
        const double sa = a.second->cost_ms / static_cast<double>(std::max<std::size_t>(a.second->size, 1));
        const double sb = b.second->cost_ms / static_cast<double>(std::max<std::size_t>(b.second->size, 1));
        if (sa != sb) return sa < sb;
        return a.second->last_used < b.second->last_used;
    });
    std::size_t freeable = 0;
    for (const auto& v : victims) freeable += v.second->size;
    if (bytes_ - freeable + needed > config_.capacity_bytes) return false;
    std::vector<Digest> evict;
    for (const auto& v : victims) {
        if (bytes_ + needed <= config_.capacity_bytes) break;
        bytes_ -= v.second->size;
        evict.push_back(*v.first);
    }
    for (const auto& k : evict) entries_.erase(k);
    stats_.evictions += static_cast<std::int64_t>(evict.size());
    return true;
}

bool ReuseCache::put(const Digest& key, CacheValue value, double cost_ms, std::string_view opcode) {
    std::lock_guard lock(mu_);
    const std::size_t size = value.size_bytes();
    const bool exempt = config_.always_admit.count(opcode) > 0;
    if (entries_.count(key)) return true;
    if (size > config_.capacity_bytes || (!exempt && cost_ms < config_.cost_floor_ms) || !make_room(size)) {
        ++stats_.rejected;
        return false;
    }
    Entry e{std::move(value), size, cost_ms, ++clock_, 0};
    entries_.emplace(key, std::move(e));
    bytes_ += size;
    ++stats_.puts;
    return true;
}

void ReuseCache::pin(const Digest& key) {
    std::lock_guard lock(mu_);
    if (auto it = entries_.find(key); it != entries_.end()) ++it->second.pins;
}

void ReuseCache::unpin(const Digest& key) {
    std::lock_guard lock(mu_);
    if (auto it = entries_.find(key); it != entries_.end() && it->second.pins > 0) --it->second.pins;
}

void ReuseCache::record_partial(std::string_view rule) {
    std::lock_guard lock(mu_);
    ++stats_.partial_hits;
    auto it = stats_.partial_by_rule.find(rule);
    if (it == stats_.partial_by_rule.end()) it = stats_.partial_by_rule.emplace(std::string(rule), 0).first;
    ++it->second;
}

void ReuseCache::clear() {
    std::lock_guard lock(mu_);
    entries_.clear();
    bytes_ = 0;
}

std::size_t ReuseCache::bytes() const {
    std::lock_guard lock(mu_);
    return bytes_;
}

std::size_t ReuseCache::entries() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

CacheStats ReuseCache::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

} // namespace tessera::reuse
