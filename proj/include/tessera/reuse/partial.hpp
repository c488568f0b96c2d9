// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Partial reuse: computing a missing intermediate from cached pieces plus
// small fresh computations. Three rewrite rules are supported:
//   R1  tsmm(cbind(A, B))          from cached tsmm(A)
//   R2  tsmm(rbind(F1..Fk))        as the sum of per-part Grams
//   R3  t(rbind(F..)) %*% rbind(G..) as the sum of per-part products

#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tessera/core/kernels.hpp"
#include "tessera/lineage/lineage.hpp"
#include "tessera/reuse/cache.hpp"

namespace tessera::reuse {

namespace opcodes {
inline constexpr const char* kTsmm = "tsmm";
inline constexpr const char* kMatmul = "matmul";
inline constexpr const char* kTranspose = "transpose";
inline constexpr const char* kRbind = "rbind";
inline constexpr const char* kCbind = "cbind";
} // namespace opcodes

/// Extents of the parts of bind results, keyed by the bind output digest.
class BindRegistry {
public:
    struct Info {
        kernels::Axis axis;
        std::vector<std::int64_t> extents;
        std::vector<Digest> parts;
    };

    void record(const Digest& output, Info info);
    std::optional<Info> find(const Digest& output) const;
    void clear();

private:
    mutable std::mutex mu_;
    std::unordered_map<Digest, Info> infos_;
};

/// Digest of tsmm / transpose / matmul / bind nodes over the given children.
Digest op_digest(std::string_view opcode, const std::vector<Digest>& children);

struct PartialResult {
    TensorPtr value;
    std::string rule;
};

class PartialReuse {
public:
    /// Called for every kernel a compensation plan executes.
    using Observer = std::function<void(std::string_view opcode, double millis)>;

    PartialReuse(ReuseCache& cache, BindRegistry& binds) : cache_(cache), binds_(binds) {}

    void set_observer(Observer obs) { observer_ = std::move(obs); }

    /// Tries the rule set for an instruction whose output lineage is `out`;
    /// `operands` are the instruction's input values in order.
    std::optional<PartialResult> try_partial(const lineage::LineageItem& out,
                                             const std::vector<TensorPtr>& operands);

private:
    std::optional<PartialResult> tsmm_cbind(const Digest& input, const BasicTensorBlock& x);
    std::optional<PartialResult> tsmm_rbind(const Digest& input, const BasicTensorBlock& x);
    std::optional<PartialResult> matmul_rbind(const lineage::LineageItem& out, const BasicTensorBlock& t,
                                              const BasicTensorBlock& y);
    TensorPtr run(std::string_view opcode, const std::function<BasicTensorBlock()>& kernel, const Digest& key);

    ReuseCache& cache_;
    BindRegistry& binds_;
    Observer observer_;
};

} // namespace tessera::reuse
