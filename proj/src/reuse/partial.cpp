// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/reuse/partial.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace tessera::reuse {

using lineage::NodeKind;

namespace {

// Pins cached operands for the lifetime of a plan.
class PinSet {
public:
    explicit PinSet(ReuseCache& cache) : cache_(cache) {}
    ~PinSet() {
        for (const auto& d : pinned_) cache_.unpin(d);
    }
    std::optional<CacheValue> get(const Digest& d) {
        auto v = cache_.peek(d);
        if (v && v->tensor) {
            cache_.pin(d);
            pinned_.push_back(d);
            return v;
        }
        return std::nullopt;
    }

private:
    ReuseCache& cache_;
    std::vector<Digest> pinned_;
};

void accumulate(std::vector<double>& acc, const BasicTensorBlock& part) {
    std::vector<double> v = part.to_dense_f64();
    if (acc.empty()) {
        acc = std::move(v);
        return;
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

} // namespace

void BindRegistry::record(const Digest& output, Info info) {
    std::lock_guard lock(mu_);
    if (infos_.size() > 100000) infos_.clear();
    infos_[output] = std::move(info);
}

std::optional<BindRegistry::Info> BindRegistry::find(const Digest& output) const {
    std::lock_guard lock(mu_);
    auto it = infos_.find(output);
    if (it == infos_.end()) return std::nullopt;
    return it->second;
}

void BindRegistry::clear() {
    std::lock_guard lock(mu_);
    infos_.clear();
}

Digest op_digest(std::string_view opcode, const std::vector<Digest>& children) {
    return lineage::compute_digest(NodeKind::Op, opcode, "", children);
}

TensorPtr PartialReuse::run(std::string_view opcode, const std::function<BasicTensorBlock()>& kernel,
                            const Digest& key) {
    const auto t0 = std::chrono::steady_clock::now();
    TensorPtr v = share(kernel());
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (observer_) observer_(opcode, ms);
    if (key != Digest{}) cache_.put(key, CacheValue{v, std::nullopt}, ms, opcode);
    return v;
}

std::optional<PartialResult> PartialReuse::try_partial(const lineage::LineageItem& out,
                                                       const std::vector<TensorPtr>& operands) {
    if (out.kind() != NodeKind::Op) return std::nullopt;
    if (out.opcode() == opcodes::kTsmm && operands.size() == 1 && operands[0] && out.inputs().size() == 1) {
        const Digest input = out.inputs()[0].digest();
        if (auto r = tsmm_cbind(input, *operands[0])) return r;
        return tsmm_rbind(input, *operands[0]);
    }
    if (out.opcode() == opcodes::kMatmul && operands.size() == 2 && operands[0] && operands[1] &&
        out.inputs().size() == 2)
        return matmul_rbind(out, *operands[0], *operands[1]);
    return std::nullopt;
}

std::optional<PartialResult> PartialReuse::tsmm_cbind(const Digest& input, const BasicTensorBlock& x) {
    auto info = binds_.find(input);
    if (!info || info->axis != kernels::Axis::Cols || info->parts.size() < 2 || x.rank() != 2) return std::nullopt;
    const std::size_t n = info->parts.size();
    const std::vector<Digest> prefix(info->parts.begin(), info->parts.end() - 1);
    const Digest head = prefix.size() == 1 ? prefix[0] : op_digest(opcodes::kCbind, prefix);
    PinSet pins(cache_);
    auto cached = pins.get(op_digest(opcodes::kTsmm, {head}));
    if (!cached) return std::nullopt;
    const std::int64_t wa = std::accumulate(info->extents.begin(), info->extents.end() - 1, std::int64_t{0});
    const std::int64_t w = x.cols(), m = x.rows(), wb = w - wa;
    const BasicTensorBlock& g = *cached->tensor;
    if (g.rank() != 2 || g.rows() != wa || g.cols() != wa || wb != info->extents[n - 1]) return std::nullopt;

    const BasicTensorBlock a = kernels::slice(x, {{0, m}, {0, wa}});
    const BasicTensorBlock b = kernels::slice(x, {{0, m}, {wa, w}});
    TensorPtr cross = run(opcodes::kMatmul, [&] { return kernels::matmul(kernels::transpose(a), b); }, Digest{});
    TensorPtr gb = run(opcodes::kTsmm, [&] { return kernels::tsmm(b); }, Digest{});

    std::vector<double> out(static_cast<std::size_t>(w * w));
    const auto at = [&](std::int64_t i, std::int64_t j) -> double& { return out[static_cast<std::size_t>(i * w + j)]; };
    for (std::int64_t i = 0; i < wa; ++i)
        for (std::int64_t j = 0; j < wa; ++j) at(i, j) = g.at(i, j);
    for (std::int64_t i = 0; i < wa; ++i)
        for (std::int64_t j = 0; j < wb; ++j) at(i, wa + j) = at(wa + j, i) = cross->at(i, j);
    for (std::int64_t i = 0; i < wb; ++i)
        for (std::int64_t j = 0; j < wb; ++j) at(wa + i, wa + j) = gb->at(i, j);
    cache_.record_partial("R1");
    return PartialResult{share(BasicTensorBlock::fp64({w, w}, std::move(out))), "R1"};
}

std::optional<PartialResult> PartialReuse::tsmm_rbind(const Digest& input, const BasicTensorBlock& x) {
    auto info = binds_.find(input);
    if (!info || info->axis != kernels::Axis::Rows || info->parts.size() < 2 || x.rank() != 2) return std::nullopt;
    if (std::accumulate(info->extents.begin(), info->extents.end(), std::int64_t{0}) != x.rows() ||
        std::count(info->extents.begin(), info->extents.end(), 0))
        return std::nullopt;
    PinSet pins(cache_);
    std::vector<double> acc;
    std::int64_t row = 0;
    for (std::size_t i = 0; i < info->parts.size(); ++i) {
        const Digest key = op_digest(opcodes::kTsmm, {info->parts[i]});
        const std::int64_t h = info->extents[i];
        TensorPtr gram;
        if (auto c = pins.get(key))
            gram = c->tensor;
        else
            gram = run(opcodes::kTsmm, [&] { return kernels::tsmm(kernels::slice(x, {{row, row + h}, {0, x.cols()}})); },
                       key);
        accumulate(acc, *gram);
        row += h;
    }
    cache_.record_partial("R2");
    return PartialResult{share(BasicTensorBlock::fp64({x.cols(), x.cols()}, std::move(acc))), "R2"};
}

std::optional<PartialResult> PartialReuse::matmul_rbind(const lineage::LineageItem& out, const BasicTensorBlock& t,
                                                        const BasicTensorBlock& y) {
    const auto& lhs = out.inputs()[0];
    if (lhs.node->kind() != NodeKind::Op || lhs.node->opcode() != opcodes::kTranspose || lhs.node->inputs().size() != 1)
        return std::nullopt;
    auto left = binds_.find(lhs.node->inputs()[0].digest());
    auto right = binds_.find(out.inputs()[1].digest());
    if (!left || !right || left->axis != kernels::Axis::Rows || right->axis != kernels::Axis::Rows ||
        left->extents != right->extents || left->parts.size() < 2)
        return std::nullopt;
    if (t.rank() != 2 || y.rank() != 2 || t.cols() != y.rows() ||
        std::count(left->extents.begin(), left->extents.end(), 0))
        return std::nullopt;
    PinSet pins(cache_);
    std::vector<double> acc;
    std::int64_t row = 0;
    for (std::size_t i = 0; i < left->parts.size(); ++i) {
        const Digest key =
            op_digest(opcodes::kMatmul, {op_digest(opcodes::kTranspose, {left->parts[i]}), right->parts[i]});
        const std::int64_t h = left->extents[i];
        TensorPtr prod;
        if (auto c = pins.get(key))
            prod = c->tensor;
        else
            prod = run(opcodes::kMatmul,
                       [&] {
                           return kernels::matmul(kernels::slice(t, {{0, t.rows()}, {row, row + h}}),
                                                  kernels::slice(y, {{row, row + h}, {0, y.cols()}}));
                       },
                       key);
        accumulate(acc, *prod);
        row += h;
    }
    cache_.record_partial("R3");
    return PartialResult{share(BasicTensorBlock::fp64({t.rows(), y.cols()}, std::move(acc))), "R3"};
}

} // namespace tessera::reuse
