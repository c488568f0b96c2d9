// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tessera/fed/federated.hpp"
#include "tessera/interp/session.hpp"
#include "tessera/lineage/dedup.hpp"
#include "tessera/reuse/partial.hpp"

namespace tessera::interp {

struct Var {
    Value value;
    lineage::LineageRef lin;
};
using Frame = std::unordered_map<std::string, Var>;

struct OpContext {
    std::ostream& out;
    ExecStats& stats;
    int line = 0;
};

/// Evaluates a kernel opcode over local values. Lists are only accepted
/// where no lineage bookkeeping is needed (length).
std::vector<Value> evaluate(const std::string& opcode, const std::vector<Value>& in, OpContext& ctx);

bool truthy(const Value& v);

class Executor {
public:
    explicit Executor(SessionConfig config);

    void run(const CompiledProgram& program);

    SessionConfig config;
    Frame globals;
    lineage::Tracer tracer;
    lineage::LoopDeduplicator dedup;
    reuse::ReuseCache cache;
    reuse::BindRegistry binds;
    ExecStats stats;

    std::ostream& out() const;

private:
    bool reuse_enabled() const {
        return config.lineage == LineageMode::ReuseFull || config.lineage == LineageMode::ReusePartial;
    }

    void blocks(const std::vector<Block>& bs, Frame& frame);
    void instructions(const std::vector<Instruction>& is, Frame& frame);
    void iterate(const Block& loop, Frame& frame);
    void exec(const Instruction& ins, Frame& frame);
    void call(const Instruction& ins, std::vector<Value> vals, std::vector<lineage::LineageRef> lins, Frame& frame);
    bool list_op(const Instruction& ins, const std::vector<Value>& vals, const std::vector<lineage::LineageRef>& lins,
                 Frame& frame);
    void federated_op(const Instruction& ins, std::vector<Value>& vals, const std::vector<lineage::LineageRef>& lins,
                      Frame& frame);
    std::optional<TensorPtr> decompose(const Instruction& ins, const lineage::LineageItem& node,
                                       const std::vector<Value>& vals);
    void record_bind(const std::string& opcode, const std::vector<Value>& parts,
                     const std::vector<lineage::LineageRef>& lins, const lineage::LineageRef& out);
    void count(std::string_view opcode, double ms);
    std::uint64_t derive_seed();
    Scalar operand_scalar(const Operand& op, const Frame& frame, const char* what) const;

    const CompiledProgram* program_ = nullptr;
    reuse::ReuseCache scratch_;
    reuse::PartialReuse partial_;
    reuse::PartialReuse scratch_partial_;
    std::shared_ptr<fed::Federation> federation_;
    lineage::LineageRef null_lin_;
    std::uint64_t seed_counter_ = 0;
};

} // namespace tessera::interp
