// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Federated tensors: metadata mapping disjoint row ranges to variables held
// by remote workers. Uncovered rows read as zero.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include "tessera/core/kernels.hpp"
#include "tessera/fed/client.hpp"

namespace tessera::fed {

/// Pool of worker connections shared by the federated tensors of a session.
class Federation {
public:
    std::shared_ptr<WorkerClient> client(const std::string& endpoint);
    std::vector<std::shared_ptr<WorkerClient>> clients() const;

    /// Upper bound for materializing a federated tensor locally.
    std::size_t collect_budget_bytes = std::size_t{1} << 31;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<WorkerClient>> clients_;
};

struct FederatedRange {
    std::vector<kernels::Range> ranges; // rows, then columns (always the full width)
    std::string endpoint;
    std::uint64_t var = 0;

    const kernels::Range& rows() const { return ranges[0]; }
};

struct FederatedTensor {
    Shape dims;
    ValueType vtype = ValueType::FP64;
    std::vector<FederatedRange> ranges;
    std::shared_ptr<Federation> federation;
};

/// A row range with either local data to push or a path the worker reads.
struct FedPart {
    kernels::Range rows;
    std::variant<TensorPtr, std::string> data;
    std::string endpoint;
};

FederatedTensor fed_init(std::shared_ptr<Federation> federation, Shape dims, std::vector<FedPart> parts);
BasicTensorBlock fed_matvec(const FederatedTensor& f, const BasicTensorBlock& v);
BasicTensorBlock fed_vecmat(const BasicTensorBlock& v, const FederatedTensor& f);
double fed_sum(const FederatedTensor& f);
/// rowSums (m x 1) or colSums (1 x n).
BasicTensorBlock fed_aggregate(kernels::AggKind kind, const FederatedTensor& f);
BasicTensorBlock collect(const FederatedTensor& f);
/// Frees the remote variables of `f`.
void release(const FederatedTensor& f) noexcept;

} // namespace tessera::fed
