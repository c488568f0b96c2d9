// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Runtime values bound to script variables.

#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "tessera/core/data_tensor.hpp"
#include "tessera/core/tensor_block.hpp"
#include "tessera/core/value_type.hpp"
#include "tessera/fed/federated.hpp"
#include "tessera/lineage/lineage.hpp"

namespace tessera::interp {

struct ListValue;
using ListPtr = std::shared_ptr<const ListValue>;
using FedPtr = std::shared_ptr<const fed::FederatedTensor>;

using Value = std::variant<std::monostate, Scalar, TensorPtr, FramePtr, ListPtr, FedPtr>;

/// Lists keep the lineage of each element so that binds over list elements
/// stay traceable per part.
struct ListValue {
    std::vector<Value> items;
    std::vector<lineage::LineageRef> lineage;
};

std::string type_name(const Value& v);

inline bool is_scalar(const Value& v) { return std::holds_alternative<Scalar>(v); }
inline bool is_tensor(const Value& v) { return std::holds_alternative<TensorPtr>(v); }
inline bool is_list(const Value& v) { return std::holds_alternative<ListPtr>(v); }
inline bool is_fed(const Value& v) { return std::holds_alternative<FedPtr>(v); }

const Scalar& as_scalar(const Value& v, const char* what);
const TensorPtr& as_tensor(const Value& v, const char* what);
const ListValue& as_list(const Value& v, const char* what);

/// Approximate resident size, used for statistics and cache admission.
std::size_t value_bytes(const Value& v);

/// Human-readable rendering for print().
std::string to_display(const Value& v);

} // namespace tessera::interp
