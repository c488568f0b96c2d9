// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Text form of lineage traces, one node per line in topological order:
//   <id> <opcode> (<payload>) [<child-id>,...]
// Named outputs follow as `OUT <name> <id>` lines. Deduplicated loop nodes
// are expanded before writing.

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tessera/lineage/lineage.hpp"

namespace tessera::lineage {

std::string serialize(const LineageRef& root);
std::string serialize_outputs(const std::vector<std::pair<std::string, LineageRef>>& outputs);

struct ParsedTrace {
    std::vector<LineageRef> nodes; // by local id
    std::vector<std::pair<std::string, LineageRef>> outputs;
};

ParsedTrace parse_trace(std::string_view text, Tracer& tracer);

} // namespace tessera::lineage
