// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace tessera {

/// Worker threads used by kernels; defaults to the hardware parallelism.
int num_threads() noexcept;
void set_num_threads(int n) noexcept;

/// Splits [0, n) into at most num_threads() contiguous ranges of at least
/// `grain` items and runs `body(begin, end)` on each. Runs inline when one
/// range suffices.
void parallel_for(std::int64_t n, std::int64_t grain,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

/// Runs `body(task)` for task in [0, tasks), distributing tasks dynamically.
void parallel_tasks(std::int64_t tasks, const std::function<void(std::int64_t)>& body);

} // namespace tessera
