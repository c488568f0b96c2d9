// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Built-in algorithms. Regression, selection and tuning are written in the
// scripting language and compiled into every program that calls them; a
// few helpers are native.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tessera/core/data_tensor.hpp"
#include "tessera/core/tensor_block.hpp"
#include "tessera/interp/session.hpp"

namespace tessera::builtins {

/// Script source of the library functions (lmDS, lm, steplm, cvlm, gridSearchLM).
const std::string& library_source();

double aic(double rss, double m, double p);

/// Narrowest type per column: BOOLEAN < INT64 < FP64 < STRING.
std::vector<ValueType> detect_schema(const DataTensorBlock& frame);

struct Generated {
    BasicTensorBlock x;
    BasicTensorBlock y;
};
/// X uniform(0,1) with cell retention probability `sparsity`, y = X w + 0.01 noise.
Generated gen_data(std::int64_t rows, std::int64_t cols, double sparsity, std::uint64_t seed);

struct ModelFit {
    BasicTensorBlock beta;
    double rss = 0.0;
    double aic = 0.0;
    std::vector<std::int64_t> selected; // steplm only, 0-based
};

// Convenience entry points running the library inside a session.
BasicTensorBlock lm_ds(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y, double lambda);
ModelFit steplm(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y, double lambda);
std::vector<ModelFit> cvlm(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y, std::int64_t k,
                           double lambda);
BasicTensorBlock grid_search_lm(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y,
                                const std::vector<double>& lambdas);

} // namespace tessera::builtins
