// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/builtins/builtins.hpp"

#include "tessera/core/kernels.hpp"

namespace tessera::builtins {

namespace {

void bind_data(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y, double lambda) {
    s.set_input("X", share(x));
    s.set_input("y", share(y));
    s.set_input("lambda", Scalar::fp64(lambda));
}

} // namespace

BasicTensorBlock lm_ds(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y, double lambda) {
    bind_data(s, x, y, lambda);
    s.run("beta = lmDS(X, y, lambda)", std::set<std::string>{"beta"});
    return *s.tensor("beta");
}

ModelFit steplm(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y, double lambda) {
    bind_data(s, x, y, lambda);
    s.run("[S, beta, rss, score, nsel, path] = steplm(X, y, lambda)",
          std::set<std::string>{"S", "beta", "rss", "score", "nsel"});
    ModelFit fit;
    const auto nsel = s.scalar("nsel").as_int();
    const auto sel = s.tensor("S");
    for (std::int64_t i = 0; i < nsel; ++i) fit.selected.push_back(static_cast<std::int64_t>(sel->f64_at(i)) - 1);
    fit.beta = *s.tensor("beta");
    fit.rss = s.scalar("rss").as_double();
    fit.aic = s.scalar("score").as_double();
    return fit;
}

std::vector<ModelFit> cvlm(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y, std::int64_t k,
                           double lambda) {
    bind_data(s, x, y, lambda);
    s.set_input("k", Scalar::int64(k));
    s.run("[B, rss] = cvlm(X, y, k, lambda)", std::set<std::string>{"B", "rss"});
    const auto b = s.tensor("B");
    const auto rss = s.tensor("rss");
    std::vector<ModelFit> fits;
    for (std::int64_t i = 0; i < k; ++i) {
        ModelFit f;
        f.beta = kernels::slice(*b, {{0, b->rows()}, {i, i + 1}});
        f.rss = rss->f64_at(i);
        f.aic = aic(f.rss, static_cast<double>(x.rows()), static_cast<double>(x.cols()));
        fits.push_back(std::move(f));
    }
    return fits;
}

BasicTensorBlock grid_search_lm(interp::Session& s, const BasicTensorBlock& x, const BasicTensorBlock& y,
                                const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw Error("gridSearchLM needs at least one lambda");
    s.set_input("X", share(x));
    s.set_input("y", share(y));
    auto list = std::make_shared<interp::ListValue>();
    for (double l : lambdas) list->items.emplace_back(Scalar::fp64(l));
    s.set_input("lambdas", std::shared_ptr<const interp::ListValue>(list));
    s.run("B = gridSearchLM(X, y, lambdas)", std::set<std::string>{"B"});
    return *s.tensor("B");
}

} // namespace tessera::builtins
