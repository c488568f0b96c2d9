// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/fed/federated.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace tessera::fed {

namespace {

// One thread per range; the first failure is rethrown after all joined.
template <class Fn> void for_each_range(std::size_t n, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        threads.emplace_back([&, i] {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ExecRequest exec_of(std::string opcode, std::vector<std::uint64_t> vars) {
    ExecRequest r{std::move(opcode), {}};
    for (auto v : vars) r.args.push_back({true, v, {}});
    return r;
}

void require_rows(const FederatedTensor& f) {
    if (f.dims.size() != 2) throw FedError("federated tensors must be rank 2");
    if (!f.federation && !f.ranges.empty()) throw FedError("federated tensor without a federation");
}

std::vector<double> dense_vector(const BasicTensorBlock& v, std::int64_t expected, const char* op) {
    if (v.rank() != 2 || (v.cols() != 1 && v.rows() != 1) || v.numel() != expected)
        throw ShapeError(std::string(op) + ": vector " + shape_string(v.dims()) + " does not conform to length " +
                         std::to_string(expected));
    return v.to_dense_f64();
}

// Runs `opcode` over each range's variable (plus an optional pushed operand)
// and returns the fetched partial results in range order.
std::vector<BasicTensorBlock> run_per_range(const FederatedTensor& f, const std::string& opcode,
                                            const std::function<std::optional<BasicTensorBlock>(std::size_t)>& operand,
                                            bool operand_first) {
    std::vector<BasicTensorBlock> partials(f.ranges.size());
    for_each_range(f.ranges.size(), [&](std::size_t i) {
        const FederatedRange& r = f.ranges[i];
        auto client = f.federation->client(r.endpoint);
        std::optional<BasicTensorBlock> extra = operand(i);
        std::vector<std::uint64_t> vars{r.var};
        std::optional<std::uint64_t> pushed;
        if (extra) {
            pushed = client->put(*extra);
            vars.insert(operand_first ? vars.begin() : vars.end(), *pushed);
        }
        const std::uint64_t out = client->exec(exec_of(opcode, vars));
        partials[i] = client->get(out);
        client->remove(out);
        if (pushed) client->remove(*pushed);
    });
    return partials;
}

} // namespace

std::shared_ptr<WorkerClient> Federation::client(const std::string& endpoint) {
    std::lock_guard lock(mu_);
    auto& c = clients_[endpoint];
    if (!c) {
        try {
            c = std::make_shared<WorkerClient>(endpoint);
        } catch (...) {
            clients_.erase(endpoint);
            throw;
        }
    }
    return c;
}

std::vector<std::shared_ptr<WorkerClient>> Federation::clients() const {
    std::lock_guard lock(mu_);
    std::vector<std::shared_ptr<WorkerClient>> out;
    for (const auto& [k, c] : clients_) out.push_back(c);
    return out;
}

FederatedTensor fed_init(std::shared_ptr<Federation> federation, Shape dims, std::vector<FedPart> parts) {
    if (dims.size() != 2) throw FedError("federated tensors must be rank 2 (row partitioned)");
    std::vector<std::size_t> order(parts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return parts[a].rows.begin < parts[b].rows.begin; });
    for (std::size_t k = 0; k < order.size(); ++k) {
        const FedPart& p = parts[order[k]];
        if (p.rows.begin < 0 || p.rows.end > dims[0] || p.rows.width() <= 0)
            throw FedError("federated range [" + std::to_string(p.rows.begin) + "," + std::to_string(p.rows.end) +
                           ") outside " + shape_string(dims));
        if (k > 0 && parts[order[k - 1]].rows.end > p.rows.begin) throw FedError("federated ranges overlap");
        if (auto* t = std::get_if<TensorPtr>(&p.data)) {
            if (!*t || (*t)->rank() != 2 || (*t)->rows() != p.rows.width() || (*t)->cols() != dims[1])
                throw FedError("federated part does not match its range; only full-width row partitions are supported");
            kernels::require_numeric(**t, "federated");
        }
    }

    FederatedTensor f{dims, ValueType::FP64, std::vector<FederatedRange>(parts.size()), federation};
    std::vector<bool> created(parts.size(), false);
    try {
        for_each_range(parts.size(), [&](std::size_t i) {
            const FedPart& p = parts[i];
            auto client = federation->client(p.endpoint);
            std::uint64_t var;
            if (auto* t = std::get_if<TensorPtr>(&p.data))
                var = client->put(**t);
            else
                var = client->exec(ExecRequest{"read", {{false, 0, std::get<std::string>(p.data)}}});
            f.ranges[i] = FederatedRange{{p.rows, {0, dims[1]}}, p.endpoint, var};
            created[i] = true;
        });
    } catch (...) {
        for (std::size_t i = 0; i < parts.size(); ++i)
            if (created[i]) {
                try {
                    federation->client(f.ranges[i].endpoint)->remove(f.ranges[i].var);
                } catch (...) {
                }
            }
        throw;
    }
    std::sort(f.ranges.begin(), f.ranges.end(),
              [](const auto& a, const auto& b) { return a.rows().begin < b.rows().begin; });
    return f;
}

BasicTensorBlock fed_matvec(const FederatedTensor& f, const BasicTensorBlock& v) {
    require_rows(f);
    const std::vector<double> vec = dense_vector(v, f.dims[1], "fed_matvec");
    const BasicTensorBlock col = BasicTensorBlock::from_cells({f.dims[1], 1}, Cells(vec), Layout::Dense);
    auto partials = run_per_range(f, "matvec", [&](std::size_t) { return col; }, false);
    std::vector<double> out(static_cast<std::size_t>(f.dims[0]), 0.0);
    for (std::size_t i = 0; i < partials.size(); ++i) {
        const auto rows = f.ranges[i].rows();
        const std::vector<double> part = partials[i].to_dense_f64();
        std::copy(part.begin(), part.end(), out.begin() + rows.begin);
    }
    return BasicTensorBlock::fp64({f.dims[0], 1}, std::move(out));
}

BasicTensorBlock fed_vecmat(const BasicTensorBlock& v, const FederatedTensor& f) {
    require_rows(f);
    const std::vector<double> vec = dense_vector(v, f.dims[0], "fed_vecmat");
    auto partials = run_per_range(
        f, "vecmat",
        [&](std::size_t i) {
            const auto rows = f.ranges[i].rows();
            std::vector<double> slice(vec.begin() + rows.begin, vec.begin() + rows.end);
            return BasicTensorBlock::from_cells({rows.width(), 1}, Cells(std::move(slice)), Layout::Dense);
        },
        true);
    std::vector<double> out(static_cast<std::size_t>(f.dims[1]), 0.0);
    for (const auto& p : partials) {
        const std::vector<double> part = p.to_dense_f64();
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += part[j];
    }
    return BasicTensorBlock::fp64({1, f.dims[1]}, std::move(out));
}

double fed_sum(const FederatedTensor& f) {
    require_rows(f);
    auto partials = run_per_range(f, "sum", [](std::size_t) { return std::optional<BasicTensorBlock>{}; }, false);
    double s = 0.0;
    for (const auto& p : partials) s += p.f64_at(0);
    return s;
}

BasicTensorBlock fed_aggregate(kernels::AggKind kind, const FederatedTensor& f) {
    require_rows(f);
    const bool rows = kind == kernels::AggKind::RowSums;
    if (!rows && kind != kernels::AggKind::ColSums) throw FedError("unsupported federated aggregate");
    auto partials = run_per_range(f, rows ? "rowSums" : "colSums",
                                  [](std::size_t) { return std::optional<BasicTensorBlock>{}; }, false);
    if (rows) {
        std::vector<double> out(static_cast<std::size_t>(f.dims[0]), 0.0);
        for (std::size_t i = 0; i < partials.size(); ++i) {
            const std::vector<double> part = partials[i].to_dense_f64();
            std::copy(part.begin(), part.end(), out.begin() + f.ranges[i].rows().begin);
        }
        return BasicTensorBlock::fp64({f.dims[0], 1}, std::move(out));
    }
    std::vector<double> out(static_cast<std::size_t>(f.dims[1]), 0.0);
    for (const auto& p : partials) {
        const std::vector<double> part = p.to_dense_f64();
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += part[j];
    }
    return BasicTensorBlock::fp64({1, f.dims[1]}, std::move(out));
}

BasicTensorBlock collect(const FederatedTensor& f) {
    require_rows(f);
    const auto bytes = static_cast<std::size_t>(shape_numel(f.dims)) * sizeof(double);
    const std::size_t budget = f.federation ? f.federation->collect_budget_bytes : bytes;
    if (bytes > budget)
        throw FedError("collecting " + shape_string(f.dims) + " needs " + std::to_string(bytes) +
                       " bytes, over the local budget of " + std::to_string(budget));
    std::vector<BasicTensorBlock> parts(f.ranges.size());
    for_each_range(f.ranges.size(), [&](std::size_t i) {
        parts[i] = f.federation->client(f.ranges[i].endpoint)->get(f.ranges[i].var);
    });
    const std::int64_t n = f.dims[1];
    std::vector<double> out(static_cast<std::size_t>(shape_numel(f.dims)), 0.0);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto rows = f.ranges[i].rows();
        if (parts[i].rows() != rows.width() || parts[i].cols() != n)
            throw FedError("worker " + f.ranges[i].endpoint + " holds " + shape_string(parts[i].dims()) +
                           " for a range of " + std::to_string(rows.width()) + " rows");
        const std::vector<double> v = parts[i].to_dense_f64();
        std::copy(v.begin(), v.end(), out.begin() + rows.begin * n);
    }
    return BasicTensorBlock::fp64(f.dims, std::move(out));
}

void release(const FederatedTensor& f) noexcept {
    for (const auto& r : f.ranges) {
        try {
            f.federation->client(r.endpoint)->remove(r.var);
        } catch (...) {
        }
    }
}

} // namespace tessera::fed
