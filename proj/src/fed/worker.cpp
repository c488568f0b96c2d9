// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/fed/worker.hpp"

#include <charconv>
#include <unordered_map>

#include "tessera/core/kernels.hpp"
#include "tessera/io/io.hpp"

namespace tessera::fed {

namespace {

using Vars = std::unordered_map<std::uint64_t, TensorPtr>;

const TensorPtr& lookup(const Vars& vars, const ExecRequest::Arg& a) {
    if (!a.is_var) throw FedError("expected a variable operand, got literal '" + a.text + "'");
    auto it = vars.find(a.var);
    if (it == vars.end()) throw FedError("unknown variable " + std::to_string(a.var));
    return it->second;
}

BasicTensorBlock execute(const ExecRequest& req, const Vars& vars) {
    const auto arity = [&](std::size_t n) {
        if (req.args.size() != n)
            throw FedError(req.opcode + " expects " + std::to_string(n) + " operands, got " +
                           std::to_string(req.args.size()));
    };
    const auto scalar = [](double v) { return BasicTensorBlock::fp64({1, 1}, {v}); };
    if (req.opcode == "matvec") {
        arity(2);
        return kernels::matmul(*lookup(vars, req.args[0]), *lookup(vars, req.args[1]));
    }
    if (req.opcode == "vecmat") {
        arity(2);
        return kernels::matmul(kernels::transpose(*lookup(vars, req.args[0])), *lookup(vars, req.args[1]));
    }
    if (req.opcode == "sum") {
        arity(1);
        return scalar(kernels::aggregate(kernels::AggKind::Sum, *lookup(vars, req.args[0])));
    }
    if (req.opcode == "rowSums" || req.opcode == "colSums") {
        arity(1);
        return kernels::aggregate_vector(req.opcode == "rowSums" ? kernels::AggKind::RowSums : kernels::AggKind::ColSums,
                                         *lookup(vars, req.args[0]));
    }
    if (req.opcode == "read") {
        arity(1);
        if (req.args[0].is_var) throw FedError("read expects a path literal");
        auto data = io::read(req.args[0].text);
        if (!std::holds_alternative<TensorPtr>(data)) throw FedError("read: federated data must be numeric");
        return *std::get<TensorPtr>(data);
    }
    throw FedError("unsupported opcode '" + req.opcode + "'");
}

} // namespace

std::string ExecRequest::encode() const {
    std::string out = opcode;
    for (const auto& a : args) out += a.is_var ? "\nv " + std::to_string(a.var) : "\ns " + a.text;
    return out;
}

ExecRequest ExecRequest::decode(std::string_view payload) {
    ExecRequest r;
    bool first = true;
    while (true) {
        const auto nl = payload.find('\n');
        std::string_view line = payload.substr(0, nl);
        if (first) {
            if (line.empty()) throw FedError("EXEC payload without opcode");
            r.opcode = std::string(line);
            first = false;
        } else {
            if (line.size() < 2 || line[1] != ' ' || (line[0] != 'v' && line[0] != 's'))
                throw FedError("malformed EXEC operand '" + std::string(line) + "'");
            Arg a{line[0] == 'v', 0, std::string(line.substr(2))};
            if (a.is_var) {
                auto [p, ec] = std::from_chars(a.text.data(), a.text.data() + a.text.size(), a.var);
                if (ec != std::errc() || p != a.text.data() + a.text.size())
                    throw FedError("malformed variable id '" + a.text + "'");
            }
            r.args.push_back(std::move(a));
        }
        if (nl == std::string_view::npos) break;
        payload.remove_prefix(nl + 1);
    }
    return r;
}

Worker::Worker(std::uint16_t port) : listener_(port) {}

Worker::~Worker() { stop(); }

void Worker::start() { background_ = std::thread([this] { serve(); }); }

void Worker::stop() {
    stopping_ = true;
    listener_.shutdown();
    if (background_.joinable() && background_.get_id() != std::this_thread::get_id()) background_.join();
}

void Worker::serve() {
    while (!stopping_) {
        auto conn = listener_.accept();
        if (!conn) break;
        auto shared = std::make_shared<Socket>(std::move(*conn));
        std::lock_guard lock(mu_);
        if (stopping_) break;
        conns_.push_back(shared);
        threads_.emplace_back([this, shared] { handle(shared); });
    }
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(mu_);
        for (auto& c : conns_) c->shutdown();
        threads.swap(threads_);
    }
    for (auto& t : threads) t.join();
    std::lock_guard lock(mu_);
    conns_.clear();
}

void Worker::handle(std::shared_ptr<Socket> conn) {
    Vars vars;
    std::uint64_t next_id = 0;
    while (true) {
        std::optional<Message> msg;
        try {
            msg = read_message(*conn);
        } catch (const FedError& e) {
            // Malformed frame: report it and keep the connection open.
            try {
                write_message(*conn, {MsgType::Err, 0, e.what()});
                continue;
            } catch (...) {
                return;
            }
        }
        if (!msg) return;
        Message reply{MsgType::Ok, msg->request_id, {}};
        bool shutdown = false;
        try {
            switch (msg->type) {
            case MsgType::Put:
                vars[next_id] = share(io::decode_binary(msg->payload));
                reply.payload = encode_var_id(next_id++);
                break;
            case MsgType::Exec: {
                BasicTensorBlock out = execute(ExecRequest::decode(msg->payload), vars);
                vars[next_id] = share(std::move(out));
                reply.payload = encode_var_id(next_id++);
                break;
            }
            case MsgType::Get: {
                auto it = vars.find(decode_var_id(msg->payload));
                if (it == vars.end()) throw FedError("unknown variable");
                reply.payload = io::encode_binary(*it->second);
                break;
            }
            case MsgType::Remove:
                if (!vars.erase(decode_var_id(msg->payload))) throw FedError("unknown variable");
                break;
            case MsgType::Shutdown: shutdown = true; break;
            default: throw FedError("unexpected message type " + std::string(to_string(msg->type)));
            }
        } catch (const std::exception& e) {
            reply = {MsgType::Err, msg->request_id, e.what()};
        }
        try {
            write_message(*conn, reply);
        } catch (const FedError&) {
            return;
        }
        if (shutdown) {
            stopping_ = true;
            listener_.shutdown();
            return;
        }
    }
}

} // namespace tessera::fed
