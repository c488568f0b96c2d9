// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/interp/value.hpp"

#include <sstream>

#include "tessera/core/error.hpp"

namespace tessera::interp {

std::string type_name(const Value& v) {
    switch (v.index()) {
    case 0: return "null";
    case 1: return "scalar " + std::string(to_string(std::get<Scalar>(v).vtype()));
    case 2: return "matrix " + shape_string(std::get<TensorPtr>(v)->dims());
    case 3: return "frame " + shape_string(std::get<FramePtr>(v)->dims());
    case 4: return "list of " + std::to_string(std::get<ListPtr>(v)->items.size());
    default: return "federated " + shape_string(std::get<FedPtr>(v)->dims);
    }
}

const Scalar& as_scalar(const Value& v, const char* what) {
    if (const auto* s = std::get_if<Scalar>(&v)) return *s;
    throw TypeError(std::string(what) + " expects a scalar, got " + type_name(v));
}

const TensorPtr& as_tensor(const Value& v, const char* what) {
    if (const auto* t = std::get_if<TensorPtr>(&v)) return *t;
    throw TypeError(std::string(what) + " expects a matrix, got " + type_name(v));
}

const ListValue& as_list(const Value& v, const char* what) {
    if (const auto* l = std::get_if<ListPtr>(&v)) return **l;
    throw TypeError(std::string(what) + " expects a list, got " + type_name(v));
}

std::size_t value_bytes(const Value& v) {
    switch (v.index()) {
    case 1: return sizeof(Scalar);
    case 2: return std::get<TensorPtr>(v)->size_bytes();
    case 3: {
        std::size_t n = 0;
        for (const auto& g : std::get<FramePtr>(v)->groups()) n += g.block.size_bytes();
        return n;
    }
    case 4: {
        std::size_t n = 0;
        for (const auto& item : std::get<ListPtr>(v)->items) n += value_bytes(item);
        return n;
    }
    default: return 0;
    }
}

std::string to_display(const Value& v) {
    std::ostringstream out;
    switch (v.index()) {
    case 0: return "NULL";
    case 1: return std::get<Scalar>(v).to_display();
    case 2: {
        const auto& t = *std::get<TensorPtr>(v);
        if (t.rank() != 2) return "tensor " + shape_string(t.dims());
        for (std::int64_t i = 0; i < t.rows(); ++i) {
            for (std::int64_t j = 0; j < t.cols(); ++j) {
                if (j) out << ' ';
                out << t.scalar_at(i * t.cols() + j).to_display();
            }
            out << '\n';
        }
        std::string s = out.str();
        if (!s.empty()) s.pop_back();
        return s;
    }
    case 3: {
        const auto& f = *std::get<FramePtr>(v);
        for (std::int64_t i = 0; i < f.rows(); ++i) {
            for (std::int64_t j = 0; j < f.cols(); ++j) out << (j ? "," : "") << f.get(i, j).to_display();
            if (i + 1 < f.rows()) out << '\n';
        }
        return out.str();
    }
    case 4: {
        const auto& l = *std::get<ListPtr>(v);
        out << "list(";
        for (std::size_t i = 0; i < l.items.size(); ++i) out << (i ? ", " : "") << type_name(l.items[i]);
        out << ")";
        return out.str();
    }
    default: return type_name(v);
    }
}

} // namespace tessera::interp
