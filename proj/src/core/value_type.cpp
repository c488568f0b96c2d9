// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/core/value_type.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "tessera/core/error.hpp"

namespace tessera {

namespace {

constexpr std::array<std::string_view, 6> kNames = {"FP32", "FP64", "INT32", "INT64", "BOOLEAN", "STRING"};

bool fits_int64(double v) {
    return std::isfinite(v) && std::floor(v) == v && v >= -9223372036854775808.0 &&
           v < 9223372036854775808.0;
}

std::string quote(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

} // namespace

std::string_view to_string(ValueType vt) noexcept { return kNames[static_cast<std::size_t>(vt)]; }

std::optional<ValueType> parse_value_type(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == text) return static_cast<ValueType>(i);
    }
    if (text == "DOUBLE") return ValueType::FP64;
    if (text == "INT") return ValueType::INT64;
    if (text == "BOOL") return ValueType::BOOLEAN;
    return std::nullopt;
}

std::size_t cell_width(ValueType vt) noexcept {
    switch (vt) {
    case ValueType::FP32:
    case ValueType::INT32: return 4;
    case ValueType::FP64:
    case ValueType::INT64: return 8;
    case ValueType::BOOLEAN: return 1;
    case ValueType::STRING: return sizeof(std::string);
    }
    return 8;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

Scalar Scalar::of(ValueType vt, double v) {
    switch (vt) {
    case ValueType::FP64: return fp64(v);
    case ValueType::FP32:
        if (std::isfinite(v) && std::fabs(v) > std::numeric_limits<float>::max())
            throw TypeError("value " + format_double(v) + " overflows FP32");
        return Scalar(ValueType::FP32, static_cast<double>(static_cast<float>(v)));
    case ValueType::INT64:
        if (!fits_int64(v)) throw TypeError("value " + format_double(v) + " is not an INT64");
        return int64(static_cast<std::int64_t>(v));
    case ValueType::INT32:
        if (!fits_int64(v) || v < std::numeric_limits<std::int32_t>::min() ||
            v > std::numeric_limits<std::int32_t>::max())
            throw TypeError("value " + format_double(v) + " is not an INT32");
        return Scalar(ValueType::INT32, static_cast<std::int64_t>(v));
    case ValueType::BOOLEAN:
        if (v != 0.0 && v != 1.0) throw TypeError("value " + format_double(v) + " is not a BOOLEAN");
        return boolean(v != 0.0);
    case ValueType::STRING: break;
    }
    throw TypeError("numeric value cannot be stored as STRING");
}

double Scalar::as_double() const {
    switch (value_.index()) {
    case 0: return std::get<double>(value_);
    case 1: return static_cast<double>(std::get<std::int64_t>(value_));
    case 2: return std::get<bool>(value_) ? 1.0 : 0.0;
    default: throw TypeError("STRING value used as a number");
    }
}

std::int64_t Scalar::as_int() const {
    switch (value_.index()) {
    case 0: {
        double v = std::get<double>(value_);
        if (!fits_int64(v)) throw TypeError("value " + format_double(v) + " is not an integer");
        return static_cast<std::int64_t>(v);
    }
    case 1: return std::get<std::int64_t>(value_);
    case 2: return std::get<bool>(value_) ? 1 : 0;
    default: throw TypeError("STRING value used as an integer");
    }
}

bool Scalar::as_bool() const {
    switch (value_.index()) {
    case 0: return std::get<double>(value_) != 0.0;
    case 1: return std::get<std::int64_t>(value_) != 0;
    case 2: return std::get<bool>(value_);
    default: {
        const auto& s = std::get<std::string>(value_);
        if (s == "TRUE" || s == "true") return true;
        if (s == "FALSE" || s == "false") return false;
        throw TypeError("STRING value '" + s + "' used as a boolean");
    }
    }
}

const std::string& Scalar::as_string() const {
    if (value_.index() != 3) throw TypeError("value is not a STRING");
    return std::get<std::string>(value_);
}

std::string Scalar::canonical() const {
    switch (vtype_) {
    case ValueType::FP64:
    case ValueType::FP32: {
        std::string s = format_double(std::get<double>(value_));
        if (s.find_first_of(".eIN") == std::string::npos) s += ".0";
        if (vtype_ == ValueType::FP32) s += "f";
        return s;
    }
    case ValueType::INT64: return std::to_string(std::get<std::int64_t>(value_));
    case ValueType::INT32: return std::to_string(std::get<std::int64_t>(value_)) + "i";
    case ValueType::BOOLEAN: return std::get<bool>(value_) ? "TRUE" : "FALSE";
    case ValueType::STRING: return quote(std::get<std::string>(value_));
    }
    return {};
}

std::string Scalar::to_display() const {
    switch (vtype_) {
    case ValueType::FP64:
    case ValueType::FP32: return format_double(std::get<double>(value_));
    case ValueType::INT64:
    case ValueType::INT32: return std::to_string(std::get<std::int64_t>(value_));
    case ValueType::BOOLEAN: return std::get<bool>(value_) ? "TRUE" : "FALSE";
    case ValueType::STRING: return std::get<std::string>(value_);
    }
    return {};
}

} // namespace tessera
