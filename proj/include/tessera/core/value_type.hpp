// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace tessera {

/// Cell value types. The numeric tag doubles as the binary-format code.
enum class ValueType : std::uint8_t {
    FP32 = 0,
    FP64 = 1,
    INT32 = 2,
    INT64 = 3,
    BOOLEAN = 4,
    STRING = 5,
};

std::string_view to_string(ValueType vt) noexcept;
std::optional<ValueType> parse_value_type(std::string_view text) noexcept;

constexpr bool is_numeric(ValueType vt) noexcept { return vt != ValueType::STRING; }

/// Bytes per cell in dense storage; STRING reports the handle size.
std::size_t cell_width(ValueType vt) noexcept;

/// A single typed value. INT32/FP32 are carried widened; `vtype` keeps the tag.
class Scalar {
public:
    Scalar() : vtype_(ValueType::FP64), value_(0.0) {}

    static Scalar fp64(double v) { return Scalar(ValueType::FP64, v); }
    static Scalar int64(std::int64_t v) { return Scalar(ValueType::INT64, v); }
    static Scalar boolean(bool v) { return Scalar(ValueType::BOOLEAN, v); }
    static Scalar string(std::string v) { return Scalar(ValueType::STRING, std::move(v)); }
    /// Checked construction: throws TypeError when `v` is not representable in `vt`.
    static Scalar of(ValueType vt, double v);

    ValueType vtype() const noexcept { return vtype_; }
    bool is_string() const noexcept { return vtype_ == ValueType::STRING; }
    bool is_integral() const noexcept {
        return vtype_ == ValueType::INT64 || vtype_ == ValueType::INT32;
    }

    /// Numeric value as FP64 (BOOLEAN -> 0/1). Throws TypeError for STRING.
    double as_double() const;
    /// Exact integer value; FP64 must be integral. Throws TypeError otherwise.
    std::int64_t as_int() const;
    bool as_bool() const;
    const std::string& as_string() const;

    /// Canonical text: INT64 "5", FP64 "5.0", BOOLEAN "TRUE", STRING quoted.
    /// Distinct (type, value) pairs never share a canonical text.
    std::string canonical() const;
    /// Human-readable text (no quotes on strings).
    std::string to_display() const;

    friend bool operator==(const Scalar& a, const Scalar& b) {
        return a.vtype_ == b.vtype_ && a.value_ == b.value_;
    }

private:
    using Storage = std::variant<double, std::int64_t, bool, std::string>;
    Scalar(ValueType vt, Storage v) : vtype_(vt), value_(std::move(v)) {}

    ValueType vtype_;
    Storage value_;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

} // namespace tessera
