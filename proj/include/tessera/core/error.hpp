// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tessera {

/// Base of every error raised by the runtime.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes or ranks do not fit the operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Operand value types do not fit the operation (e.g. STRING into a numeric kernel).
class TypeError : public Error {
public:
    using Error::Error;
};

/// Cholesky breakdown; `pivot` is the 0-based column that failed.
class SingularError : public Error {
public:
    SingularError(const std::string& what, long pivot) : Error(what), pivot_(pivot) {}
    long pivot() const noexcept { return pivot_; }

private:
    long pivot_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace tessera
