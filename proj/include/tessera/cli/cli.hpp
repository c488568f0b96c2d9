// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace tessera::cli {

/// Exit codes: 0 success, 1 script or runtime error, 2 usage error.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tessera::cli
