// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace tessera::lineage {

struct Digest {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    std::string hex() const;
    friend auto operator<=>(const Digest&, const Digest&) = default;
};

/// MurmurHash3 x64 128-bit.
Digest murmur3_128(const void* data, std::size_t len, std::uint64_t seed);

inline constexpr std::uint64_t kDigestSeed = 0x7e55e7a5eed1ab5ULL;

} // namespace tessera::lineage

template <> struct std::hash<tessera::lineage::Digest> {
    std::size_t operator()(const tessera::lineage::Digest& d) const noexcept {
        return static_cast<std::size_t>(d.hi ^ (d.lo * 0x9e3779b97f4a7c15ULL));
    }
};
