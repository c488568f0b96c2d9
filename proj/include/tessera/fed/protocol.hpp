// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Wire frame between control program and workers:
//   magic u16 LE (0xFED5) | version u8 | type u8 | request_id u64 LE |
//   payload_len u64 LE | payload

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "tessera/core/error.hpp"

namespace tessera::fed {

class FedError : public Error {
public:
    using Error::Error;
};

enum class MsgType : std::uint8_t { Put = 1, Exec = 2, Get = 3, Remove = 4, Shutdown = 5, Ok = 6, Err = 7 };

std::string_view to_string(MsgType t) noexcept;

inline constexpr std::uint16_t kMagic = 0xFED5;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 20;
/// Refuse frames beyond this payload size (malformed or hostile input).
inline constexpr std::uint64_t kMaxPayload = std::uint64_t{1} << 34;

struct Message {
    MsgType type = MsgType::Ok;
    std::uint64_t request_id = 0;
    std::string payload;

    friend bool operator==(const Message&, const Message&) = default;
};

struct Header {
    MsgType type;
    std::uint64_t request_id;
    std::uint64_t payload_len;
};

std::string encode(const Message& m);
/// Validates magic, version and type; throws FedError on malformed input.
Header decode_header(std::string_view bytes);
/// Decodes one complete frame (header plus exactly payload_len bytes).
Message decode(std::string_view bytes);

/// Var-id payload of OK replies to PUT and EXEC.
std::string encode_var_id(std::uint64_t id);
std::uint64_t decode_var_id(std::string_view payload);

} // namespace tessera::fed
