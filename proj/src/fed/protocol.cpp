// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/fed/protocol.hpp"

namespace tessera::fed {

namespace {

void put_le(std::string& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::string_view in, std::size_t at, int bytes) {
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[at + static_cast<std::size_t>(i)]);
    return v;
}

} // namespace

std::string_view to_string(MsgType t) noexcept {
    switch (t) {
    case MsgType::Put: return "PUT";
    case MsgType::Exec: return "EXEC";
    case MsgType::Get: return "GET";
    case MsgType::Remove: return "REMOVE";
    case MsgType::Shutdown: return "SHUTDOWN";
    case MsgType::Ok: return "OK";
    case MsgType::Err: return "ERR";
    }
    return "?";
}

std::string encode(const Message& m) {
    std::string out;
    out.reserve(kHeaderSize + m.payload.size());
    put_le(out, kMagic, 2);
    out.push_back(static_cast<char>(kVersion));
    out.push_back(static_cast<char>(m.type));
    put_le(out, m.request_id, 8);
    put_le(out, m.payload.size(), 8);
    out += m.payload;
    return out;
}

Header decode_header(std::string_view bytes) {
    if (bytes.size() < kHeaderSize) throw FedError("truncated frame header");
    if (get_le(bytes, 0, 2) != kMagic) throw FedError("bad frame magic");
    if (static_cast<std::uint8_t>(bytes[2]) != kVersion)
        throw FedError("unsupported protocol version " + std::to_string(static_cast<unsigned char>(bytes[2])));
    const auto type = static_cast<std::uint8_t>(bytes[3]);
    if (type < 1 || type > 7) throw FedError("unknown message type " + std::to_string(type));
    Header h{static_cast<MsgType>(type), get_le(bytes, 4, 8), get_le(bytes, 12, 8)};
    if (h.payload_len > kMaxPayload) throw FedError("frame payload too large");
    return h;
}

Message decode(std::string_view bytes) {
    const Header h = decode_header(bytes);
    if (bytes.size() - kHeaderSize != h.payload_len) throw FedError("frame payload length mismatch");
    return {h.type, h.request_id, std::string(bytes.substr(kHeaderSize))};
}

std::string encode_var_id(std::uint64_t id) {
    std::string out;
    put_le(out, id, 8);
    return out;
}

std::uint64_t decode_var_id(std::string_view payload) {
    if (payload.size() != 8) throw FedError("malformed variable id payload");
    return get_le(payload, 0, 8);
}

} // namespace tessera::fed
