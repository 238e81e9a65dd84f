#pragma once

#include <cstdint>
#include <optional>

#include "adhocnet/address.hpp"
#include "adhocnet/bytes.hpp"
#include "adhocnet/error.hpp"

namespace adhocnet {

// Experimental/local ethertype; keeps sniffed emulation traffic from
// colliding with real protocols.
inline constexpr std::uint16_t kEthertype = 0x88B5;
inline constexpr std::size_t kMaxFramePayload = 1500;
inline constexpr std::size_t kFrameHeaderSize = 14;

// Broadcast-domain datagram unit. On the wire this mirrors Ethernet II:
// dest(6) | src(6) | ethertype(2, BE) | payload.
struct Frame {
    NodeAddress dest;
    NodeAddress src;
    std::uint16_t ethertype = kEthertype;
    Bytes payload;

    bool operator==(const Frame&) const = default;

    Bytes encode() const {
        Bytes out;
        out.reserve(kFrameHeaderSize + payload.size());
        out.insert(out.end(), dest.bytes.begin(), dest.bytes.end());
        out.insert(out.end(), src.bytes.begin(), src.bytes.end());
        out.push_back(static_cast<std::uint8_t>(ethertype >> 8));
        out.push_back(static_cast<std::uint8_t>(ethertype));
        out.insert(out.end(), payload.begin(), payload.end());
        return out;
    }

    static std::optional<Frame> decode(ByteView wire) {
        if (wire.size() < kFrameHeaderSize || wire.size() > kFrameHeaderSize + kMaxFramePayload)
            return std::nullopt;
        Frame f;
        for (std::size_t i = 0; i < 6; ++i) f.dest.bytes[i] = wire[i];
        for (std::size_t i = 0; i < 6; ++i) f.src.bytes[i] = wire[6 + i];
        f.ethertype = static_cast<std::uint16_t>(wire[12] << 8 | wire[13]);
        if (f.ethertype != kEthertype) return std::nullopt;
        if (f.src.is_broadcast()) return std::nullopt;
        f.payload.assign(wire.begin() + kFrameHeaderSize, wire.end());
        return f;
    }

    // Throws on invariant violations; called by every transport before
    // submitting to the medium.
    void validate() const {
        if (payload.size() > kMaxFramePayload)
            throw Error(Errc::oversize_payload, "frame payload exceeds 1500 bytes");
        if (src.is_broadcast())
            throw Error(Errc::invalid_address, "broadcast address cannot be a source");
    }
};

}  // namespace adhocnet
