#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "adhocnet/bytes.hpp"
#include "adhocnet/checksum.hpp"
#include "adhocnet/error.hpp"
#include "adhocnet/frame.hpp"

namespace adhocnet {

inline constexpr std::uint8_t kSegmentVersion = 1;
inline constexpr std::size_t kSegmentHeaderSize = 14;
inline constexpr std::size_t kMaxSegmentPayload = kMaxFramePayload - kSegmentHeaderSize;

inline constexpr std::uint8_t kFlagAck = 0x01;
inline constexpr std::uint8_t kFlagData = 0x02;

// 14-byte big-endian header carried at the front of every frame payload:
// version(1) | flags(1) | msg_id(2) | frag_index(2) | frag_count(2) |
// payload_len(2) | crc32(4). crc32 covers the segment payload only.
struct SegmentHeader {
    std::uint8_t version = kSegmentVersion;
    std::uint8_t flags = 0;
    std::uint16_t msg_id = 0;
    std::uint16_t frag_index = 0;
    std::uint16_t frag_count = 1;
    std::uint16_t payload_len = 0;
    std::uint32_t crc32 = 0;

    bool operator==(const SegmentHeader&) const = default;
};

struct Segment {
    SegmentHeader header;
    Bytes payload;

    bool operator==(const Segment&) const = default;

    bool is_ack() const { return header.flags & kFlagAck; }
    bool is_data() const { return header.flags & kFlagData; }
    bool crc_ok() const { return crc32_ieee(payload) == header.crc32; }

    Bytes encode() const {
        ByteWriter w;
        w.u8(header.version);
        w.u8(header.flags);
        w.u16(header.msg_id);
        w.u16(header.frag_index);
        w.u16(header.frag_count);
        w.u16(header.payload_len);
        w.u32(header.crc32);
        w.raw(payload);
        return w.take();
    }

    // Structural decode: enforces version, flag exclusivity, index/count and
    // length consistency. The crc is NOT verified here; callers check
    // crc_ok() so a checksum failure can be counted separately.
    static std::optional<Segment> decode(ByteView wire) {
        if (wire.size() < kSegmentHeaderSize) return std::nullopt;
        Segment s;
        ByteReader r(wire);
        s.header.version = r.u8();
        s.header.flags = r.u8();
        s.header.msg_id = r.u16();
        s.header.frag_index = r.u16();
        s.header.frag_count = r.u16();
        s.header.payload_len = r.u16();
        s.header.crc32 = r.u32();
        if (s.header.version != kSegmentVersion) return std::nullopt;
        bool ack = s.header.flags & kFlagAck, data = s.header.flags & kFlagData;
        if (ack == data) return std::nullopt;
        if ((s.header.flags & ~(kFlagAck | kFlagData)) != 0) return std::nullopt;
        if (s.header.frag_count == 0) return std::nullopt;
        if (s.header.frag_index >= s.header.frag_count) return std::nullopt;
        if (s.header.payload_len != r.remaining()) return std::nullopt;
        s.payload = r.raw(r.remaining());
        return s;
    }
};

// Per-message acknowledgment bitmap, carried as the payload of ACK segments.
// Bit i (LSB-first within each byte) is set iff fragment i arrived intact.
struct AckBitmap {
    std::uint16_t msg_id = 0;
    Bytes bitmap;

    static std::size_t bitmap_size(std::uint16_t frag_count) {
        return (static_cast<std::size_t>(frag_count) + 7) / 8;
    }

    static AckBitmap empty(std::uint16_t msg_id, std::uint16_t frag_count) {
        return AckBitmap{msg_id, Bytes(bitmap_size(frag_count), 0)};
    }

    bool get(std::size_t i) const {
        return i / 8 < bitmap.size() && (bitmap[i / 8] >> (i % 8)) & 1;
    }

    void set(std::size_t i) {
        if (i / 8 < bitmap.size()) bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }

    bool all_set(std::uint16_t frag_count) const {
        for (std::size_t i = 0; i < frag_count; ++i)
            if (!get(i)) return false;
        return true;
    }

    Bytes encode() const {
        ByteWriter w;
        w.u16(msg_id);
        w.raw(bitmap);
        return w.take();
    }

    static std::optional<AckBitmap> decode(ByteView wire, std::uint16_t frag_count) {
        if (wire.size() != 2 + bitmap_size(frag_count)) return std::nullopt;
        AckBitmap a;
        ByteReader r(wire);
        a.msg_id = r.u16();
        a.bitmap = r.raw(r.remaining());
        return a;
    }
};

// Splits a message into DATA segments sharing msg_id: consecutive indices,
// payloads concatenating back to the message, each carrying its payload crc.
// An empty message still yields one zero-length fragment.
inline std::vector<Segment> fragment(ByteView message, std::size_t capacity,
                                     std::uint16_t msg_id) {
    if (capacity == 0 || capacity > kMaxSegmentPayload)
        throw Error(Errc::malformed, "fragment capacity out of range");
    std::size_t count = message.empty() ? 1 : (message.size() + capacity - 1) / capacity;
    if (count > 0xFFFF) throw Error(Errc::message_too_large, "message needs too many fragments");
    std::vector<Segment> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t off = i * capacity;
        std::size_t len = message.empty() ? 0 : std::min(capacity, message.size() - off);
        Segment s;
        s.payload.assign(message.begin() + static_cast<std::ptrdiff_t>(off),
                         message.begin() + static_cast<std::ptrdiff_t>(off + len));
        s.header.flags = kFlagData;
        s.header.msg_id = msg_id;
        s.header.frag_index = static_cast<std::uint16_t>(i);
        s.header.frag_count = static_cast<std::uint16_t>(count);
        s.header.payload_len = static_cast<std::uint16_t>(len);
        s.header.crc32 = crc32_ieee(s.payload);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace adhocnet
