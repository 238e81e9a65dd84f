#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adhocnet/error.hpp"

namespace adhocnet {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Virtual time in milliseconds. Simulated nodes run on a simulator-driven
// clock; UDP-backed nodes map this to wall time since process start.
using VirtualTime = std::uint64_t;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView v) {
    return std::string(v.begin(), v.end());
}

inline std::string to_hex(ByteView v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(v.size() * 2);
    for (std::uint8_t b : v) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

inline Bytes from_hex(std::string_view s) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (s.size() % 2 != 0) throw Error(Errc::malformed, "odd-length hex string");
    Bytes out;
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2) {
        int hi = nibble(s[i]), lo = nibble(s[i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::malformed, "invalid hex digit");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

// Big-endian serializer. All wire formats in this stack are big-endian with
// 2-byte length-prefixed variable fields ("lp" fields).
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u16(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }

    void u32(std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
    }

    void u64(std::uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
    }

    void raw(ByteView v) { buf_.insert(buf_.end(), v.begin(), v.end()); }

    // Length-prefixed field: u16 length followed by the bytes.
    void lp(ByteView v) {
        if (v.size() > 0xFFFF) throw Error(Errc::malformed, "lp field exceeds 65535 bytes");
        u16(static_cast<std::uint16_t>(v.size()));
        raw(v);
    }

    void lp_str(std::string_view s) {
        lp(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    }

    const Bytes& data() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

// Big-endian deserializer over a borrowed view. Underflow throws
// Errc::malformed; decoders that must not throw wrap this in try/catch.
class ByteReader {
public:
    explicit ByteReader(ByteView v) : view_(v) {}

    std::uint8_t u8() { return take(1)[0]; }

    std::uint16_t u16() {
        auto p = take(2);
        return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
    }

    std::uint32_t u32() {
        auto p = take(4);
        return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
               static_cast<std::uint32_t>(p[2]) << 8 | static_cast<std::uint32_t>(p[3]);
    }

    std::uint64_t u64() {
        std::uint64_t hi = u32();
        return hi << 32 | u32();
    }

    Bytes raw(std::size_t n) {
        auto p = take(n);
        return Bytes(p.begin(), p.end());
    }

    Bytes lp() {
        std::size_t n = u16();
        return raw(n);
    }

    std::size_t remaining() const { return view_.size() - pos_; }
    bool done() const { return remaining() == 0; }

    // Remaining bytes without consuming them.
    ByteView rest() const { return view_.subspan(pos_); }

private:
    ByteView take(std::size_t n) {
        if (remaining() < n) throw Error(Errc::malformed, "truncated input");
        ByteView p = view_.subspan(pos_, n);
        pos_ += n;
        return p;
    }

    ByteView view_;
    std::size_t pos_ = 0;
};

}  // namespace adhocnet
