#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "adhocnet/bytes.hpp"

namespace adhocnet {

// 6-byte hardware-style node address. all-FF is the broadcast address and is
// never a valid source.
struct NodeAddress {
    std::array<std::uint8_t, 6> bytes{};

    static constexpr NodeAddress broadcast() {
        return NodeAddress{{0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF}};
    }

    bool is_broadcast() const { return *this == broadcast(); }

    auto operator<=>(const NodeAddress&) const = default;

    ByteView view() const { return ByteView(bytes.data(), bytes.size()); }

    std::string str() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(17);
        for (std::size_t i = 0; i < 6; ++i) {
            if (i) out.push_back(':');
            out.push_back(digits[bytes[i] >> 4]);
            out.push_back(digits[bytes[i] & 0x0F]);
        }
        return out;
    }

    // Accepts "aa:bb:cc:dd:ee:ff" (case-insensitive).
    static std::optional<NodeAddress> parse(std::string_view s) {
        auto nibble = [](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            return -1;
        };
        if (s.size() != 17) return std::nullopt;
        NodeAddress a;
        for (std::size_t i = 0; i < 6; ++i) {
            std::size_t p = i * 3;
            if (i && s[p - 1] != ':') return std::nullopt;
            int hi = nibble(s[p]), lo = nibble(s[p + 1]);
            if (hi < 0 || lo < 0) return std::nullopt;
            a.bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
        }
        return a;
    }
};

}  // namespace adhocnet
