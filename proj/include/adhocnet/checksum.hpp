#pragma once

#include <zlib.h>

#include <cstdint>

#include "adhocnet/bytes.hpp"

namespace adhocnet {

// Standard CRC-32 (IEEE polynomial, reflected, init 0xFFFFFFFF, final xor
// 0xFFFFFFFF). CRC of empty input is 0x00000000.
inline std::uint32_t crc32_ieee(ByteView data) {
    return static_cast<std::uint32_t>(
        ::crc32(0UL, data.empty() ? Z_NULL : data.data(), static_cast<uInt>(data.size())));
}

}  // namespace adhocnet
