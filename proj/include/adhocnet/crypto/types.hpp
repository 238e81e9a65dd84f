#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "adhocnet/address.hpp"
#include "adhocnet/bytes.hpp"

namespace adhocnet {

using Digest = std::array<std::uint8_t, 32>;

inline ByteView digest_view(const Digest& d) { return ByteView(d.data(), d.size()); }

struct KeyPair {
    Bytes public_key;
    Bytes private_key;
};

// 16 fresh random bytes, generated once per handshake.
struct Nonce {
    std::array<std::uint8_t, 16> bytes{};

    bool operator==(const Nonce&) const = default;
    auto operator<=>(const Nonce&) const = default;
    ByteView view() const { return ByteView(bytes.data(), bytes.size()); }

    static std::optional<Nonce> from(ByteView v) {
        if (v.size() != 16) return std::nullopt;
        Nonce n;
        std::copy(v.begin(), v.end(), n.bytes.begin());
        return n;
    }
};

// 16-byte symmetric master secret; never travels in cleartext.
struct SessionKey {
    std::array<std::uint8_t, 16> bytes{};

    bool operator==(const SessionKey&) const = default;
    ByteView view() const { return ByteView(bytes.data(), bytes.size()); }

    static std::optional<SessionKey> from(ByteView v) {
        if (v.size() != 16) return std::nullopt;
        SessionKey k;
        std::copy(v.begin(), v.end(), k.bytes.begin());
        return k;
    }
};

// CA-issued identity binding. The canonical encoding is length-prefixed field
// concatenation in declared order; the CA signature covers exactly the
// to-be-signed prefix (everything before the signature). Length prefixes make
// the encoding injective on the field tuple.
struct Certificate {
    NodeAddress subject_addr;
    std::string subject_name;
    Bytes subject_public;
    std::uint64_t serial = 0;
    Bytes ca_signature;

    bool operator==(const Certificate&) const = default;

    Bytes tbs() const {
        ByteWriter w;
        w.lp(subject_addr.view());
        w.lp_str(subject_name);
        w.lp(subject_public);
        ByteWriter serial_w;
        serial_w.u64(serial);
        w.lp(serial_w.data());
        return w.take();
    }

    Bytes encode() const {
        ByteWriter w;
        w.raw(tbs());
        w.lp(ca_signature);
        return w.take();
    }

    static std::optional<Certificate> decode(ByteView wire) {
        try {
            ByteReader r(wire);
            Certificate c;
            Bytes addr = r.lp();
            if (addr.size() != 6) return std::nullopt;
            std::copy(addr.begin(), addr.end(), c.subject_addr.bytes.begin());
            Bytes name = r.lp();
            c.subject_name.assign(name.begin(), name.end());
            c.subject_public = r.lp();
            Bytes serial = r.lp();
            if (serial.size() != 8) return std::nullopt;
            c.serial = ByteReader(serial).u64();
            c.ca_signature = r.lp();
            if (!r.done()) return std::nullopt;
            return c;
        } catch (const Error&) {
            return std::nullopt;
        }
    }
};

}  // namespace adhocnet
