#pragma once

#include <string_view>

#include "adhocnet/crypto/primitives.hpp"
#include "adhocnet/crypto/types.hpp"
#include "adhocnet/rng.hpp"

namespace adhocnet {

// Pluggable cryptographic provider. The handshake and channel modules talk
// only to this interface; the asymmetric suite varies per provider while the
// symmetric/hash surface is fixed (SHA-256, HMAC-SHA-256, AES-128-CBC).
//
// Key and ciphertext encodings are provider-specific opaque byte strings;
// they only need to round-trip through the matching provider.
class CryptoProvider {
public:
    virtual ~CryptoProvider() = default;

    virtual std::string_view suite() const = 0;

    virtual KeyPair generate_keypair(SplitMix64& rng) = 0;

    virtual Bytes pk_encrypt(ByteView public_key, ByteView plaintext, SplitMix64& rng) = 0;

    // Throws DecryptFailure when the ciphertext does not match the key,
    // MalformedKey on an unparseable key.
    virtual Bytes pk_decrypt(ByteView private_key, ByteView ciphertext) = 0;

    virtual Bytes sign(ByteView private_key, ByteView message) = 0;

    virtual bool verify(ByteView public_key, ByteView message, ByteView signature) = 0;

    virtual Digest hash(ByteView data) { return sha256(data); }

    virtual Bytes hmac(ByteView key, ByteView data) { return hmac_sha256(key, data); }

    virtual Bytes sym_encrypt(ByteView key, ByteView iv, ByteView plaintext) {
        return aes128_cbc_encrypt(key, iv, plaintext);
    }

    virtual Bytes sym_decrypt(ByteView key, ByteView iv, ByteView ciphertext) {
        return aes128_cbc_decrypt(key, iv, ciphertext);
    }

    virtual Nonce generate_nonce(SplitMix64& rng) {
        Nonce n;
        rng.fill(n.bytes.data(), n.bytes.size());
        return n;
    }

    virtual SessionKey generate_session_key(SplitMix64& rng) {
        SessionKey k;
        rng.fill(k.bytes.data(), k.bytes.size());
        return k;
    }
};

// HMAC-SHA-256(master, label || 0x00 || n1 || n2); 16 bytes for ENC-* labels,
// the full 32 for MAC-*.
inline Bytes kdf(CryptoProvider& provider, const SessionKey& master, const Nonce& n1,
                 const Nonce& n2, std::string_view label) {
    bool enc = label == "ENC-I" || label == "ENC-R";
    bool mac = label == "MAC-I" || label == "MAC-R";
    if (!enc && !mac) throw Error(Errc::unknown_label, std::string(label));
    ByteWriter w;
    w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
    w.u8(0x00);
    w.raw(n1.view());
    w.raw(n2.view());
    Bytes out = provider.hmac(master.view(), w.data());
    if (enc) out.resize(16);
    return out;
}

inline Certificate issue_certificate(CryptoProvider& provider, ByteView ca_private,
                                     const NodeAddress& subject_addr,
                                     std::string_view subject_name, ByteView subject_public,
                                     std::uint64_t serial) {
    Certificate cert;
    cert.subject_addr = subject_addr;
    cert.subject_name = subject_name;
    cert.subject_public.assign(subject_public.begin(), subject_public.end());
    cert.serial = serial;
    cert.ca_signature = provider.sign(ca_private, cert.tbs());
    return cert;
}

inline bool verify_certificate(CryptoProvider& provider, ByteView ca_public,
                               const Certificate& cert) {
    return provider.verify(ca_public, cert.tbs(), cert.ca_signature);
}

}  // namespace adhocnet
