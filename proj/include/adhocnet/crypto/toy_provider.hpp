#pragma once

#include <cstring>

#include "adhocnet/crypto/provider.hpp"

namespace adhocnet {

// Deterministic small-key provider, TEST ONLY. Keys are ~62-bit RSA moduli,
// trivially factorable offline; the point is that every byte it produces is a
// pure function of the caller's seeded rng stream, so exhaustive protocol
// simulations replay bit-exactly. Encryption is a KEM: a random value r is
// transported as r^e mod n and everything else is keyed off SHA-256(r), with
// a 16-byte tag so decryption under the wrong key fails loudly.
class ToyProvider final : public CryptoProvider {
public:
    std::string_view suite() const override { return "toy-rsa62"; }

    KeyPair generate_keypair(SplitMix64& rng) override {
        for (;;) {
            std::uint64_t p = random_prime(rng);
            std::uint64_t q = random_prime(rng);
            if (p == q) continue;
            std::uint64_t n = p * q;
            std::uint64_t lambda = (p - 1) / gcd_u64(p - 1, q - 1) * (q - 1);
            if (gcd_u64(kPubExp, lambda) != 1) continue;
            std::uint64_t d = mod_inverse(kPubExp, lambda);
            KeyPair kp;
            kp.public_key = encode_key(kPubTag, n, kPubExp);
            kp.private_key = encode_key(kPrivTag, n, d);
            return kp;
        }
    }

    Bytes pk_encrypt(ByteView public_key, ByteView plaintext, SplitMix64& rng) override {
        auto [n, e] = decode_key(kPubTag, public_key);
        std::uint64_t r = 2 + rng.next_u64() % (n - 3);
        std::uint64_t c0 = pow_mod(r, e, n);
        Digest kek = derive_kek(n, r);
        Bytes masked = mask(kek, plaintext);
        Bytes tag = make_tag(kek, masked);
        ByteWriter w;
        w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kKemTag), 4));
        w.u64(c0);
        w.raw(tag);
        w.raw(masked);
        return w.take();
    }

    Bytes pk_decrypt(ByteView private_key, ByteView ciphertext) override {
        auto [n, d] = decode_key(kPrivTag, private_key);
        if (ciphertext.size() < 4 + 8 + 16 ||
            std::memcmp(ciphertext.data(), kKemTag, 4) != 0)
            throw Error(Errc::decrypt_failure, "not a toy KEM ciphertext");
        ByteReader rd(ciphertext.subspan(4));
        std::uint64_t c0 = rd.u64();
        Bytes tag = rd.raw(16);
        Bytes masked = rd.raw(rd.remaining());
        std::uint64_t r = pow_mod(c0 % n, d, n);
        Digest kek = derive_kek(n, r);
        if (make_tag(kek, masked) != tag)
            throw Error(Errc::decrypt_failure, "tag mismatch");
        return mask(kek, masked);
    }

    Bytes sign(ByteView private_key, ByteView message) override {
        auto [n, d] = decode_key(kPrivTag, private_key);
        std::uint64_t s = pow_mod(reduce_digest(message, n), d, n);
        ByteWriter w;
        w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kSigTag), 4));
        w.u64(s);
        return w.take();
    }

    bool verify(ByteView public_key, ByteView message, ByteView signature) override {
        std::uint64_t n, e;
        try {
            std::tie(n, e) = decode_key(kPubTag, public_key);
        } catch (const Error&) {
            return false;
        }
        if (signature.size() != 12 || std::memcmp(signature.data(), kSigTag, 4) != 0)
            return false;
        std::uint64_t s = ByteReader(signature.subspan(4)).u64();
        return pow_mod(s % n, e, n) == reduce_digest(message, n);
    }

private:
    static constexpr std::uint64_t kPubExp = 65537;
    static constexpr const char* kPubTag = "TPUB";
    static constexpr const char* kPrivTag = "TPRV";
    static constexpr const char* kKemTag = "TKEM";
    static constexpr const char* kSigTag = "TSIG";

    static Bytes encode_key(const char* tag, std::uint64_t n, std::uint64_t x) {
        ByteWriter w;
        w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(tag), 4));
        w.u64(n);
        w.u64(x);
        return w.take();
    }

    static std::pair<std::uint64_t, std::uint64_t> decode_key(const char* tag, ByteView key) {
        if (key.size() != 20 || std::memcmp(key.data(), tag, 4) != 0)
            throw Error(Errc::malformed_key, "not a toy key");
        ByteReader r(key.subspan(4));
        std::uint64_t n = r.u64();
        std::uint64_t x = r.u64();
        if (n < 5) throw Error(Errc::malformed_key, "degenerate modulus");
        return {n, x};
    }

    static Digest derive_kek(std::uint64_t n, std::uint64_t r) {
        ByteWriter w;
        w.lp_str("toy-kem");
        w.u64(n);
        w.u64(r);
        return sha256(w.data());
    }

    static Bytes mask(const Digest& kek, ByteView in) {
        Bytes out(in.begin(), in.end());
        for (std::size_t i = 0; i < out.size(); i += 32) {
            ByteWriter w;
            w.raw(digest_view(kek));
            w.lp_str("ks");
            w.u32(static_cast<std::uint32_t>(i / 32));
            Digest block = sha256(w.data());
            for (std::size_t j = 0; j < 32 && i + j < out.size(); ++j) out[i + j] ^= block[j];
        }
        return out;
    }

    static Bytes make_tag(const Digest& kek, ByteView masked) {
        ByteWriter w;
        w.lp_str("tag");
        w.raw(masked);
        Bytes full = hmac_sha256(digest_view(kek), w.data());
        full.resize(16);
        return full;
    }

    static std::uint64_t reduce_digest(ByteView message, std::uint64_t n) {
        Digest h = sha256(message);
        return ByteReader(digest_view(h)).u64() % n;
    }

    static std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
        return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
    }

    static std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
        std::uint64_t acc = 1 % m;
        base %= m;
        while (exp) {
            if (exp & 1) acc = mul_mod(acc, base, m);
            base = mul_mod(base, base, m);
            exp >>= 1;
        }
        return acc;
    }

    static std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
        while (b) {
            std::uint64_t t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
        __int128 t = 0, new_t = 1, r = m, new_r = a;
        while (new_r != 0) {
            __int128 q = r / new_r;
            t -= q * new_t;
            std::swap(t, new_t);
            r -= q * new_r;
            std::swap(r, new_r);
        }
        if (t < 0) t += m;
        return static_cast<std::uint64_t>(t);
    }

    // Deterministic Miller-Rabin; bases {2, 7, 61} decide primality for all
    // 32-bit candidates.
    static bool is_prime(std::uint64_t v) {
        if (v < 2) return false;
        for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
            if (v == p) return true;
            if (v % p == 0) return false;
        }
        std::uint64_t d = v - 1;
        int s = 0;
        while ((d & 1) == 0) {
            d >>= 1;
            ++s;
        }
        for (std::uint64_t a : {2ULL, 7ULL, 61ULL}) {
            std::uint64_t x = pow_mod(a, d, v);
            if (x == 1 || x == v - 1) continue;
            bool witness = true;
            for (int i = 1; i < s; ++i) {
                x = mul_mod(x, x, v);
                if (x == v - 1) {
                    witness = false;
                    break;
                }
            }
            if (witness) return false;
        }
        return true;
    }

    static std::uint64_t random_prime(SplitMix64& rng) {
        for (;;) {
            std::uint64_t v = (rng.next_u64() & 0x7FFFFFFFULL) | 0x80000001ULL;
            if (is_prime(v)) return v;
        }
    }
};

}  // namespace adhocnet
