#pragma once

#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include <memory>

#include "adhocnet/crypto/provider.hpp"

namespace adhocnet {

// Production suite: RSA-2048 with OAEP(SHA-256) encryption and PSS(SHA-256)
// signatures, keys serialized as DER (SubjectPublicKeyInfo / PKCS#8). Key
// generation and OAEP padding draw from OpenSSL's own RNG, so ciphertexts
// and fresh keys are not replayable from a seed; use ToyProvider where
// bit-exact determinism matters.
class DefaultProvider final : public CryptoProvider {
public:
    std::string_view suite() const override { return "rsa2048-oaep-pss"; }

    KeyPair generate_keypair(SplitMix64&) override {
        PkeyCtx ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_RSA, nullptr));
        if (!ctx || EVP_PKEY_keygen_init(ctx.get()) <= 0 ||
            EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), 2048) <= 0)
            throw Error(Errc::io_error, "RSA keygen init failed");
        EVP_PKEY* raw = nullptr;
        if (EVP_PKEY_keygen(ctx.get(), &raw) <= 0)
            throw Error(Errc::io_error, "RSA keygen failed");
        Pkey key(raw);
        KeyPair kp;
        kp.public_key = encode_der(key.get(), /*is_private=*/false);
        kp.private_key = encode_der(key.get(), /*is_private=*/true);
        return kp;
    }

    Bytes pk_encrypt(ByteView public_key, ByteView plaintext, SplitMix64&) override {
        Pkey key = decode_public(public_key);
        PkeyCtx ctx(EVP_PKEY_CTX_new(key.get(), nullptr));
        if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) <= 0 || set_oaep(ctx.get()) <= 0)
            throw Error(Errc::io_error, "OAEP encrypt init failed");
        std::size_t out_len = 0;
        if (EVP_PKEY_encrypt(ctx.get(), nullptr, &out_len, plaintext.data(), plaintext.size()) <= 0)
            throw Error(Errc::oversize_payload, "plaintext exceeds OAEP capacity");
        Bytes out(out_len);
        if (EVP_PKEY_encrypt(ctx.get(), out.data(), &out_len, plaintext.data(),
                             plaintext.size()) <= 0)
            throw Error(Errc::oversize_payload, "plaintext exceeds OAEP capacity");
        out.resize(out_len);
        return out;
    }

    Bytes pk_decrypt(ByteView private_key, ByteView ciphertext) override {
        Pkey key = decode_private(private_key);
        PkeyCtx ctx(EVP_PKEY_CTX_new(key.get(), nullptr));
        if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) <= 0 || set_oaep(ctx.get()) <= 0)
            throw Error(Errc::io_error, "OAEP decrypt init failed");
        std::size_t out_len = 0;
        if (EVP_PKEY_decrypt(ctx.get(), nullptr, &out_len, ciphertext.data(),
                             ciphertext.size()) <= 0)
            throw Error(Errc::decrypt_failure, "OAEP decrypt failed");
        Bytes out(out_len);
        if (EVP_PKEY_decrypt(ctx.get(), out.data(), &out_len, ciphertext.data(),
                             ciphertext.size()) <= 0)
            throw Error(Errc::decrypt_failure, "OAEP decrypt failed");
        out.resize(out_len);
        return out;
    }

    Bytes sign(ByteView private_key, ByteView message) override {
        Pkey key = decode_private(private_key);
        MdCtx md(EVP_MD_CTX_new());
        EVP_PKEY_CTX* pctx = nullptr;
        if (!md ||
            EVP_DigestSignInit(md.get(), &pctx, EVP_sha256(), nullptr, key.get()) <= 0 ||
            set_pss(pctx) <= 0)
            throw Error(Errc::io_error, "PSS sign init failed");
        std::size_t sig_len = 0;
        if (EVP_DigestSign(md.get(), nullptr, &sig_len, message.data(), message.size()) <= 0)
            throw Error(Errc::io_error, "PSS sign failed");
        Bytes sig(sig_len);
        if (EVP_DigestSign(md.get(), sig.data(), &sig_len, message.data(), message.size()) <= 0)
            throw Error(Errc::io_error, "PSS sign failed");
        sig.resize(sig_len);
        return sig;
    }

    bool verify(ByteView public_key, ByteView message, ByteView signature) override {
        Pkey key;
        try {
            key = decode_public(public_key);
        } catch (const Error&) {
            return false;
        }
        MdCtx md(EVP_MD_CTX_new());
        EVP_PKEY_CTX* pctx = nullptr;
        if (!md ||
            EVP_DigestVerifyInit(md.get(), &pctx, EVP_sha256(), nullptr, key.get()) <= 0 ||
            set_pss(pctx) <= 0)
            return false;
        int rc = EVP_DigestVerify(md.get(), signature.data(), signature.size(), message.data(),
                                  message.size());
        ERR_clear_error();
        return rc == 1;
    }

private:
    struct PkeyDeleter {
        void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
    };
    struct PkeyCtxDeleter {
        void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
    };
    struct MdCtxDeleter {
        void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
    };
    using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
    using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;
    using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

    static int set_oaep(EVP_PKEY_CTX* ctx) {
        if (EVP_PKEY_CTX_set_rsa_padding(ctx, RSA_PKCS1_OAEP_PADDING) <= 0) return 0;
        if (EVP_PKEY_CTX_set_rsa_oaep_md(ctx, EVP_sha256()) <= 0) return 0;
        return EVP_PKEY_CTX_set_rsa_mgf1_md(ctx, EVP_sha256());
    }

    static int set_pss(EVP_PKEY_CTX* ctx) {
        if (EVP_PKEY_CTX_set_rsa_padding(ctx, RSA_PKCS1_PSS_PADDING) <= 0) return 0;
        return EVP_PKEY_CTX_set_rsa_pss_saltlen(ctx, RSA_PSS_SALTLEN_DIGEST);
    }

    static Bytes encode_der(EVP_PKEY* key, bool is_private) {
        unsigned char* buf = nullptr;
        int len = is_private ? i2d_PrivateKey(key, &buf) : i2d_PUBKEY(key, &buf);
        if (len <= 0) throw Error(Errc::io_error, "key DER encoding failed");
        Bytes out(buf, buf + len);
        OPENSSL_free(buf);
        return out;
    }

    static Pkey decode_public(ByteView der) {
        const unsigned char* p = der.data();
        Pkey key(d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size())));
        if (!key || EVP_PKEY_base_id(key.get()) != EVP_PKEY_RSA) {
            ERR_clear_error();
            throw Error(Errc::malformed_key, "expected DER RSA public key");
        }
        return key;
    }

    static Pkey decode_private(ByteView der) {
        const unsigned char* p = der.data();
        Pkey key(d2i_PrivateKey(EVP_PKEY_RSA, nullptr, &p, static_cast<long>(der.size())));
        if (!key) {
            ERR_clear_error();
            throw Error(Errc::malformed_key, "expected DER RSA private key");
        }
        return key;
    }
};

}  // namespace adhocnet
