#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <memory>

#include "adhocnet/bytes.hpp"
#include "adhocnet/crypto/types.hpp"
#include "adhocnet/error.hpp"

namespace adhocnet {

inline Digest sha256(ByteView data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size())
        throw Error(Errc::io_error, "SHA-256 failed");
    return out;
}

inline Bytes hmac_sha256(ByteView key, ByteView data) {
    Bytes out(32);
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
             out.data(), &len) == nullptr ||
        len != 32)
        throw Error(Errc::io_error, "HMAC-SHA-256 failed");
    return out;
}

namespace detail {

struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

inline Bytes aes128_cbc(bool encrypt, ByteView key, ByteView iv, ByteView in) {
    if (key.size() != 16 || iv.size() != 16)
        throw Error(Errc::malformed_key, "AES-128-CBC needs 16-byte key and iv");
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx || EVP_CipherInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr, key.data(), iv.data(),
                                  encrypt ? 1 : 0) != 1)
        throw Error(Errc::io_error, "cipher init failed");
    Bytes out(in.size() + 16);
    int n1 = 0, n2 = 0;
    if (EVP_CipherUpdate(ctx.get(), out.data(), &n1, in.data(), static_cast<int>(in.size())) != 1)
        throw Error(Errc::decrypt_failure, "cipher update failed");
    if (EVP_CipherFinal_ex(ctx.get(), out.data() + n1, &n2) != 1)
        throw Error(Errc::decrypt_failure, "bad block or padding");
    out.resize(static_cast<std::size_t>(n1 + n2));
    return out;
}

}  // namespace detail

// AES-128-CBC with PKCS#7 padding.
inline Bytes aes128_cbc_encrypt(ByteView key, ByteView iv, ByteView plaintext) {
    return detail::aes128_cbc(true, key, iv, plaintext);
}

inline Bytes aes128_cbc_decrypt(ByteView key, ByteView iv, ByteView ciphertext) {
    if (ciphertext.empty() || ciphertext.size() % 16 != 0)
        throw Error(Errc::decrypt_failure, "ciphertext not block-aligned");
    return detail::aes128_cbc(false, key, iv, ciphertext);
}

}  // namespace adhocnet
