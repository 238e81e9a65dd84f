#pragma once

#include <vector>

#include "adhocnet/crypto/provider.hpp"

namespace adhocnet {

// One crypto operation observed through a RecordingProvider. The field roles
// depend on the kind:
//   keypair      key=public, aux=private
//   pk_encrypt   key=public, input=plaintext, output=ciphertext
//   pk_decrypt   key=private, input=ciphertext, output=plaintext
//   sign         key=private, input=message, output=signature
//   hmac         key=mac key, input=message, output=mac
//   sym_encrypt  key=enc key, aux=iv, input=plaintext, output=ciphertext
//   hash         input=data, output=digest
//   nonce        output=nonce bytes
//   session_key  output=key bytes
struct CryptoEvent {
    enum class Kind {
        keypair,
        pk_encrypt,
        pk_decrypt,
        sign,
        hmac,
        sym_encrypt,
        hash,
        nonce,
        session_key,
    };

    Kind kind{};
    Bytes key;
    Bytes aux;
    Bytes input;
    Bytes output;
};

// Ground truth of which byte strings were produced by which operation under
// which key. The security audit uses it to lift raw transcript bytes into
// structured terms; without it, a ciphertext and a random blob are
// indistinguishable.
class CryptoLog {
public:
    void record(CryptoEvent e) { events_.push_back(std::move(e)); }

    const std::vector<CryptoEvent>& events() const { return events_; }

    std::size_t size() const { return events_.size(); }

    void clear() { events_.clear(); }

private:
    std::vector<CryptoEvent> events_;
};

// Pass-through decorator: delegates every operation to the wrapped provider
// and appends a CryptoEvent describing it. Verification and sym_decrypt are
// deliberately not logged — they reveal nothing the encrypt-side events
// don't already cover, and failures would pollute the term dictionary.
class RecordingProvider final : public CryptoProvider {
public:
    RecordingProvider(CryptoProvider& inner, CryptoLog& log) : inner_(&inner), log_(&log) {}

    std::string_view suite() const override { return inner_->suite(); }

    KeyPair generate_keypair(SplitMix64& rng) override {
        KeyPair kp = inner_->generate_keypair(rng);
        log_->record({CryptoEvent::Kind::keypair, kp.public_key, kp.private_key, {}, {}});
        return kp;
    }

    Bytes pk_encrypt(ByteView public_key, ByteView plaintext, SplitMix64& rng) override {
        Bytes ct = inner_->pk_encrypt(public_key, plaintext, rng);
        log_->record({CryptoEvent::Kind::pk_encrypt, Bytes(public_key.begin(), public_key.end()),
                      {}, Bytes(plaintext.begin(), plaintext.end()), ct});
        return ct;
    }

    Bytes pk_decrypt(ByteView private_key, ByteView ciphertext) override {
        Bytes pt = inner_->pk_decrypt(private_key, ciphertext);
        log_->record({CryptoEvent::Kind::pk_decrypt, Bytes(private_key.begin(), private_key.end()),
                      {}, Bytes(ciphertext.begin(), ciphertext.end()), pt});
        return pt;
    }

    Bytes sign(ByteView private_key, ByteView message) override {
        Bytes sig = inner_->sign(private_key, message);
        log_->record({CryptoEvent::Kind::sign, Bytes(private_key.begin(), private_key.end()), {},
                      Bytes(message.begin(), message.end()), sig});
        return sig;
    }

    bool verify(ByteView public_key, ByteView message, ByteView signature) override {
        return inner_->verify(public_key, message, signature);
    }

    Digest hash(ByteView data) override {
        Digest d = inner_->hash(data);
        log_->record({CryptoEvent::Kind::hash, {}, {}, Bytes(data.begin(), data.end()),
                      Bytes(d.begin(), d.end())});
        return d;
    }

    Bytes hmac(ByteView key, ByteView data) override {
        Bytes mac = inner_->hmac(key, data);
        log_->record({CryptoEvent::Kind::hmac, Bytes(key.begin(), key.end()), {},
                      Bytes(data.begin(), data.end()), mac});
        return mac;
    }

    Bytes sym_encrypt(ByteView key, ByteView iv, ByteView plaintext) override {
        Bytes ct = inner_->sym_encrypt(key, iv, plaintext);
        log_->record({CryptoEvent::Kind::sym_encrypt, Bytes(key.begin(), key.end()),
                      Bytes(iv.begin(), iv.end()), Bytes(plaintext.begin(), plaintext.end()), ct});
        return ct;
    }

    Bytes sym_decrypt(ByteView key, ByteView iv, ByteView ciphertext) override {
        return inner_->sym_decrypt(key, iv, ciphertext);
    }

    Nonce generate_nonce(SplitMix64& rng) override {
        Nonce n = inner_->generate_nonce(rng);
        log_->record({CryptoEvent::Kind::nonce, {}, {}, {}, Bytes(n.view().begin(), n.view().end())});
        return n;
    }

    SessionKey generate_session_key(SplitMix64& rng) override {
        SessionKey k = inner_->generate_session_key(rng);
        log_->record(
            {CryptoEvent::Kind::session_key, {}, {}, {}, Bytes(k.view().begin(), k.view().end())});
        return k;
    }

private:
    CryptoProvider* inner_;
    CryptoLog* log_;
};

}  // namespace adhocnet
