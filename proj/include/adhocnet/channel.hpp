#pragma once

#include <optional>

#include "adhocnet/handshake.hpp"

namespace adhocnet {

// One protected data record. Wire layout, all big-endian:
//   seq(8) | iv(16) | ct_len(4) | ciphertext | tag(32)
// The tag is HMAC-SHA-256 over seq | iv | ciphertext under the sender
// direction's MAC key; the ciphertext is AES-128-CBC with PKCS#7 padding
// under the sender direction's encryption key.
struct Record {
    std::uint64_t seq = 0;
    std::array<std::uint8_t, 16> iv{};
    Bytes ciphertext;
    Bytes tag;

    static constexpr std::size_t kMinSize = 8 + 16 + 4 + 32;

    Bytes encode() const {
        ByteWriter w;
        w.u64(seq);
        w.raw(ByteView(iv.data(), iv.size()));
        w.u32(static_cast<std::uint32_t>(ciphertext.size()));
        w.raw(ciphertext);
        w.raw(tag);
        return w.take();
    }

    static std::optional<Record> decode(ByteView wire) {
        if (wire.size() < kMinSize) return std::nullopt;
        ByteReader r(wire);
        Record rec;
        rec.seq = r.u64();
        Bytes iv = r.raw(16);
        std::copy(iv.begin(), iv.end(), rec.iv.begin());
        std::uint32_t ct_len = r.u32();
        if (r.remaining() != static_cast<std::size_t>(ct_len) + 32) return std::nullopt;
        rec.ciphertext = r.raw(ct_len);
        rec.tag = r.raw(32);
        return rec;
    }

    // The exact bytes the tag authenticates.
    Bytes mac_input() const {
        ByteWriter w;
        w.u64(seq);
        w.raw(ByteView(iv.data(), iv.size()));
        w.raw(ciphertext);
        return w.take();
    }
};

// Post-handshake protection for one connection direction pair. Sending uses
// this side's directional keys, receiving the peer's; a record sealed by one
// side can never be opened by that same side. Sequence numbers are strictly
// monotone per direction: each seal increments send_seq, and open accepts
// only seq above the highest previously accepted (duplicates and rollbacks
// are replays). MAC verification precedes decryption, and padding failures
// are reported as IntegrityFailure so the two are externally
// indistinguishable.
class SecureChannel {
public:
    enum class Role : std::uint8_t { initiator, responder };

    SecureChannel(CryptoProvider& provider, SessionSecrets secrets, Role role)
        : provider_(&provider), secrets_(std::move(secrets)), role_(role) {}

    Record seal(ByteView plaintext, SplitMix64& rng) {
        if (!open_) throw Error(Errc::channel_closed, "seal on a closed channel");
        Record rec;
        rec.seq = ++send_seq_;
        rng.fill(rec.iv.data(), rec.iv.size());
        rec.ciphertext = provider_->sym_encrypt(send_enc_key(), iv_view(rec), plaintext);
        rec.tag = provider_->hmac(send_mac_key(), rec.mac_input());
        return rec;
    }

    Bytes open(const Record& rec) {
        if (!open_) throw Error(Errc::channel_closed, "open on a closed channel");
        Bytes expect = provider_->hmac(recv_mac_key(), rec.mac_input());
        if (rec.tag != expect) throw Error(Errc::integrity_failure, "record tag rejected");
        if (rec.seq <= recv_high_water_)
            throw Error(Errc::replay_detected, "record sequence not above high water");
        Bytes plaintext;
        try {
            plaintext = provider_->sym_decrypt(recv_enc_key(), iv_view(rec), rec.ciphertext);
        } catch (const Error&) {
            // Padding problems must look exactly like MAC problems outside.
            throw Error(Errc::integrity_failure, "record tag rejected");
        }
        recv_high_water_ = rec.seq;
        return plaintext;
    }

    void close() { open_ = false; }
    bool is_open() const { return open_; }

    Role role() const { return role_; }
    std::uint64_t send_seq() const { return send_seq_; }
    std::uint64_t recv_high_water() const { return recv_high_water_; }
    const SessionSecrets& secrets() const { return secrets_; }

private:
    static ByteView iv_view(const Record& rec) { return ByteView(rec.iv.data(), rec.iv.size()); }

    ByteView send_enc_key() const {
        const auto& k = role_ == Role::initiator ? secrets_.enc_i : secrets_.enc_r;
        return ByteView(k.data(), k.size());
    }
    ByteView send_mac_key() const {
        const auto& k = role_ == Role::initiator ? secrets_.mac_i : secrets_.mac_r;
        return ByteView(k.data(), k.size());
    }
    ByteView recv_enc_key() const {
        const auto& k = role_ == Role::initiator ? secrets_.enc_r : secrets_.enc_i;
        return ByteView(k.data(), k.size());
    }
    ByteView recv_mac_key() const {
        const auto& k = role_ == Role::initiator ? secrets_.mac_r : secrets_.mac_i;
        return ByteView(k.data(), k.size());
    }

    CryptoProvider* provider_;
    SessionSecrets secrets_;
    Role role_;
    bool open_ = true;
    std::uint64_t send_seq_ = 0;
    std::uint64_t recv_high_water_ = 0;
};

}  // namespace adhocnet
