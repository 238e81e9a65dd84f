#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>

#include "adhocnet/address.hpp"
#include "adhocnet/crypto/provider.hpp"

namespace adhocnet {

// Authentication mode for one connection, strongest first. Numeric values
// are the wire encoding of the mode byte in handshake messages.
enum class AuthMode : std::uint8_t {
    mutual_cert = 1,    // both sides certified, mutual authentication
    one_way_cert = 2,   // only the initiator certified; responder stays anonymous
    preshared_key = 3,  // both sides hold a shared group key
    no_auth = 4,        // no handshake, traffic bypasses the security layer
};

inline std::string_view auth_mode_name(AuthMode m) {
    switch (m) {
        case AuthMode::mutual_cert: return "MutualCert";
        case AuthMode::one_way_cert: return "OneWayCert";
        case AuthMode::preshared_key: return "PresharedKey";
        case AuthMode::no_auth: return "NoAuth";
    }
    return "Unknown";
}

inline std::optional<AuthMode> auth_mode_from(std::uint8_t v) {
    if (v >= 1 && v <= 4) return static_cast<AuthMode>(v);
    return std::nullopt;
}

// Bit assigned to each mode in discovery beacons: 0x01 MutualCert,
// 0x02 OneWayCert, 0x04 PresharedKey, 0x08 NoAuth.
constexpr std::uint8_t mode_bit(AuthMode m) {
    return static_cast<std::uint8_t>(1u << (static_cast<std::uint8_t>(m) - 1));
}

// Local credentials and trust configuration of one node.
struct Identity {
    std::string name;
    Bytes ca_public;                  // trust root; empty = cannot verify peer certificates
    std::optional<Certificate> cert;  // own certificate, if issued
    Bytes private_key;                // private key matching cert; empty = none
    Bytes psk;                        // pre-shared group key; empty = none
    std::string psk_id;               // identity label reported for PSK-authenticated peers

    bool has_cert() const { return cert.has_value() && !private_key.empty(); }
    bool has_psk() const { return !psk.empty(); }
};

// Capability byte a node advertises in its discovery beacon: the modes it can
// serve as a responder. MutualCert implies it holds a certificate; OneWayCert
// only requires the trust root (the responder side of that mode is certless);
// PresharedKey requires the group key. NoAuth is always available.
inline std::uint8_t advertised_modes(const Identity& id) {
    std::uint8_t bits = mode_bit(AuthMode::no_auth);
    if (id.has_cert() && !id.ca_public.empty()) bits |= mode_bit(AuthMode::mutual_cert);
    if (!id.ca_public.empty()) bits |= mode_bit(AuthMode::one_way_cert);
    if (id.has_psk()) bits |= mode_bit(AuthMode::preshared_key);
    return bits;
}

// Strongest mode the local (initiating) credentials and the peer's advertised
// capabilities jointly support: MutualCert when both are certified, OneWayCert
// when the initiator alone is certified and the peer can verify it,
// PresharedKey when both hold the group key, NoAuth as the floor. A certified
// peer contacted by a certless initiator falls through to PresharedKey/NoAuth
// because the one-way flow needs the certificate on the initiating side.
inline AuthMode select_mode(const Identity& local, std::uint8_t peer_modes) {
    if (local.has_cert() && (peer_modes & mode_bit(AuthMode::mutual_cert)))
        return AuthMode::mutual_cert;
    if (local.has_cert() && (peer_modes & mode_bit(AuthMode::one_way_cert)))
        return AuthMode::one_way_cert;
    if (local.has_psk() && (peer_modes & mode_bit(AuthMode::preshared_key)))
        return AuthMode::preshared_key;
    return AuthMode::no_auth;
}

// --- Handshake messages -----------------------------------------------------
//
// Each message serializes as: mode byte, then length-prefixed fields in
// declared order. The 1-byte message kind (0x02/0x03/0x04) travels as the
// platform header's msg_type and is not repeated in the body. Field presence
// depends on the mode, so decode is driven by the mode byte.

struct HandshakeM1 {
    static constexpr std::uint8_t kKind = 0x02;

    AuthMode mode = AuthMode::no_auth;
    Nonce n1;
    std::optional<Certificate> cert_a;  // certificate modes only

    Bytes encode() const {
        ByteWriter w;
        w.u8(static_cast<std::uint8_t>(mode));
        w.lp(n1.view());
        if (mode == AuthMode::mutual_cert || mode == AuthMode::one_way_cert) {
            if (!cert_a) throw Error(Errc::missing_credentials, "M1 in a certificate mode needs cert_a");
            w.lp(cert_a->encode());
        }
        return w.take();
    }

    static HandshakeM1 decode(ByteView body) {
        ByteReader r(body);
        HandshakeM1 m;
        auto mode = auth_mode_from(r.u8());
        if (!mode) throw Error(Errc::malformed, "unknown auth mode in M1");
        m.mode = *mode;
        auto n1 = Nonce::from(r.lp());
        if (!n1) throw Error(Errc::malformed, "M1 nonce has wrong size");
        m.n1 = *n1;
        if (m.mode == AuthMode::mutual_cert || m.mode == AuthMode::one_way_cert) {
            auto cert = Certificate::decode(r.lp());
            if (!cert) throw Error(Errc::malformed, "M1 certificate does not parse");
            m.cert_a = std::move(cert);
        }
        if (!r.done()) throw Error(Errc::malformed, "trailing bytes after M1");
        return m;
    }
};

struct HandshakeM2 {
    static constexpr std::uint8_t kKind = 0x03;

    AuthMode mode = AuthMode::no_auth;
    Nonce n2;
    Bytes enc_k;                        // wrapped session key; certificate modes only
    std::optional<Certificate> cert_b;  // MutualCert only
    Bytes auth;                         // sig_b (MutualCert) or MAC (PresharedKey)

    Bytes encode() const {
        ByteWriter w;
        w.u8(static_cast<std::uint8_t>(mode));
        w.lp(n2.view());
        switch (mode) {
            case AuthMode::mutual_cert:
                if (!cert_b) throw Error(Errc::missing_credentials, "MutualCert M2 needs cert_b");
                w.lp(enc_k);
                w.lp(cert_b->encode());
                w.lp(auth);
                break;
            case AuthMode::one_way_cert:
                w.lp(enc_k);
                break;
            case AuthMode::preshared_key:
                w.lp(auth);
                break;
            case AuthMode::no_auth:
                throw Error(Errc::unsupported_mode, "NoAuth has no M2");
        }
        return w.take();
    }

    static HandshakeM2 decode(ByteView body) {
        ByteReader r(body);
        HandshakeM2 m;
        auto mode = auth_mode_from(r.u8());
        if (!mode || *mode == AuthMode::no_auth)
            throw Error(Errc::malformed, "bad auth mode in M2");
        m.mode = *mode;
        auto n2 = Nonce::from(r.lp());
        if (!n2) throw Error(Errc::malformed, "M2 nonce has wrong size");
        m.n2 = *n2;
        switch (m.mode) {
            case AuthMode::mutual_cert: {
                m.enc_k = r.lp();
                auto cert = Certificate::decode(r.lp());
                if (!cert) throw Error(Errc::malformed, "M2 certificate does not parse");
                m.cert_b = std::move(cert);
                m.auth = r.lp();
                break;
            }
            case AuthMode::one_way_cert:
                m.enc_k = r.lp();
                break;
            case AuthMode::preshared_key:
                m.auth = r.lp();
                break;
            case AuthMode::no_auth:
                break;  // unreachable
        }
        if (!r.done()) throw Error(Errc::malformed, "trailing bytes after M2");
        return m;
    }
};

struct HandshakeM3 {
    static constexpr std::uint8_t kKind = 0x04;

    AuthMode mode = AuthMode::no_auth;
    Bytes auth;  // sig_a (MutualCert) or MAC (OneWayCert / PresharedKey)

    Bytes encode() const {
        ByteWriter w;
        w.u8(static_cast<std::uint8_t>(mode));
        w.lp(auth);
        return w.take();
    }

    static HandshakeM3 decode(ByteView body) {
        ByteReader r(body);
        HandshakeM3 m;
        auto mode = auth_mode_from(r.u8());
        if (!mode || *mode == AuthMode::no_auth)
            throw Error(Errc::malformed, "bad auth mode in M3");
        m.mode = *mode;
        m.auth = r.lp();
        if (!r.done()) throw Error(Errc::malformed, "trailing bytes after M3");
        return m;
    }
};

// --- Session secrets ---------------------------------------------------------

// Directional key block both sides derive on success. enc_i/mac_i protect
// initiator-to-responder records, enc_r/mac_r the reverse. `master` is kept
// (never transmitted) so audits can scan traffic for key leakage.
struct SessionSecrets {
    std::array<std::uint8_t, 16> enc_i{};
    std::array<std::uint8_t, 32> mac_i{};
    std::array<std::uint8_t, 16> enc_r{};
    std::array<std::uint8_t, 32> mac_r{};
    Nonce n1;
    Nonce n2;
    SessionKey master;
    AuthMode mode = AuthMode::no_auth;
    std::string peer_identity;

    bool operator==(const SessionSecrets&) const = default;
};

inline SessionSecrets derive_secrets(CryptoProvider& p, const SessionKey& master, const Nonce& n1,
                                     const Nonce& n2, AuthMode mode, std::string peer_identity) {
    SessionSecrets s;
    Bytes ei = kdf(p, master, n1, n2, "ENC-I");
    Bytes er = kdf(p, master, n1, n2, "ENC-R");
    Bytes mi = kdf(p, master, n1, n2, "MAC-I");
    Bytes mr = kdf(p, master, n1, n2, "MAC-R");
    std::copy(ei.begin(), ei.end(), s.enc_i.begin());
    std::copy(er.begin(), er.end(), s.enc_r.begin());
    std::copy(mi.begin(), mi.end(), s.mac_i.begin());
    std::copy(mr.begin(), mr.end(), s.mac_r.begin());
    s.n1 = n1;
    s.n2 = n2;
    s.master = master;
    s.mode = mode;
    s.peer_identity = std::move(peer_identity);
    return s;
}

namespace detail {

// All signed/MAC'd transcripts use canonical length-prefixed field
// concatenation; the set notation of the protocol fixes content, this fixes
// the byte layout and makes it injective.

inline Digest m2_digest(CryptoProvider& p, const Nonce& n1, const SessionKey& k, ByteView enc_k) {
    ByteWriter w;
    w.lp(n1.view());
    w.lp(k.view());
    w.lp(enc_k);
    return p.hash(w.data());
}

inline Digest m3_digest(CryptoProvider& p, const Nonce& n1, const Nonce& n2, const SessionKey& k,
                        ByteView enc_k) {
    ByteWriter w;
    w.lp(n1.view());
    w.lp(n2.view());
    w.lp(k.view());
    w.lp(enc_k);
    return p.hash(w.data());
}

// One-way mode M3: possession proof. Only the holder of the initiator's
// private key can unwrap enc_k and derive this MAC key.
inline Bytes oneway_m3_mac(CryptoProvider& p, const SessionKey& k, const Nonce& n1,
                           const Nonce& n2, ByteView enc_k) {
    Bytes mac_key = kdf(p, k, n1, n2, "MAC-I");
    ByteWriter w;
    w.lp(n1.view());
    w.lp(n2.view());
    w.lp(enc_k);
    return p.hmac(mac_key, w.data());
}

// PSK transcript MACs. Distinct labels plus swapped nonce order in M3 keep
// the two directions non-interchangeable (no reflection).
inline Bytes psk_mac(CryptoProvider& p, ByteView psk, std::string_view label, const Nonce& first,
                     const Nonce& second) {
    ByteWriter w;
    w.lp_str(label);
    w.lp(first.view());
    w.lp(second.view());
    return p.hmac(psk, w.data());
}

inline SessionKey psk_master(CryptoProvider& p, ByteView psk, const Nonce& n1, const Nonce& n2) {
    Bytes full = psk_mac(p, psk, "MS", n1, n2);
    full.resize(16);
    return *SessionKey::from(full);
}

}  // namespace detail

// --- State machines ----------------------------------------------------------

enum class HandshakePhase : std::uint8_t { start, await_m2, await_m3, established, failed };

inline std::string_view handshake_phase_name(HandshakePhase p) {
    switch (p) {
        case HandshakePhase::start: return "Start";
        case HandshakePhase::await_m2: return "AwaitM2";
        case HandshakePhase::await_m3: return "AwaitM3";
        case HandshakePhase::established: return "Established";
        case HandshakePhase::failed: return "Failed";
    }
    return "Unknown";
}

constexpr VirtualTime kDefaultHandshakeTimeout = 3000;

// Initiator-side state machine for one session. Construction performs the
// session start (draws n1, checks credentials); m1() yields the first
// message. Inputs are (message, now); any verification failure moves the
// machine to Failed permanently. Out-of-phase inputs throw StaleNonce
// without changing state, so a duplicated message cannot kill a live session.
class HandshakeInitiator {
public:
    HandshakeInitiator(CryptoProvider& provider, const Identity& self, NodeAddress peer,
                       AuthMode mode, SplitMix64& rng, VirtualTime now,
                       VirtualTime timeout = kDefaultHandshakeTimeout)
        : provider_(&provider), self_(&self), peer_(peer), mode_(mode), deadline_(now + timeout) {
        switch (mode) {
            case AuthMode::mutual_cert:
                if (!self.has_cert() || self.ca_public.empty())
                    throw Error(Errc::missing_credentials, "MutualCert needs certificate and trust root");
                break;
            case AuthMode::one_way_cert:
                if (!self.has_cert())
                    throw Error(Errc::missing_credentials, "OneWayCert needs the initiator certified");
                break;
            case AuthMode::preshared_key:
                if (!self.has_psk())
                    throw Error(Errc::missing_credentials, "PresharedKey needs the shared key");
                break;
            case AuthMode::no_auth:
                throw Error(Errc::unsupported_mode, "NoAuth runs without a handshake");
        }
        n1_ = provider.generate_nonce(rng);
        phase_ = HandshakePhase::await_m2;
    }

    HandshakeM1 m1() const {
        HandshakeM1 m;
        m.mode = mode_;
        m.n1 = n1_;
        if (mode_ == AuthMode::mutual_cert || mode_ == AuthMode::one_way_cert) m.cert_a = self_->cert;
        return m;
    }

    HandshakeM3 on_m2(const HandshakeM2& m2, VirtualTime now) {
        if (phase_ != HandshakePhase::await_m2)
            throw Error(Errc::stale_nonce, "M2 outside AwaitM2 ignored");
        try {
            if (now >= deadline_) throw Error(Errc::timeout, "handshake deadline passed");
            if (m2.mode != mode_) throw Error(Errc::malformed, "M2 mode differs from session mode");
            switch (mode_) {
                case AuthMode::mutual_cert: return on_m2_mutual(m2);
                case AuthMode::one_way_cert: return on_m2_oneway(m2);
                case AuthMode::preshared_key: return on_m2_psk(m2);
                case AuthMode::no_auth: break;  // unreachable: constructor rejects
            }
            throw Error(Errc::unsupported_mode, "no M2 handling for this mode");
        } catch (...) {
            phase_ = HandshakePhase::failed;
            throw;
        }
    }

    HandshakePhase phase() const { return phase_; }
    AuthMode mode() const { return mode_; }
    const Nonce& n1() const { return n1_; }
    NodeAddress peer() const { return peer_; }

    const SessionSecrets& secrets() const {
        if (phase_ != HandshakePhase::established)
            throw Error(Errc::not_established, "no session secrets before Established");
        return secrets_;
    }

    bool expired(VirtualTime now) const {
        return phase_ == HandshakePhase::await_m2 && now >= deadline_;
    }

    VirtualTime deadline() const { return deadline_; }

    void fail() {
        if (phase_ != HandshakePhase::established) phase_ = HandshakePhase::failed;
    }

private:
    HandshakeM3 on_m2_mutual(const HandshakeM2& m2) {
        if (!m2.cert_b) throw Error(Errc::malformed, "MutualCert M2 without certificate");
        if (!verify_certificate(*provider_, self_->ca_public, *m2.cert_b))
            throw Error(Errc::bad_certificate, "responder certificate rejected");
        if (m2.cert_b->subject_addr != peer_)
            throw Error(Errc::bad_certificate, "certificate subject is not the contacted peer");
        SessionKey k = unwrap_key(m2.enc_k);
        Digest h2 = detail::m2_digest(*provider_, n1_, k, m2.enc_k);
        if (!provider_->verify(m2.cert_b->subject_public, digest_view(h2), m2.auth))
            throw Error(Errc::signature_invalid, "responder signature rejected");
        Digest h3 = detail::m3_digest(*provider_, n1_, m2.n2, k, m2.enc_k);
        HandshakeM3 m3{mode_, provider_->sign(self_->private_key, digest_view(h3))};
        return establish(k, m2.n2, m2.cert_b->subject_name, std::move(m3));
    }

    HandshakeM3 on_m2_oneway(const HandshakeM2& m2) {
        // The responder is deliberately unauthenticated in this mode; the
        // possession proof in M3 authenticates us to them, not vice versa.
        SessionKey k = unwrap_key(m2.enc_k);
        HandshakeM3 m3{mode_, detail::oneway_m3_mac(*provider_, k, n1_, m2.n2, m2.enc_k)};
        return establish(k, m2.n2, "anonymous", std::move(m3));
    }

    HandshakeM3 on_m2_psk(const HandshakeM2& m2) {
        Bytes expect = detail::psk_mac(*provider_, self_->psk, "M2", n1_, m2.n2);
        if (m2.auth != expect) throw Error(Errc::signature_invalid, "peer MAC rejected");
        SessionKey master = detail::psk_master(*provider_, self_->psk, n1_, m2.n2);
        HandshakeM3 m3{mode_, detail::psk_mac(*provider_, self_->psk, "M3", m2.n2, n1_)};
        return establish(master, m2.n2, self_->psk_id, std::move(m3));
    }

    SessionKey unwrap_key(ByteView enc_k) {
        Bytes k_bytes;
        try {
            k_bytes = provider_->pk_decrypt(self_->private_key, enc_k);
        } catch (const Error&) {
            throw Error(Errc::decrypt_failure, "session key unwrap failed");
        }
        auto k = SessionKey::from(k_bytes);
        if (!k) throw Error(Errc::decrypt_failure, "unwrapped session key has wrong size");
        return *k;
    }

    HandshakeM3 establish(const SessionKey& master, const Nonce& n2, std::string peer_identity,
                          HandshakeM3 m3) {
        secrets_ = derive_secrets(*provider_, master, n1_, n2, mode_, std::move(peer_identity));
        phase_ = HandshakePhase::established;
        return m3;
    }

    CryptoProvider* provider_;
    const Identity* self_;
    NodeAddress peer_;
    AuthMode mode_;
    Nonce n1_;
    VirtualTime deadline_;
    HandshakePhase phase_ = HandshakePhase::start;
    SessionSecrets secrets_;
};

// Responder-side state machine. Construction consumes M1 (credential and
// certificate checks, key generation); m2() yields the reply; on_m3 finishes.
class HandshakeResponder {
public:
    HandshakeResponder(CryptoProvider& provider, const Identity& self, NodeAddress peer_src,
                       const HandshakeM1& m1, SplitMix64& rng, VirtualTime now,
                       VirtualTime timeout = kDefaultHandshakeTimeout)
        : provider_(&provider),
          self_(&self),
          peer_(peer_src),
          mode_(m1.mode),
          n1_(m1.n1),
          deadline_(now + timeout) {
        switch (mode_) {
            case AuthMode::mutual_cert: on_m1_mutual(m1, rng); break;
            case AuthMode::one_way_cert: on_m1_oneway(m1, rng); break;
            case AuthMode::preshared_key: on_m1_psk(m1, rng); break;
            case AuthMode::no_auth:
                throw Error(Errc::unsupported_mode, "NoAuth runs without a handshake");
        }
        phase_ = HandshakePhase::await_m3;
    }

    const HandshakeM2& m2() const { return m2_; }

    const SessionSecrets& on_m3(const HandshakeM3& m3, VirtualTime now) {
        if (phase_ != HandshakePhase::await_m3)
            throw Error(Errc::stale_nonce, "M3 outside AwaitM3 ignored");
        try {
            if (now >= deadline_) throw Error(Errc::timeout, "handshake deadline passed");
            if (m3.mode != mode_) throw Error(Errc::malformed, "M3 mode differs from session mode");
            switch (mode_) {
                case AuthMode::mutual_cert: {
                    Digest h3 = detail::m3_digest(*provider_, n1_, n2_, k_, enc_k_);
                    if (!provider_->verify(cert_a_->subject_public, digest_view(h3), m3.auth))
                        throw Error(Errc::signature_invalid, "initiator signature rejected");
                    break;
                }
                case AuthMode::one_way_cert: {
                    Bytes expect = detail::oneway_m3_mac(*provider_, k_, n1_, n2_, enc_k_);
                    if (m3.auth != expect)
                        throw Error(Errc::signature_invalid, "possession proof rejected");
                    break;
                }
                case AuthMode::preshared_key: {
                    Bytes expect = detail::psk_mac(*provider_, self_->psk, "M3", n2_, n1_);
                    if (m3.auth != expect) throw Error(Errc::signature_invalid, "peer MAC rejected");
                    break;
                }
                case AuthMode::no_auth:
                    break;  // unreachable: constructor rejects
            }
            secrets_ = derive_secrets(*provider_, k_, n1_, n2_, mode_, peer_identity_);
            phase_ = HandshakePhase::established;
            return secrets_;
        } catch (...) {
            phase_ = HandshakePhase::failed;
            throw;
        }
    }

    HandshakePhase phase() const { return phase_; }
    AuthMode mode() const { return mode_; }
    const Nonce& n1() const { return n1_; }
    const Nonce& n2() const { return n2_; }
    NodeAddress peer() const { return peer_; }

    const SessionSecrets& secrets() const {
        if (phase_ != HandshakePhase::established)
            throw Error(Errc::not_established, "no session secrets before Established");
        return secrets_;
    }

    bool expired(VirtualTime now) const {
        return phase_ == HandshakePhase::await_m3 && now >= deadline_;
    }

    VirtualTime deadline() const { return deadline_; }

    void fail() {
        if (phase_ != HandshakePhase::established) phase_ = HandshakePhase::failed;
    }

private:
    void on_m1_mutual(const HandshakeM1& m1, SplitMix64& rng) {
        if (!self_->has_cert() || self_->ca_public.empty())
            throw Error(Errc::unsupported_mode, "MutualCert needs certificate and trust root");
        check_initiator_cert(m1);
        make_key_material(rng);
        Digest h2 = detail::m2_digest(*provider_, n1_, k_, enc_k_);
        m2_ = HandshakeM2{mode_, n2_, enc_k_, self_->cert,
                          provider_->sign(self_->private_key, digest_view(h2))};
        peer_identity_ = cert_a_->subject_name;
    }

    void on_m1_oneway(const HandshakeM1& m1, SplitMix64& rng) {
        if (self_->ca_public.empty())
            throw Error(Errc::unsupported_mode, "OneWayCert response needs the trust root");
        check_initiator_cert(m1);
        make_key_material(rng);
        m2_ = HandshakeM2{mode_, n2_, enc_k_, std::nullopt, {}};
        peer_identity_ = cert_a_->subject_name;
    }

    void on_m1_psk(const HandshakeM1& m1, SplitMix64& rng) {
        if (!self_->has_psk())
            throw Error(Errc::unsupported_mode, "PresharedKey needs the shared key");
        n2_ = provider_->generate_nonce(rng);
        k_ = detail::psk_master(*provider_, self_->psk, m1.n1, n2_);
        m2_ = HandshakeM2{mode_, n2_, {}, std::nullopt,
                          detail::psk_mac(*provider_, self_->psk, "M2", m1.n1, n2_)};
        peer_identity_ = self_->psk_id;
    }

    // Certificate checks run before any key generation: reject cheaply, and
    // bind the certificate subject to the claimed source address so a
    // relayed M1 cannot impersonate a third party.
    void check_initiator_cert(const HandshakeM1& m1) {
        if (!m1.cert_a) throw Error(Errc::malformed, "certificate mode M1 without certificate");
        if (!verify_certificate(*provider_, self_->ca_public, *m1.cert_a))
            throw Error(Errc::bad_certificate, "initiator certificate rejected");
        if (m1.cert_a->subject_addr != peer_)
            throw Error(Errc::bad_certificate, "certificate subject is not the message source");
        cert_a_ = m1.cert_a;
    }

    void make_key_material(SplitMix64& rng) {
        n2_ = provider_->generate_nonce(rng);
        k_ = provider_->generate_session_key(rng);
        enc_k_ = provider_->pk_encrypt(cert_a_->subject_public, k_.view(), rng);
    }

    CryptoProvider* provider_;
    const Identity* self_;
    NodeAddress peer_;
    AuthMode mode_;
    Nonce n1_;
    Nonce n2_;
    SessionKey k_;
    Bytes enc_k_;
    std::optional<Certificate> cert_a_;
    HandshakeM2 m2_;
    std::string peer_identity_;
    VirtualTime deadline_;
    HandshakePhase phase_ = HandshakePhase::start;
    SessionSecrets secrets_;
};

// Duplicate-session guard: a responder must not spawn a second session for a
// replayed (source, n1) pair even though nonces alone would look fresh.
class NonceRegistry {
public:
    // Returns false if this (src, n1) was seen before.
    bool insert(NodeAddress src, const Nonce& n1) { return seen_.emplace(src, n1).second; }

    bool contains(NodeAddress src, const Nonce& n1) const {
        return seen_.count({src, n1}) != 0;
    }

    std::size_t size() const { return seen_.size(); }

private:
    std::set<std::pair<NodeAddress, Nonce>> seen_;
};

}  // namespace adhocnet
