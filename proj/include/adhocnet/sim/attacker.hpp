#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "adhocnet/crypto/provider.hpp"
#include "adhocnet/node.hpp"
#include "adhocnet/segment.hpp"
#include "adhocnet/sim_medium.hpp"

namespace adhocnet {

// In-medium adversary scripts. Each script models one classic attack on the
// handshake or the data channel; the harness asserts afterwards that session
// keys stayed underivable and no session was mis-established.
enum class AttackScript {
    none,
    replay_data,       // re-inject observed data records with fresh transport ids
    reflect_m1,        // bounce a node's own handshake opener back at it
    splice_m2,         // swap the M2 replies of two concurrent handshakes
    drop_m3,           // suppress every M3, stranding both sides mid-handshake
    forge_cert,        // answer M1 with a self-signed certificate chain
    inject_noise,      // spray malformed frames/segments/messages at both peers
    duplicate_m1,      // re-deliver an observed M1 under a fresh transport id
    replay_handshake,  // replay a full recorded handshake after it completed
};

inline const char* attack_script_name(AttackScript s) {
    switch (s) {
        case AttackScript::none: return "none";
        case AttackScript::replay_data: return "replay-data";
        case AttackScript::reflect_m1: return "reflect-m1";
        case AttackScript::splice_m2: return "splice-m2";
        case AttackScript::drop_m3: return "drop-m3";
        case AttackScript::forge_cert: return "forge-cert";
        case AttackScript::inject_noise: return "inject-noise";
        case AttackScript::duplicate_m1: return "duplicate-m1";
        case AttackScript::replay_handshake: return "replay-handshake";
    }
    return "?";
}

inline std::optional<AttackScript> attack_script_from(std::string_view name) {
    for (AttackScript s :
         {AttackScript::none, AttackScript::replay_data, AttackScript::reflect_m1,
          AttackScript::splice_m2, AttackScript::drop_m3, AttackScript::forge_cert,
          AttackScript::inject_noise, AttackScript::duplicate_m1, AttackScript::replay_handshake})
        if (name == attack_script_name(s)) return s;
    return std::nullopt;
}

inline std::vector<AttackScript> all_attack_scripts() {
    return {AttackScript::replay_data,  AttackScript::reflect_m1,  AttackScript::splice_m2,
            AttackScript::drop_m3,      AttackScript::forge_cert,  AttackScript::inject_noise,
            AttackScript::duplicate_m1, AttackScript::replay_handshake};
}

// Active man-in-the-middle attached as the medium tap. on_submit observes
// every honest frame and may suppress it; injections are deferred to step()
// so a forged frame never overtakes the frame that triggered it. All crypto
// goes through the shared (recording) provider so the secrecy audit can
// model the attacker's terms; freshly minted secrets are reported through
// initial_secrets(). The attacker never calls generate_nonce or
// generate_session_key, so those log events always belong to honest parties.
class Attacker : public MediumTap {
public:
    Attacker(AttackScript script, SimMedium& medium, CryptoProvider& provider, SplitMix64 rng)
        : script_(script), medium_(&medium), provider_(&provider), rng_(rng) {
        if (script_ == AttackScript::forge_cert) {
            keys_ = provider_->generate_keypair(rng_);
            minted_.push_back(keys_.public_key);
            minted_.push_back(keys_.private_key);
        }
    }

    // Called by the simulator whenever the attacker acts; wired to the trace.
    std::function<void(const std::string&)> on_action;

    bool on_submit(const Frame& frame, VirtualTime now) override {
        last_seen_ = now;
        observed_addrs_.insert(frame.src);
        if (!frame.dest.is_broadcast()) observed_addrs_.insert(frame.dest);
        auto msg = parse_platform(frame);
        switch (script_) {
            case AttackScript::none:
            case AttackScript::inject_noise:
                return true;
            case AttackScript::replay_data:
                if (msg && msg->type == kMsgData) remember_once(*msg);
                return true;
            case AttackScript::reflect_m1:
                if (msg && msg->type == kMsgHsM1) remember_once(*msg);
                return true;
            case AttackScript::duplicate_m1:
                if (msg && msg->type == kMsgHsM1) remember_once(*msg);
                return true;
            case AttackScript::splice_m2:
                if (msg && msg->type == kMsgHsM2) {
                    remember_once(*msg);
                    return false;  // hold every M2 (and its retransmits) back
                }
                return true;
            case AttackScript::drop_m3:
                if (msg && msg->type == kMsgHsM3) {
                    note("suppress M3 " + msg->src.str() + "->" + msg->dest.str());
                    return false;
                }
                return true;
            case AttackScript::forge_cert:
                if (msg && msg->type == kMsgHsM1) remember_once(*msg);
                if (msg && msg->type == kMsgHsM2 && forged_.count(route_key(*msg))) {
                    note("suppress genuine M2 " + msg->src.str() + "->" + msg->dest.str());
                    return false;  // our forgery already answered this handshake
                }
                return true;
            case AttackScript::replay_handshake:
                if (msg && (msg->type == kMsgHsM1 || msg->type == kMsgHsM2 ||
                            msg->type == kMsgHsM3 || msg->type == kMsgData))
                    transcript_.push_back(*msg);
                return true;
        }
        return true;
    }

    // One attacker action per quiescence round; returns true if it injected
    // anything (so the simulator keeps the round going).
    bool step(VirtualTime now) {
        switch (script_) {
            case AttackScript::none:
                return false;
            case AttackScript::replay_data:
            case AttackScript::duplicate_m1:
                return replay_pending("replay");
            case AttackScript::reflect_m1:
                return reflect_pending();
            case AttackScript::splice_m2:
                return splice_pending();
            case AttackScript::drop_m3:
                return false;  // pure suppression
            case AttackScript::forge_cert:
                return forge_pending();
            case AttackScript::inject_noise:
                return spray_noise(now);
            case AttackScript::replay_handshake:
                return replay_transcript(now);
        }
        return false;
    }

    const std::vector<Bytes>& initial_secrets() const { return minted_; }
    std::size_t injected() const { return injected_; }

private:
    struct SeenMessage {
        NodeAddress src, dest;
        std::uint8_t type = 0;
        std::uint32_t conn = 0;
        Bytes body;
    };

    static std::tuple<Bytes, Bytes, std::uint32_t, std::uint8_t> full_key(const SeenMessage& m) {
        return {Bytes(m.src.view().begin(), m.src.view().end()),
                Bytes(m.dest.view().begin(), m.dest.view().end()), m.conn, m.type};
    }

    static std::tuple<Bytes, std::uint32_t> route_key(const SeenMessage& m) {
        return {Bytes(m.src.view().begin(), m.src.view().end()), m.conn};
    }

    // Frame -> single-fragment platform message, if it is one.
    static std::optional<SeenMessage> parse_platform(const Frame& frame) {
        auto seg = Segment::decode(frame.payload);
        if (!seg || !seg->is_data() || !seg->crc_ok() || seg->header.frag_count != 1)
            return std::nullopt;
        if (seg->payload.size() < kPlatformHeaderSize) return std::nullopt;
        ByteReader r(seg->payload);
        SeenMessage m;
        m.src = frame.src;
        m.dest = frame.dest;
        m.type = r.u8();
        m.conn = r.u32();
        Bytes body(r.rest().begin(), r.rest().end());
        m.body = std::move(body);
        return m;
    }

    void remember_once(const SeenMessage& m) {
        if (seen_.insert(full_key(m)).second) pending_.push_back(m);
    }

    // Wraps a platform message in a fresh segment. Transport ids are taken
    // from a high range so they never collide with honest per-peer counters
    // inside the receiver's duplicate horizon.
    void inject_platform(const NodeAddress& src, const NodeAddress& dest, std::uint8_t type,
                         std::uint32_t conn, ByteView body) {
        ByteWriter w;
        w.u8(type);
        w.u32(conn);
        w.raw(body);
        Bytes message = w.take();
        auto segs = fragment(message, 1486, next_msg_id_++);
        for (const Segment& s : segs) medium_->inject(Frame{dest, src, kEthertype, s.encode()});
        injected_ += segs.size();
    }

    void note(const std::string& what) {
        if (on_action) on_action(what);
    }

    bool replay_pending(const char* verb) {
        if (pending_.empty()) return false;
        SeenMessage m = pending_.front();
        pending_.pop_front();
        inject_platform(m.src, m.dest, m.type, m.conn, m.body);
        note(std::string(verb) + " type=" + std::to_string(m.type) + " " + m.src.str() + "->" +
             m.dest.str() + " conn=" + std::to_string(m.conn));
        return true;
    }

    bool reflect_pending() {
        if (pending_.empty()) return false;
        SeenMessage m = pending_.front();
        pending_.pop_front();
        // Send the opener back to its author, claiming to be the original
        // destination: the certificate inside still names the author.
        inject_platform(m.dest, m.src, m.type, m.conn, m.body);
        note("reflect M1 back to " + m.src.str());
        return true;
    }

    bool splice_pending() {
        if (spliced_ || pending_.size() < 2) return false;
        const SeenMessage& a = pending_[0];
        const SeenMessage& b = pending_[1];
        inject_platform(a.src, a.dest, a.type, a.conn, b.body);
        inject_platform(b.src, b.dest, b.type, b.conn, a.body);
        note("splice M2 bodies between conn=" + std::to_string(a.conn) +
             " and conn=" + std::to_string(b.conn));
        spliced_ = true;
        return true;
    }

    bool forge_pending() {
        bool acted = false;
        while (!pending_.empty()) {
            SeenMessage m = pending_.front();
            pending_.pop_front();
            HandshakeM1 m1;
            try {
                m1 = HandshakeM1::decode(m.body);
            } catch (const Error&) {
                continue;
            }
            if (m1.mode != AuthMode::mutual_cert || !m1.cert_a) continue;
            // Self-issued certificate claiming the responder's address, signed
            // with our own key instead of the trusted root.
            Certificate fake = issue_certificate(*provider_, keys_.private_key, m.dest, "mallory",
                                                 keys_.public_key, 0xEEEE);
            Bytes k_bytes = rng_.bytes(16);
            minted_.push_back(k_bytes);
            SessionKey k = *SessionKey::from(k_bytes);
            Bytes n2_bytes = rng_.bytes(16);
            minted_.push_back(n2_bytes);
            HandshakeM2 m2;
            m2.mode = AuthMode::mutual_cert;
            m2.n2 = *Nonce::from(n2_bytes);
            m2.enc_k = provider_->pk_encrypt(m1.cert_a->subject_public, k.view(), rng_);
            m2.cert_b = fake;
            m2.auth = provider_->sign(keys_.private_key,
                                      digest_view(detail::m2_digest(*provider_, m1.n1, k, m2.enc_k)));
            inject_platform(m.dest, m.src, HandshakeM2::kKind,
                            m.conn | kFromResponderBit, m2.encode());
            forged_.insert({Bytes(m.dest.view().begin(), m.dest.view().end()),
                            m.conn | kFromResponderBit});
            note("forged M2 with self-signed certificate to " + m.src.str());
            acted = true;
        }
        return acted;
    }

    bool spray_noise(VirtualTime now) {
        if (noise_rounds_ >= 24 || now < 100) return false;  // let discovery finish first
        ++noise_rounds_;
        NodeAddress a = pick_address(), b = pick_address();
        if (a == b) return true;
        switch (noise_rounds_ % 3) {
            case 0: {  // raw garbage: not even a segment
                Bytes junk = rng_.bytes(20 + rng_.next_below(80));
                medium_->inject(Frame{b, a, kEthertype, junk});
                ++injected_;
                break;
            }
            case 1: {  // valid segment, garbage platform payload
                Segment s;
                s.header.flags = kFlagData;
                s.header.msg_id = next_msg_id_++;
                s.payload = rng_.bytes(3);  // too short for a platform header
                s.header.crc32 = crc32_ieee(s.payload);
                medium_->inject(Frame{b, a, kEthertype, s.encode()});
                ++injected_;
                break;
            }
            default: {  // valid platform header, garbage body, random conn id
                std::uint8_t type = static_cast<std::uint8_t>(1 + rng_.next_below(6));
                std::uint32_t conn = static_cast<std::uint32_t>(rng_.next_u64());
                inject_platform(a, b, type, conn, rng_.bytes(24));
                break;
            }
        }
        note("noise round " + std::to_string(noise_rounds_));
        return true;
    }

    bool replay_transcript(VirtualTime now) {
        // Wait until well after the recorded handshake completed, then replay
        // every message verbatim (fresh transport ids).
        if (replayed_ || transcript_.size() < 3 || now < last_seen_ + 1 || now < 2500)
            return false;
        for (const SeenMessage& m : transcript_)
            inject_platform(m.src, m.dest, m.type, m.conn, m.body);
        note("replayed full transcript of " + std::to_string(transcript_.size()) + " messages");
        replayed_ = true;
        return true;
    }

    NodeAddress pick_address() {
        // Deterministic fake-but-plausible unicast addresses; scripts that
        // need real node addresses learn them from observed traffic.
        if (!observed_addrs_.empty()) {
            auto it = observed_addrs_.begin();
            std::advance(it, static_cast<long>(rng_.next_below(observed_addrs_.size())));
            return *it;
        }
        NodeAddress a;
        a.bytes = {0x02, 0, 0, 0, 0, static_cast<std::uint8_t>(1 + rng_.next_below(9))};
        return a;
    }

protected:
    AttackScript script_;
    SimMedium* medium_;
    CryptoProvider* provider_;
    SplitMix64 rng_;
    KeyPair keys_;
    std::vector<Bytes> minted_;

    std::deque<SeenMessage> pending_;
    std::vector<SeenMessage> transcript_;
    std::set<std::tuple<Bytes, Bytes, std::uint32_t, std::uint8_t>> seen_;
    std::set<std::tuple<Bytes, std::uint32_t>> forged_;
    std::set<NodeAddress> observed_addrs_;
    std::uint16_t next_msg_id_ = 0xF000;
    std::size_t injected_ = 0;
    std::size_t noise_rounds_ = 0;
    VirtualTime last_seen_ = 0;
    bool spliced_ = false;
    bool replayed_ = false;
};

}  // namespace adhocnet
