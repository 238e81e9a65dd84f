#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adhocnet/channel.hpp"
#include "adhocnet/crypto/recording_provider.hpp"
#include "adhocnet/node.hpp"
#include "adhocnet/segment.hpp"

namespace adhocnet {

// --- Symbolic terms ----------------------------------------------------------
//
// The secrecy audit reasons over structured terms, not raw bitstrings: a
// ciphertext observed on the wire becomes pk_enc(pub_key(i), payload-term),
// which is derivable only under the decryption/construction rules below.
// Payload bytes that nothing explains become opaque atoms.

enum class TermOp : std::uint8_t {
    atom,      // literal byte string (nonces, names, unparsed blobs)
    pub_key,   // public half of logged keypair #key_id
    priv_key,  // private half of logged keypair #key_id
    pk_enc,    // args: {public-key term, plaintext term}
    sym_enc,   // args: {key term, plaintext term}
    mac,       // args: {key term, message term}
    sig,       // args: {private-key term, message term}
    hash,      // args: {message term}
    concat,    // args: the fields, in order
};

// Append-only hash-consed term table: structurally equal terms share an index,
// so knowledge sets are plain index sets.
class TermStore {
public:
    struct Term {
        TermOp op = TermOp::atom;
        Bytes atom;
        int key_id = -1;
        std::vector<std::size_t> args;
    };

    std::size_t atom(ByteView b) { return intern({TermOp::atom, Bytes(b.begin(), b.end()), -1, {}}); }
    std::size_t pub_key(int id) { return intern({TermOp::pub_key, {}, id, {}}); }
    std::size_t priv_key(int id) { return intern({TermOp::priv_key, {}, id, {}}); }
    std::size_t pk_enc(std::size_t key, std::size_t pt) {
        return intern({TermOp::pk_enc, {}, -1, {key, pt}});
    }
    std::size_t sym_enc(std::size_t key, std::size_t pt) {
        return intern({TermOp::sym_enc, {}, -1, {key, pt}});
    }
    std::size_t mac(std::size_t key, std::size_t msg) {
        return intern({TermOp::mac, {}, -1, {key, msg}});
    }
    std::size_t sig(std::size_t key, std::size_t msg) {
        return intern({TermOp::sig, {}, -1, {key, msg}});
    }
    std::size_t hash(std::size_t msg) { return intern({TermOp::hash, {}, -1, {msg}}); }
    std::size_t concat(std::vector<std::size_t> parts) {
        return intern({TermOp::concat, {}, -1, std::move(parts)});
    }

    const Term& at(std::size_t i) const { return terms_[i]; }
    std::size_t size() const { return terms_.size(); }

private:
    std::size_t intern(Term t) {
        std::string key;
        key += static_cast<char>('0' + static_cast<int>(t.op));
        key += ':';
        key += to_hex(t.atom);
        key += ':';
        key += std::to_string(t.key_id);
        for (std::size_t a : t.args) {
            key += ',';
            key += std::to_string(a);
        }
        auto [it, fresh] = canon_.try_emplace(std::move(key), terms_.size());
        if (fresh) terms_.push_back(std::move(t));
        return it->second;
    }

    std::vector<Term> terms_;
    std::map<std::string, std::size_t> canon_;
};

// --- Byte-to-term dictionary --------------------------------------------------
//
// Built from the CryptoLog ground truth: every byte string an honest (or
// attacker) provider call produced maps to the term describing how it was
// made. Unknown byte strings lift to atoms; byte strings that parse as a
// chain of length-prefixed fields lift to a concat of their fields, which
// lets the closure rebuild hash/MAC inputs from known parts.
class TermDict {
public:
    TermDict(TermStore& store, const CryptoLog& log) : store_(&store) {
        int next_key_id = 0;
        for (const CryptoEvent& e : log.events()) {
            switch (e.kind) {
                case CryptoEvent::Kind::keypair: {
                    int id = next_key_id++;
                    remember(e.key, store_->pub_key(id));
                    remember(e.aux, store_->priv_key(id));
                    break;
                }
                case CryptoEvent::Kind::pk_encrypt:
                    remember(e.output, store_->pk_enc(lift(e.key), lift_structured(e.input)));
                    break;
                case CryptoEvent::Kind::pk_decrypt:
                    break;  // reveals nothing beyond the encrypt-side event
                case CryptoEvent::Kind::sign:
                    remember(e.output, store_->sig(lift(e.key), lift_structured(e.input)));
                    break;
                case CryptoEvent::Kind::hmac:
                    remember(e.output, store_->mac(lift(e.key), lift_structured(e.input)));
                    break;
                case CryptoEvent::Kind::sym_encrypt:
                    remember(e.output, store_->sym_enc(lift(e.key), lift_structured(e.input)));
                    break;
                case CryptoEvent::Kind::hash:
                    remember(e.output, store_->hash(lift_structured(e.input)));
                    break;
                case CryptoEvent::Kind::nonce:
                case CryptoEvent::Kind::session_key:
                    lift(e.output);  // register as fresh atom
                    break;
            }
        }
    }

    TermStore& store() { return *store_; }

    std::optional<std::size_t> find(ByteView b) const {
        auto it = map_.find(Bytes(b.begin(), b.end()));
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    // Term for these bytes, creating an atom if nothing is known about them.
    std::size_t lift(ByteView b) {
        if (auto t = find(b)) return *t;
        std::size_t t = store_->atom(b);
        remember(b, t);
        return t;
    }

    // Like lift, but first tries to read the bytes as a whole-string chain of
    // length-prefixed fields.
    std::size_t lift_structured(ByteView b) {
        if (auto t = find(b)) return *t;
        auto fields = split_lp_chain(b);
        std::size_t t;
        if (fields) {
            std::vector<std::size_t> parts;
            parts.reserve(fields->size());
            for (ByteView f : *fields) parts.push_back(lift(f));
            t = store_->concat(std::move(parts));
        } else {
            t = store_->atom(b);
        }
        remember(b, t);
        return t;
    }

private:
    static std::optional<std::vector<ByteView>> split_lp_chain(ByteView b) {
        std::vector<ByteView> fields;
        std::size_t pos = 0;
        while (pos < b.size()) {
            if (b.size() - pos < 2) return std::nullopt;
            std::size_t len = static_cast<std::size_t>(b[pos]) << 8 | b[pos + 1];
            pos += 2;
            if (b.size() - pos < len) return std::nullopt;
            fields.push_back(b.subspan(pos, len));
            pos += len;
        }
        if (fields.empty()) return std::nullopt;
        return fields;
    }

    void remember(ByteView b, std::size_t term) {
        map_.emplace(Bytes(b.begin(), b.end()), term);  // first producer wins
    }

    TermStore* store_;
    std::map<Bytes, std::size_t> map_;
};

// --- Transcript lifting --------------------------------------------------------

// Terms observed by a wire-level eavesdropper, lifted through the public wire
// grammar. Frames (or reassembled messages) that do not parse are counted as
// ambiguous and treated as opaque atoms.
struct LiftResult {
    std::vector<std::size_t> observed;
    std::size_t ambiguous = 0;
};

namespace detail {

inline void lift_certificate(TermDict& dict, LiftResult& out, const Certificate& cert) {
    out.observed.push_back(dict.lift(cert.subject_addr.view()));
    out.observed.push_back(dict.lift(to_bytes(cert.subject_name)));
    out.observed.push_back(dict.lift(cert.subject_public));
    out.observed.push_back(dict.lift(cert.ca_signature));
    out.observed.push_back(dict.lift_structured(cert.tbs()));
}

inline void lift_platform_message(TermDict& dict, LiftResult& out, ByteView msg) {
    try {
        ByteReader r(msg);
        std::uint8_t type = r.u8();
        r.u32();  // conn id: public routing data
        ByteView body = r.rest();
        switch (type) {
            case kMsgHello: {
                ByteReader h(body);
                out.observed.push_back(dict.lift(h.lp()));  // name
                h.lp();                                     // modes
                h.lp();                                     // version
                if (!h.done()) throw Error(Errc::malformed, "HELLO trailer");
                break;
            }
            case kMsgHsM1: {
                HandshakeM1 m1 = HandshakeM1::decode(body);
                out.observed.push_back(dict.lift(m1.n1.view()));
                if (m1.cert_a) lift_certificate(dict, out, *m1.cert_a);
                break;
            }
            case kMsgHsM2: {
                HandshakeM2 m2 = HandshakeM2::decode(body);
                out.observed.push_back(dict.lift(m2.n2.view()));
                if (!m2.enc_k.empty()) out.observed.push_back(dict.lift(m2.enc_k));
                if (m2.cert_b) lift_certificate(dict, out, *m2.cert_b);
                if (!m2.auth.empty()) out.observed.push_back(dict.lift(m2.auth));
                break;
            }
            case kMsgHsM3: {
                HandshakeM3 m3 = HandshakeM3::decode(body);
                out.observed.push_back(dict.lift(m3.auth));
                break;
            }
            case kMsgData: {
                if (auto rec = Record::decode(body)) {
                    out.observed.push_back(dict.lift(ByteView(rec->iv.data(), rec->iv.size())));
                    out.observed.push_back(dict.lift(rec->ciphertext));
                    out.observed.push_back(dict.lift(rec->tag));
                } else {
                    out.observed.push_back(dict.lift(body));  // NoAuth payload in clear
                }
                break;
            }
            case kMsgClose:
                break;
            default:
                throw Error(Errc::malformed, "unknown platform type");
        }
    } catch (const Error&) {
        ++out.ambiguous;
        out.observed.push_back(dict.lift(msg));
    }
}

}  // namespace detail

inline LiftResult lift_frames(TermDict& dict, const std::vector<Frame>& frames) {
    LiftResult out;
    // Reassemble fragmented messages the same way a receiver would; the
    // attacker sees every fragment, so completion order does not matter.
    std::map<std::pair<Bytes, std::uint16_t>, std::map<std::uint16_t, Bytes>> partial;
    std::map<std::pair<Bytes, std::uint16_t>, std::uint16_t> counts;
    for (const Frame& f : frames) {
        auto seg = Segment::decode(f.payload);
        if (!seg || !seg->crc_ok()) {
            ++out.ambiguous;
            out.observed.push_back(dict.lift(f.payload));
            continue;
        }
        if (seg->is_ack()) continue;  // ACK bitmaps carry no payload material
        auto key = std::make_pair(Bytes(f.src.view().begin(), f.src.view().end()),
                                  seg->header.msg_id);
        counts[key] = seg->header.frag_count;
        partial[key][seg->header.frag_index] = seg->payload;
        auto& got = partial[key];
        if (got.size() == counts[key]) {
            Bytes whole;
            for (auto& [idx, piece] : got) whole.insert(whole.end(), piece.begin(), piece.end());
            detail::lift_platform_message(dict, out, whole);
            partial.erase(key);
            counts.erase(key);
        }
    }
    for (auto& [key, pieces] : partial) {
        for (auto& [idx, piece] : pieces) out.observed.push_back(dict.lift(piece));
        ++out.ambiguous;
    }
    return out;
}

// --- Derivability closure -------------------------------------------------------

struct Knowledge {
    std::set<std::size_t> known;

    bool contains(std::size_t t) const { return known.count(t) != 0; }
};

// Least fixed point of the derivation rules over (observed ∪ initial):
//   - splitting: a known concat yields its fields
//   - decryption: pk_enc under pub_key(i) yields the plaintext if priv_key(i)
//     is known; sym_enc yields it if the key is known
//   - construction: any term already present in the store whose arguments are
//     all known becomes known (encrypt/sign/MAC/hash/concatenate with held
//     material)
// Hash inversion, signature forgery, and keyless decryption have no rules, so
// they are impossible by construction. Terms never leave the store, so the
// closure terminates and is order-independent.
inline Knowledge knowledge_closure(TermStore& store, const std::vector<std::size_t>& observed,
                                   const std::vector<std::size_t>& initial_keys) {
    Knowledge k;
    k.known.insert(observed.begin(), observed.end());
    k.known.insert(initial_keys.begin(), initial_keys.end());
    bool changed = true;
    while (changed) {
        changed = false;
        auto add = [&](std::size_t t) {
            if (k.known.insert(t).second) changed = true;
        };
        // Splitting and decryption over the current set.
        std::vector<std::size_t> snapshot(k.known.begin(), k.known.end());
        for (std::size_t t : snapshot) {
            const TermStore::Term& term = store.at(t);
            switch (term.op) {
                case TermOp::concat:
                    for (std::size_t a : term.args) add(a);
                    break;
                case TermOp::pk_enc: {
                    const TermStore::Term& key = store.at(term.args[0]);
                    if (key.op == TermOp::pub_key && k.contains(store.priv_key(key.key_id)))
                        add(term.args[1]);
                    break;
                }
                case TermOp::sym_enc:
                    if (k.contains(term.args[0])) add(term.args[1]);
                    break;
                default:
                    break;
            }
        }
        // Construction of any existing term from known parts.
        for (std::size_t i = 0; i < store.size(); ++i) {
            if (k.contains(i)) continue;
            const TermStore::Term& term = store.at(i);
            if (term.op == TermOp::atom || term.op == TermOp::pub_key ||
                term.op == TermOp::priv_key)
                continue;  // primitives are observed or held, never derived
            bool all = std::all_of(term.args.begin(), term.args.end(),
                                   [&](std::size_t a) { return k.contains(a); });
            if (all) add(i);
        }
    }
    return k;
}

// True if these exact bytes are derivable: they map to a known term.
inline bool bytes_derivable(const TermDict& dict, const Knowledge& k, ByteView bytes) {
    auto t = dict.find(bytes);
    return t && k.contains(*t);
}

// Raw leak scan, independent of the symbolic model: do the bytes appear as a
// contiguous substring of any frame payload?
inline bool bytes_in_frames(const std::vector<Frame>& frames, ByteView needle) {
    if (needle.empty()) return false;
    for (const Frame& f : frames) {
        auto it = std::search(f.payload.begin(), f.payload.end(), needle.begin(), needle.end());
        if (it != f.payload.end()) return true;
    }
    return false;
}

}  // namespace adhocnet
