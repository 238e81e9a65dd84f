#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "adhocnet/crypto/default_provider.hpp"
#include "adhocnet/crypto/recording_provider.hpp"
#include "adhocnet/crypto/toy_provider.hpp"
#include "adhocnet/node.hpp"
#include "adhocnet/sim/attacker.hpp"
#include "adhocnet/sim/knowledge.hpp"
#include "adhocnet/sim/scenario.hpp"
#include "adhocnet/sim/trace.hpp"
#include "adhocnet/sim_medium.hpp"

namespace adhocnet {

// One connection endpoint's view after the run, copied out of its node.
struct SessionRecord {
    std::string node;
    NodeAddress self, peer;
    std::uint32_t handle = 0;
    std::uint32_t wire_id = 0;
    bool initiated = false;
    ConnState state = ConnState::connecting;
    Errc fail_cause = Errc::handshake_failed;
    AuthMode mode = AuthMode::no_auth;
    std::optional<SessionSecrets> secrets;
};

// Key agreement between the two ends of a session, ignoring each side's local
// view of who the peer is.
inline bool sessions_agree(const SessionSecrets& a, const SessionSecrets& b) {
    return a.mode == b.mode && a.n1 == b.n1 && a.n2 == b.n2 && a.master == b.master &&
           a.enc_i == b.enc_i && a.mac_i == b.mac_i && a.enc_r == b.enc_r && a.mac_r == b.mac_r;
}

struct Delivery {
    std::string node;  // receiver
    NodeAddress from;
    Bytes data;
};

struct Verdicts {
    // Scenario `expect` block.
    bool expectations_ok = true;
    std::vector<std::string> expectation_failures;
    // Both ends of every established session hold identical key material.
    bool agreement_ok = true;
    std::vector<std::string> agreement_failures;
    // No session key is derivable from the transcript or appears raw on the
    // wire.
    bool secrecy_ok = true;
    std::vector<std::string> secrecy_failures;

    std::size_t established_pairs = 0;
    std::size_t parse_ambiguities = 0;

    bool ok() const { return expectations_ok && agreement_ok && secrecy_ok; }
};

struct SimResult {
    Trace trace;
    std::vector<Frame> frames;  // everything that touched the medium, in order
    CryptoLog log;
    std::vector<SessionRecord> sessions;
    std::map<std::string, NodeStats> stats;
    std::vector<Delivery> deliveries;
    std::vector<std::string> command_errors;
    // Material the attacker minted itself (forged keys, noise payloads);
    // external audits seed their knowledge closure with it.
    std::vector<Bytes> attacker_initial;
    Verdicts verdicts;

    std::size_t delivered_to(std::string_view node) const {
        std::size_t n = 0;
        for (const Delivery& d : deliveries)
            if (d.node == node) ++n;
        return n;
    }
};

// Deterministic single-process runner: builds the world a scenario describes,
// drives virtual time, and audits the outcome. With the toy crypto suite the
// whole result (trace included) is a pure function of the scenario text.
class Simulator {
public:
    explicit Simulator(Scenario sc) : sc_(std::move(sc)) {}

    SimResult run() {
        SimResult res;
        SplitMix64 root(sc_.seed);

        std::unique_ptr<CryptoProvider> inner;
        if (sc_.provider == "default")
            inner = std::make_unique<DefaultProvider>();
        else
            inner = std::make_unique<ToyProvider>();
        RecordingProvider provider(*inner, res.log);

        SplitMix64 ca_rng = root.fork();
        KeyPair ca = provider.generate_keypair(ca_rng);

        LinkModel model = sc_.medium;
        model.seed = root.next_u64();
        SimMedium medium(model);

        // Identities and nodes, in scenario order. Serial numbers are stable
        // so certificates are reproducible.
        std::vector<std::unique_ptr<Node>> nodes;
        std::vector<std::unique_ptr<SimEndpoint>> endpoints;
        std::map<std::string, std::size_t> index;
        std::uint64_t serial = 1;
        for (const NodeSpec& spec : sc_.nodes) {
            SplitMix64 node_rng = root.fork();
            Identity id;
            id.name = spec.name;
            id.ca_public = ca.public_key;
            if (spec.cert) {
                KeyPair kp = provider.generate_keypair(node_rng);
                id.cert = issue_certificate(provider, ca.private_key, spec.address, spec.name,
                                            kp.public_key, serial++);
                id.private_key = kp.private_key;
            }
            if (spec.psk_label) {
                id.psk = psk_from_label(*spec.psk_label);
                id.psk_id = *spec.psk_label;
            }
            index[spec.name] = nodes.size();
            nodes.push_back(
                std::make_unique<Node>(spec.address, std::move(id), provider, node_rng.fork()));
            endpoints.push_back(medium.attach(spec.address));
        }

        std::unique_ptr<Attacker> attacker;
        if (sc_.attacker != AttackScript::none) {
            attacker = std::make_unique<Attacker>(sc_.attacker, medium, provider, root.fork());
            medium.set_tap(attacker.get());
        }

        SplitMix64 payload_rng = root.fork();

        // --- Trace wiring (addresses and sizes only; no raw key material) ---
        Trace& trace = res.trace;
        medium.on_sent = [&](const Frame& f, VirtualTime t) {
            res.frames.push_back(f);
            trace.add(t, "frame-sent",
                      f.src.str() + "->" + f.dest.str() + " len=" + std::to_string(f.payload.size()));
        };
        medium.on_delivered = [&](const Frame& f, const NodeAddress& to, VirtualTime t) {
            trace.add(t, "frame-delivered",
                      f.src.str() + "->" + to.str() + " len=" + std::to_string(f.payload.size()));
        };
        medium.on_dropped = [&](const Frame& f, const NodeAddress& to, const char* why,
                                VirtualTime t) {
            trace.add(t, "frame-dropped", f.src.str() + "->" +
                                              (to.is_broadcast() ? std::string("*") : to.str()) +
                                              " reason=" + why);
        };
        if (attacker)
            attacker->on_action = [&](const std::string& what) {
                trace.add(medium.now(), "attacker", what);
            };
        std::map<std::string, std::set<std::string>> discovered;  // node -> peer names
        std::set<std::pair<std::string, std::uint32_t>> ever_established;
        std::map<Bytes, std::string> name_of_addr;
        for (const NodeSpec& spec : sc_.nodes)
            name_of_addr[Bytes(spec.address.view().begin(), spec.address.view().end())] =
                spec.name;
        auto peer_name = [&](const NodeAddress& a) {
            auto it = name_of_addr.find(Bytes(a.view().begin(), a.view().end()));
            return it == name_of_addr.end() ? a.str() : it->second;
        };
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const std::string name = sc_.nodes[i].name;
            nodes[i]->trace = [&trace, name](VirtualTime t, std::string_view kind,
                                             const std::string& detail) {
                if (kind == "state")
                    trace.add(t, "state-transition", name + ": " + detail);
                else
                    trace.add(t, "error", name + ": " + std::string(kind) + " " + detail);
            };
        }

        auto drain_events = [&](std::size_t i, VirtualTime t) {
            const std::string& name = sc_.nodes[i].name;
            for (NodeEvent& ev : nodes[i]->take_events()) {
                switch (ev.kind) {
                    case NodeEvent::Kind::data:
                        res.deliveries.push_back({name, ev.peer, std::move(ev.data)});
                        trace.add(t, "app-deliver",
                                  name + " <- " + peer_name(ev.peer) + " len=" +
                                      std::to_string(res.deliveries.back().data.size()));
                        break;
                    case NodeEvent::Kind::device_discovered:
                        discovered[name].insert(peer_name(ev.peer));
                        trace.add(t, "state-transition",
                                  name + ": discovered " + peer_name(ev.peer));
                        break;
                    case NodeEvent::Kind::device_stale:
                        trace.add(t, "state-transition", name + ": stale " + peer_name(ev.peer));
                        break;
                    case NodeEvent::Kind::connection_established:
                        ever_established.insert({name, ev.conn_id});
                        trace.add(t, "state-transition",
                                  name + ": established conn=" + std::to_string(ev.conn_id) +
                                      " peer=" + peer_name(ev.peer) + " mode=" +
                                      std::string(auth_mode_name(ev.mode)));
                        break;
                    case NodeEvent::Kind::connection_failed:
                        trace.add(t, "state-transition",
                                  name + ": failed conn=" + std::to_string(ev.conn_id) + " peer=" +
                                      peer_name(ev.peer) + " cause=" + std::string(errc_name(ev.cause)));
                        break;
                    case NodeEvent::Kind::connection_closed:
                        trace.add(t, "state-transition",
                                  name + ": closed conn=" + std::to_string(ev.conn_id));
                        break;
                }
            }
        };

        // --- Engine loop -------------------------------------------------
        auto quiesce = [&](VirtualTime t) {
            medium.advance_to(t);
            bool progress = true;
            while (progress) {
                progress = false;
                for (std::size_t i = 0; i < nodes.size(); ++i) {
                    nodes[i]->on_tick(t);
                    for (Frame& f : nodes[i]->take_frames()) {
                        endpoints[i]->send(f);
                        progress = true;
                    }
                }
                if (attacker && attacker->step(t)) progress = true;
                for (std::size_t i = 0; i < nodes.size(); ++i) {
                    while (auto f = endpoints[i]->poll(t, t)) {
                        nodes[i]->on_frame(*f, t);
                        progress = true;
                    }
                    drain_events(i, t);
                }
            }
        };

        std::vector<Command> schedule = sc_.schedule;
        std::stable_sort(schedule.begin(), schedule.end(),
                         [](const Command& a, const Command& b) { return a.at < b.at; });
        // Latest connection handle per (from, to), for send/close commands.
        std::map<std::pair<std::string, std::string>, std::uint32_t> last_conn;

        auto run_command = [&](const Command& c, VirtualTime t) {
            Node& from = *nodes[index[c.from]];
            NodeAddress to = sc_.find_node(c.to)->address;
            try {
                switch (c.kind) {
                    case Command::Kind::connect: {
                        std::uint32_t h = from.connect(to, t);
                        last_conn[{c.from, c.to}] = h;
                        trace.add(t, "command",
                                  "connect " + c.from + "->" + c.to + " conn=" + std::to_string(h));
                        break;
                    }
                    case Command::Kind::send: {
                        auto it = last_conn.find({c.from, c.to});
                        if (it == last_conn.end())
                            throw Error(Errc::not_established,
                                        "no connection " + c.from + "->" + c.to);
                        Bytes payload =
                            c.random ? payload_rng.bytes(c.random_size) : c.payload;
                        trace.add(t, "command", "send " + c.from + "->" + c.to + " len=" +
                                                    std::to_string(payload.size()));
                        from.send_secure(it->second, payload, t);
                        break;
                    }
                    case Command::Kind::close: {
                        auto it = last_conn.find({c.from, c.to});
                        if (it == last_conn.end())
                            throw Error(Errc::not_established,
                                        "no connection " + c.from + "->" + c.to);
                        trace.add(t, "command", "close " + c.from + "->" + c.to);
                        from.close(it->second, t);
                        break;
                    }
                }
            } catch (const Error& e) {
                res.command_errors.push_back(std::string(errc_name(e.code())) + ": " + e.what());
                trace.add(t, "error", "command failed: " + res.command_errors.back());
            }
        };

        VirtualTime t = 0;
        std::size_t next_cmd = 0;
        while (true) {
            quiesce(t);
            while (next_cmd < schedule.size() && schedule[next_cmd].at <= t) {
                run_command(schedule[next_cmd], t);
                ++next_cmd;
            }
            quiesce(t);
            if (t >= sc_.duration) break;
            VirtualTime next = sc_.duration;
            if (next_cmd < schedule.size()) next = std::min(next, schedule[next_cmd].at);
            for (auto& n : nodes)
                if (auto w = n->next_wakeup()) next = std::min(next, std::max(*w, t + 1));
            t = std::max(next, t + 1);
        }

        // --- Collect and audit --------------------------------------------
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            res.stats[sc_.nodes[i].name] = nodes[i]->stats();
            for (const auto& [handle, conn] : nodes[i]->connections()) {
                SessionRecord r;
                r.node = sc_.nodes[i].name;
                r.self = nodes[i]->address();
                r.peer = conn.peer;
                r.handle = handle;
                r.wire_id = conn.wire_id;
                r.initiated = conn.initiated;
                r.state = conn.state;
                r.fail_cause = conn.fail_cause;
                r.mode = conn.mode;
                if (const SessionSecrets* s = conn.session()) r.secrets = *s;
                res.sessions.push_back(std::move(r));
            }
        }

        if (attacker) res.attacker_initial = attacker->initial_secrets();
        audit_agreement(res);
        audit_secrecy(res);
        check_expectations(res, discovered, ever_established);
        return res;
    }

private:
    static const SessionRecord* find_session(const std::vector<SessionRecord>& all,
                                             const SessionRecord& of_peer) {
        for (const SessionRecord& r : all)
            if (r.self == of_peer.peer && r.peer == of_peer.self &&
                r.wire_id == of_peer.wire_id && r.initiated != of_peer.initiated)
                return &r;
        return nullptr;
    }

    // Every established non-NoAuth endpoint must have a counterpart that ran
    // the same handshake and derived identical keys (its own final state may
    // differ, e.g. a lost final ACK, but the material must agree).
    void audit_agreement(SimResult& res) const {
        auto& v = res.verdicts;
        std::set<std::pair<NodeAddress, std::uint32_t>> counted;
        for (const SessionRecord& r : res.sessions) {
            if (r.state != ConnState::established && !(r.state == ConnState::closed && r.secrets))
                continue;
            NodeAddress init_addr = r.initiated ? r.self : r.peer;
            if (counted.insert({init_addr, r.wire_id}).second) ++v.established_pairs;
            if (r.mode == AuthMode::no_auth) continue;
            const SessionRecord* other = find_session(res.sessions, r);
            std::string tag = r.node + " conn=" + std::to_string(r.handle) + " wire=" +
                              std::to_string(r.wire_id);
            if (!other || !other->secrets) {
                v.agreement_ok = false;
                v.agreement_failures.push_back(tag + ": no peer session holds this handshake");
                continue;
            }
            if (!r.secrets || !sessions_agree(*r.secrets, *other->secrets)) {
                v.agreement_ok = false;
                v.agreement_failures.push_back(tag + ": key material differs between the ends");
            }
        }
    }

    // Symbolic closure over everything an eavesdropper saw plus the
    // attacker's own secrets, then a raw substring scan as a second net.
    void audit_secrecy(SimResult& res) const {
        auto& v = res.verdicts;
        TermStore store;
        TermDict dict(store, res.log);
        LiftResult lifted = lift_frames(dict, res.frames);
        v.parse_ambiguities = lifted.ambiguous;
        std::vector<std::size_t> initial;
        for (const Bytes& b : res.attacker_initial) initial.push_back(dict.lift(b));
        Knowledge k = knowledge_closure(store, lifted.observed, initial);

        auto check_secret = [&](ByteView secret, const std::string& what) {
            if (bytes_derivable(dict, k, secret)) {
                v.secrecy_ok = false;
                v.secrecy_failures.push_back(what + ": derivable from the transcript");
            }
            if (bytes_in_frames(res.frames, secret)) {
                v.secrecy_ok = false;
                v.secrecy_failures.push_back(what + ": raw bytes appear on the wire");
            }
        };

        // Honest master keys: the attacker never calls generate_session_key.
        std::size_t n = 0;
        for (const CryptoEvent& e : res.log.events())
            if (e.kind == CryptoEvent::Kind::session_key)
                check_secret(e.output, "session key #" + std::to_string(n++));
        // Established sessions (covers PSK-derived masters and channel keys).
        for (const SessionRecord& r : res.sessions) {
            if (!r.secrets || r.mode == AuthMode::no_auth) continue;
            std::string tag = r.node + " conn=" + std::to_string(r.handle);
            check_secret(r.secrets->master.view(), tag + " master");
            check_secret(ByteView(r.secrets->enc_i.data(), r.secrets->enc_i.size()),
                         tag + " enc-i");
            check_secret(ByteView(r.secrets->enc_r.data(), r.secrets->enc_r.size()),
                         tag + " enc-r");
        }
    }

    // Expectations read from the initiator's perspective: `established a b`
    // asks whether the connection a opened to b ever reached Established
    // (closing it afterwards is fine).
    void check_expectations(
        SimResult& res, const std::map<std::string, std::set<std::string>>& discovered,
        const std::set<std::pair<std::string, std::uint32_t>>& ever_established) const {
        auto& v = res.verdicts;
        auto fail = [&](const std::string& why) {
            v.expectations_ok = false;
            v.expectation_failures.push_back(why);
        };
        for (const Expectation& e : sc_.expectations) {
            // The initiator-side record of the newest session a->b.
            const SessionRecord* found = nullptr;
            for (const SessionRecord& r : res.sessions)
                if (r.node == e.a && r.initiated && e.b == peer_spec_name(r.peer))
                    if (!found || r.handle > found->handle) found = &r;
            bool reached = found && ever_established.count({e.a, found->handle}) != 0;
            switch (e.kind) {
                case Expectation::Kind::established:
                    if (!reached) fail("expected established " + e.a + "->" + e.b);
                    break;
                case Expectation::Kind::failed:
                    if (!found || found->state != ConnState::failed)
                        fail("expected failed " + e.a + "->" + e.b);
                    break;
                case Expectation::Kind::not_established:
                    if (reached) fail("expected not-established " + e.a + "->" + e.b);
                    break;
                case Expectation::Kind::mode:
                    if (!reached)
                        fail("expected established " + e.a + "->" + e.b + " for mode check");
                    else if (found->mode != e.mode)
                        fail("expected mode " + std::string(auth_mode_name(e.mode)) + " " + e.a +
                             "->" + e.b + ", got " + std::string(auth_mode_name(found->mode)));
                    break;
                case Expectation::Kind::delivered:
                    if (res.delivered_to(e.a) != e.count)
                        fail("expected " + std::to_string(e.count) + " deliveries at " + e.a +
                             ", got " + std::to_string(res.delivered_to(e.a)));
                    break;
                case Expectation::Kind::discovered: {
                    auto it = discovered.find(e.a);
                    if (it == discovered.end() || !it->second.count(e.b))
                        fail("expected " + e.a + " to discover " + e.b);
                    break;
                }
            }
        }
    }

    std::string peer_spec_name(const NodeAddress& a) const {
        for (const NodeSpec& n : sc_.nodes)
            if (n.address == a) return n.name;
        return a.str();
    }

    Scenario sc_;
};

// Convenience: parse, run, audit in one call.
inline SimResult run_scenario_text(std::string_view text) {
    return Simulator(Scenario::parse_text(text)).run();
}

}  // namespace adhocnet
