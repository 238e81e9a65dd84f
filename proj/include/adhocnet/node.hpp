#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "adhocnet/channel.hpp"
#include "adhocnet/reliable.hpp"

namespace adhocnet {

// Platform message types. Handshake kinds reuse the HandshakeM* kKind values.
constexpr std::uint8_t kMsgHello = 0x01;
constexpr std::uint8_t kMsgHsM1 = 0x02;
constexpr std::uint8_t kMsgHsM2 = 0x03;
constexpr std::uint8_t kMsgHsM3 = 0x04;
constexpr std::uint8_t kMsgData = 0x05;
constexpr std::uint8_t kMsgClose = 0x06;

constexpr std::uint8_t kProtocolVersion = 1;

// Platform header: msg_type(1) | conn_id(4, big-endian). conn_id 0 is
// reserved for HELLO. The top conn_id bit flags messages traveling from the
// connection's responder toward its initiator; both peers of a connection
// use the initiator-allocated id, and the direction bit keeps it unambiguous
// when two nodes pick the same id for opposite-direction connections.
constexpr std::uint32_t kFromResponderBit = 0x80000000u;
constexpr std::size_t kPlatformHeaderSize = 5;

enum class DeviceState : std::uint8_t { discovered, stale };

inline std::string_view device_state_name(DeviceState s) {
    return s == DeviceState::discovered ? "Discovered" : "Stale";
}

// One entry of the discovery container, maintained purely from HELLO and
// timer history.
struct DeviceRecord {
    NodeAddress addr;
    std::string name;
    std::uint8_t modes = 0;  // advertised capability bits
    VirtualTime last_seen = 0;
    DeviceState state = DeviceState::discovered;
};

enum class ConnState : std::uint8_t { connecting, established, closed, failed };

inline std::string_view conn_state_name(ConnState s) {
    switch (s) {
        case ConnState::connecting: return "Connecting";
        case ConnState::established: return "Established";
        case ConnState::closed: return "Closed";
        case ConnState::failed: return "Failed";
    }
    return "Unknown";
}

struct Connection {
    std::uint32_t handle = 0;   // node-local id handed to the application
    std::uint32_t wire_id = 0;  // initiator-allocated id used on the wire
    bool initiated = false;     // this node allocated wire_id
    NodeAddress peer;
    AuthMode mode = AuthMode::no_auth;
    ConnState state = ConnState::connecting;
    Errc fail_cause = Errc::handshake_failed;  // meaningful when state == failed
    std::optional<HandshakeInitiator> initiator;
    std::optional<HandshakeResponder> responder;
    std::optional<SecureChannel> channel;

    // One data message in flight per connection: the channel accepts records
    // strictly in sequence order, so the next record is released only once the
    // previous one is confirmed delivered. Queued bodies are plaintext.
    std::deque<Bytes> send_queue;
    bool data_in_flight = false;

    // Established session secrets, if any (none for NoAuth).
    const SessionSecrets* session() const {
        if (channel) return &channel->secrets();
        if (initiator && initiator->phase() == HandshakePhase::established)
            return &initiator->secrets();
        if (responder && responder->phase() == HandshakePhase::established)
            return &responder->secrets();
        return nullptr;
    }
};

struct NodeEvent {
    enum class Kind {
        device_discovered,
        device_stale,
        connection_established,
        connection_failed,
        connection_closed,
        data,
    };

    Kind kind{};
    NodeAddress peer{};
    std::uint32_t conn_id = 0;
    AuthMode mode = AuthMode::no_auth;
    Errc cause = Errc::handshake_failed;  // connection_failed only
    Bytes data;                           // data only
    std::string name;                     // device events only
};

struct NodeStats {
    std::uint64_t beacons_sent = 0;
    std::uint64_t hellos_received = 0;
    std::uint64_t unknown_msg_type = 0;
    std::uint64_t malformed_messages = 0;
    std::uint64_t duplicate_m1 = 0;
    std::uint64_t stray_messages = 0;
    std::uint64_t handshake_rejects = 0;
    std::uint64_t data_rejects = 0;
};

struct NodePolicy {
    VirtualTime beacon_interval = 1000;
    VirtualTime device_expiry = 5000;
    VirtualTime device_purge = 30000;
    VirtualTime handshake_timeout = kDefaultHandshakeTimeout;
    ArqPolicy arq;
};

// One platform node: discovery beacons, the device container, connection
// state machines, and the secure data path, all over one ReliableEndpoint.
//
// Pure event-driven core like the layers below: inputs are on_frame/on_tick/
// application commands (each stamped with now); outputs are frames
// (take_frames) and application events (take_events). The owner — simulator
// or UDP driver — moves bytes and advances time.
class Node {
public:
    Node(NodeAddress addr, Identity identity, CryptoProvider& provider, SplitMix64 rng,
         NodePolicy policy = {})
        : addr_(addr),
          identity_(std::move(identity)),
          provider_(&provider),
          rng_(rng),
          policy_(policy),
          rel_(addr, policy.arq) {}

    // Handshake machines keep pointers into identity_, so a Node must stay
    // where it was constructed; hold it by unique_ptr to put it in containers.
    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;
    Node(Node&&) = delete;
    Node& operator=(Node&&) = delete;

    // ---- inputs ----

    void on_frame(const Frame& frame, VirtualTime now) {
        rel_.on_frame(frame, now);
        drain_rel(now);
    }

    void on_tick(VirtualTime now) {
        rel_.on_tick(now);
        drain_rel(now);
        beacon(now);
        sweep_devices(now);
        sweep_handshakes(now);
    }

    // Earliest instant at which on_tick has work to do.
    std::optional<VirtualTime> next_wakeup() const {
        std::optional<VirtualTime> t = rel_.next_wakeup();
        auto consider = [&](VirtualTime v) {
            if (!t || v < *t) t = v;
        };
        consider(next_beacon_);
        for (const auto& [addr, dev] : devices_) {
            if (dev.state == DeviceState::discovered) consider(dev.last_seen + policy_.device_expiry);
            consider(dev.last_seen + policy_.device_purge);
        }
        for (const auto& [id, c] : conns_) {
            if (c.state != ConnState::connecting) continue;
            if (c.initiator) consider(c.initiator->deadline());
            if (c.responder) consider(c.responder->deadline());
        }
        return t;
    }

    // ---- application commands ----

    std::uint32_t connect(NodeAddress peer, VirtualTime now) {
        auto dev = devices_.find(peer);
        if (dev == devices_.end() || dev->second.state == DeviceState::stale)
            throw Error(Errc::unknown_device, peer.str() + " is not a live discovered device");
        AuthMode mode = select_mode(identity_, dev->second.modes);
        Connection c;
        c.handle = alloc_conn_id();
        c.wire_id = c.handle;
        c.initiated = true;
        c.peer = peer;
        c.mode = mode;
        HandshakeM1 m1;
        if (mode == AuthMode::no_auth) {
            // No handshake: M1 announces the connection; the reliability
            // layer's delivery confirmation is the accept signal.
            m1.mode = AuthMode::no_auth;
            m1.n1 = provider_->generate_nonce(rng_);
        } else {
            try {
                c.initiator.emplace(*provider_, identity_, peer, mode, rng_, now,
                                    policy_.handshake_timeout);
            } catch (const Error& e) {
                throw Error(Errc::handshake_failed, e.what());
            }
            m1 = c.initiator->m1();
        }
        std::uint16_t msg_id = send_platform(peer, kMsgHsM1, c.wire_id, m1.encode(), now);
        pending_[{peer, msg_id}] = {c.handle, PendingKind::m1};
        Connection& stored = register_conn(std::move(c));
        trace_state(now, stored, "Connecting");
        return stored.handle;
    }

    void send_secure(std::uint32_t conn_id, ByteView data, VirtualTime now) {
        Connection* c = find_conn(conn_id);
        if (!c || c->state != ConnState::established)
            throw Error(Errc::not_established, "connection is not established");
        if (c->data_in_flight) {
            c->send_queue.emplace_back(data.begin(), data.end());
            return;
        }
        dispatch_data(*c, data, now);
    }

    // Seals (unless unauthenticated) and hands one message to the reliability
    // layer. Caller guarantees nothing else is in flight on this connection.
    void dispatch_data(Connection& c, ByteView data, VirtualTime now) {
        Bytes body;
        if (c.mode == AuthMode::no_auth) {
            body.assign(data.begin(), data.end());
        } else {
            body = c.channel->seal(data, rng_).encode();
        }
        std::uint16_t msg_id = send_platform(c.peer, kMsgData, wire_field(c), body, now);
        pending_[{c.peer, msg_id}] = {c.handle, PendingKind::data};
        c.data_in_flight = true;
    }

    void close(std::uint32_t conn_id, VirtualTime now) {
        Connection* c = find_conn(conn_id);
        if (!c) throw Error(Errc::not_established, "no such connection");
        if (c->state == ConnState::closed || c->state == ConnState::failed) return;
        send_platform(c->peer, kMsgClose, wire_field(*c), {}, now);  // best-effort
        if (c->channel) c->channel->close();
        c->state = ConnState::closed;
        trace_state(now, *c, "Closed");
        push_event(NodeEvent{NodeEvent::Kind::connection_closed, c->peer, c->handle, c->mode,
                             Errc::handshake_failed, {}, {}});
    }

    // ---- outputs ----

    std::vector<Frame> take_frames() { return rel_.take_frames(); }
    std::vector<NodeEvent> take_events() { return std::exchange(events_, {}); }

    // ---- introspection ----

    NodeAddress address() const { return addr_; }
    const Identity& identity() const { return identity_; }
    const std::map<NodeAddress, DeviceRecord>& devices() const { return devices_; }
    const std::map<std::uint32_t, Connection>& connections() const { return conns_; }
    const Connection* connection(std::uint32_t id) const {
        auto it = conns_.find(id);
        return it == conns_.end() ? nullptr : &it->second;
    }
    const NodeStats& stats() const { return stats_; }
    const RelStats& rel_stats() const { return rel_.stats(); }

    // Optional observer for state transitions and drops: (now, kind, detail).
    std::function<void(VirtualTime, std::string_view, const std::string&)> trace;

private:
    enum class PendingKind : std::uint8_t { m1, m2, m3, data, close_msg };

    struct PendingRef {
        std::uint32_t handle = 0;
        PendingKind kind = PendingKind::m1;
    };

    // ---- discovery ----

    void beacon(VirtualTime now) {
        if (now < next_beacon_) return;
        next_beacon_ = now + policy_.beacon_interval;
        ByteWriter body;
        body.lp_str(identity_.name);
        std::uint8_t modes = advertised_modes(identity_);
        body.lp(ByteView(&modes, 1));
        std::uint8_t version = kProtocolVersion;
        body.lp(ByteView(&version, 1));
        send_platform(NodeAddress::broadcast(), kMsgHello, 0, body.data(), now);
        ++stats_.beacons_sent;
    }

    void on_hello(NodeAddress src, std::uint32_t conn_field, ByteView body, VirtualTime now) {
        if (src == addr_) return;  // own beacon echoed back (UDP backend)
        if (conn_field != 0) {
            ++stats_.malformed_messages;
            return;
        }
        std::string name;
        std::uint8_t modes = 0;
        try {
            ByteReader r(body);
            name = to_string(r.lp());
            Bytes mode_field = r.lp();
            Bytes version_field = r.lp();
            if (mode_field.size() != 1 || version_field.size() != 1 || !r.done())
                throw Error(Errc::malformed, "bad HELLO shape");
            if (version_field[0] != kProtocolVersion)
                throw Error(Errc::malformed, "unknown protocol version");
            modes = mode_field[0];
        } catch (const Error&) {
            ++stats_.malformed_messages;
            return;
        }
        ++stats_.hellos_received;
        auto [it, fresh] = devices_.try_emplace(src);
        DeviceRecord& dev = it->second;
        bool announce = fresh || dev.state == DeviceState::stale;
        dev.addr = src;
        dev.name = name;
        dev.modes = modes;
        dev.last_seen = now;
        dev.state = DeviceState::discovered;
        if (announce)
            push_event(NodeEvent{NodeEvent::Kind::device_discovered, src, 0, AuthMode::no_auth,
                                 Errc::handshake_failed, {}, name});
    }

    void sweep_devices(VirtualTime now) {
        for (auto it = devices_.begin(); it != devices_.end();) {
            DeviceRecord& dev = it->second;
            if (now >= dev.last_seen + policy_.device_purge) {
                it = devices_.erase(it);
                continue;
            }
            if (dev.state == DeviceState::discovered && now >= dev.last_seen + policy_.device_expiry) {
                dev.state = DeviceState::stale;
                push_event(NodeEvent{NodeEvent::Kind::device_stale, dev.addr, 0, AuthMode::no_auth,
                                     Errc::handshake_failed, {}, dev.name});
            }
            ++it;
        }
    }

    void sweep_handshakes(VirtualTime now) {
        for (auto& [id, c] : conns_) {
            if (c.state != ConnState::connecting) continue;
            bool expired = (c.initiator && c.initiator->expired(now)) ||
                           (c.responder && c.responder->expired(now));
            if (!expired) continue;
            if (c.initiator) c.initiator->fail();
            if (c.responder) c.responder->fail();
            fail_conn(c, Errc::timeout, now);
        }
    }

    // ---- platform message dispatch ----

    void drain_rel(VirtualTime now) {
        for (RelEvent& ev : rel_.take_events()) {
            switch (ev.kind) {
                case RelEvent::Kind::message:
                    on_message(ev.peer, ev.message, now);
                    break;
                case RelEvent::Kind::send_complete:
                    on_send_complete(ev.peer, ev.msg_id, now);
                    break;
                case RelEvent::Kind::send_failed:
                    on_send_failed(ev.peer, ev.msg_id, now);
                    break;
            }
        }
    }

    void on_message(NodeAddress src, const Bytes& msg, VirtualTime now) {
        if (msg.size() < kPlatformHeaderSize) {
            ++stats_.malformed_messages;
            return;
        }
        ByteReader r(ByteView(msg.data(), msg.size()));
        std::uint8_t type = r.u8();
        std::uint32_t conn_field = r.u32();
        ByteView body = r.rest();
        switch (type) {
            case kMsgHello: on_hello(src, conn_field, body, now); break;
            case kMsgHsM1: on_m1(src, conn_field, body, now); break;
            case kMsgHsM2: on_m2(src, conn_field, body, now); break;
            case kMsgHsM3: on_m3(src, conn_field, body, now); break;
            case kMsgData: on_data(src, conn_field, body, now); break;
            case kMsgClose: on_close_msg(src, conn_field, now); break;
            default: ++stats_.unknown_msg_type; break;
        }
    }

    void on_m1(NodeAddress src, std::uint32_t conn_field, ByteView body, VirtualTime now) {
        std::uint32_t wire = conn_field & ~kFromResponderBit;
        if ((conn_field & kFromResponderBit) || wire == 0) {
            ++stats_.malformed_messages;
            return;
        }
        HandshakeM1 m1;
        try {
            m1 = HandshakeM1::decode(body);
        } catch (const Error&) {
            ++stats_.malformed_messages;
            return;
        }
        if (!nonces_.insert(src, m1.n1)) {
            ++stats_.duplicate_m1;
            return;
        }
        if (find_route(src, wire, /*initiated=*/false)) {
            ++stats_.stray_messages;  // wire id reuse from this peer
            return;
        }
        Connection c;
        c.handle = alloc_conn_id();
        c.wire_id = wire;
        c.initiated = false;
        c.peer = src;
        c.mode = m1.mode;
        if (m1.mode == AuthMode::no_auth) {
            c.state = ConnState::established;
            Connection& stored = register_conn(std::move(c));
            trace_state(now, stored, "Established");
            push_event(NodeEvent{NodeEvent::Kind::connection_established, src, stored.handle,
                                 stored.mode, Errc::handshake_failed, {}, {}});
            return;
        }
        try {
            c.responder.emplace(*provider_, identity_, src, m1, rng_, now,
                                policy_.handshake_timeout);
        } catch (const Error& e) {
            ++stats_.handshake_rejects;
            trace_drop(now, "handshake-reject", e.what());
            return;  // no M2; the initiator times out
        }
        std::uint16_t msg_id =
            send_platform(src, kMsgHsM2, wire | kFromResponderBit, c.responder->m2().encode(), now);
        pending_[{src, msg_id}] = {c.handle, PendingKind::m2};
        Connection& stored = register_conn(std::move(c));
        trace_state(now, stored, "Connecting");
    }

    void on_m2(NodeAddress src, std::uint32_t conn_field, ByteView body, VirtualTime now) {
        if (!(conn_field & kFromResponderBit)) {
            ++stats_.malformed_messages;
            return;
        }
        Connection* c = find_route(src, conn_field & ~kFromResponderBit, /*initiated=*/true);
        if (!c || !c->initiator || c->state != ConnState::connecting) {
            ++stats_.stray_messages;
            return;
        }
        HandshakeM2 m2;
        try {
            m2 = HandshakeM2::decode(body);
        } catch (const Error&) {
            ++stats_.malformed_messages;
            return;
        }
        try {
            HandshakeM3 m3 = c->initiator->on_m2(m2, now);
            std::uint16_t msg_id =
                send_platform(src, kMsgHsM3, c->wire_id, m3.encode(), now);
            pending_[{src, msg_id}] = {c->handle, PendingKind::m3};
            // Connection turns Established once M3 delivery is confirmed, so
            // a lost M3 ends in Failed on both sides, never a half-open pair.
        } catch (const Error& e) {
            if (e.code() == Errc::stale_nonce) {
                ++stats_.stray_messages;
                return;
            }
            fail_conn(*c, e.code(), now);
        }
    }

    void on_m3(NodeAddress src, std::uint32_t conn_field, ByteView body, VirtualTime now) {
        if (conn_field & kFromResponderBit) {
            ++stats_.malformed_messages;
            return;
        }
        Connection* c = find_route(src, conn_field, /*initiated=*/false);
        if (!c || !c->responder || c->state != ConnState::connecting) {
            ++stats_.stray_messages;
            return;
        }
        HandshakeM3 m3;
        try {
            m3 = HandshakeM3::decode(body);
        } catch (const Error&) {
            ++stats_.malformed_messages;
            return;
        }
        try {
            const SessionSecrets& secrets = c->responder->on_m3(m3, now);
            c->channel.emplace(*provider_, secrets, SecureChannel::Role::responder);
            c->state = ConnState::established;
            trace_state(now, *c, "Established");
            push_event(NodeEvent{NodeEvent::Kind::connection_established, src, c->handle, c->mode,
                                 Errc::handshake_failed, {}, {}});
        } catch (const Error& e) {
            if (e.code() == Errc::stale_nonce) {
                ++stats_.stray_messages;
                return;
            }
            fail_conn(*c, e.code(), now);
        }
    }

    void on_data(NodeAddress src, std::uint32_t conn_field, ByteView body, VirtualTime now) {
        bool from_responder = (conn_field & kFromResponderBit) != 0;
        // A message from the responder lands on a connection we initiated.
        Connection* c = find_route(src, conn_field & ~kFromResponderBit, from_responder);
        if (!c) {
            ++stats_.stray_messages;
            return;
        }
        if (c->state != ConnState::established) {
            ++stats_.data_rejects;
            return;
        }
        if (c->mode == AuthMode::no_auth) {
            push_event(NodeEvent{NodeEvent::Kind::data, src, c->handle, c->mode,
                                 Errc::handshake_failed, Bytes(body.begin(), body.end()), {}});
            return;
        }
        auto record = Record::decode(body);
        if (!record) {
            ++stats_.data_rejects;
            trace_drop(now, "data-reject", "record does not parse");
            return;
        }
        try {
            Bytes plaintext = c->channel->open(*record);
            push_event(NodeEvent{NodeEvent::Kind::data, src, c->handle, c->mode,
                                 Errc::handshake_failed, std::move(plaintext), {}});
        } catch (const Error& e) {
            // Tampered or replayed records are discarded, not fatal: tearing
            // the session down would let anyone on the path kill connections
            // with a single recorded frame.
            ++stats_.data_rejects;
            trace_drop(now, "data-reject", std::string(errc_name(e.code())));
        }
    }

    void on_close_msg(NodeAddress src, std::uint32_t conn_field, VirtualTime now) {
        bool from_responder = (conn_field & kFromResponderBit) != 0;
        Connection* c = find_route(src, conn_field & ~kFromResponderBit, from_responder);
        if (!c) {
            ++stats_.stray_messages;
            return;
        }
        if (c->state != ConnState::connecting && c->state != ConnState::established) return;
        if (c->channel) c->channel->close();
        c->state = ConnState::closed;
        trace_state(now, *c, "Closed");
        push_event(NodeEvent{NodeEvent::Kind::connection_closed, src, c->handle, c->mode,
                             Errc::handshake_failed, {}, {}});
    }

    // ---- reliability confirmations ----

    void on_send_complete(NodeAddress peer, std::uint16_t msg_id, VirtualTime now) {
        auto it = pending_.find({peer, msg_id});
        if (it == pending_.end()) return;
        PendingRef ref = it->second;
        pending_.erase(it);
        Connection* c = find_conn(ref.handle);
        if (!c) return;
        if (ref.kind == PendingKind::data) {
            c->data_in_flight = false;
            if (!c->send_queue.empty() && c->state == ConnState::established) {
                Bytes next = std::move(c->send_queue.front());
                c->send_queue.pop_front();
                dispatch_data(*c, next, now);
            }
            return;
        }
        if (c->state != ConnState::connecting) return;
        if (ref.kind == PendingKind::m1 && c->mode == AuthMode::no_auth) {
            c->state = ConnState::established;
            trace_state(now, *c, "Established");
            push_event(NodeEvent{NodeEvent::Kind::connection_established, c->peer, c->handle,
                                 c->mode, Errc::handshake_failed, {}, {}});
        } else if (ref.kind == PendingKind::m3 && c->initiator &&
                   c->initiator->phase() == HandshakePhase::established) {
            c->channel.emplace(*provider_, c->initiator->secrets(), SecureChannel::Role::initiator);
            c->state = ConnState::established;
            trace_state(now, *c, "Established");
            push_event(NodeEvent{NodeEvent::Kind::connection_established, c->peer, c->handle,
                                 c->mode, Errc::handshake_failed, {}, {}});
        }
    }

    void on_send_failed(NodeAddress peer, std::uint16_t msg_id, VirtualTime now) {
        auto it = pending_.find({peer, msg_id});
        if (it == pending_.end()) return;
        PendingRef ref = it->second;
        pending_.erase(it);
        if (ref.kind == PendingKind::close_msg) return;
        Connection* c = find_conn(ref.handle);
        if (!c) return;
        if (c->initiator) c->initiator->fail();
        if (c->responder) c->responder->fail();
        fail_conn(*c, Errc::delivery_failed, now);
    }

    // ---- plumbing ----

    std::uint16_t send_platform(NodeAddress dest, std::uint8_t type, std::uint32_t conn_field,
                                ByteView body, VirtualTime now) {
        ByteWriter w;
        w.u8(type);
        w.u32(conn_field);
        w.raw(body);
        return rel_.send(dest, w.data(), now);
    }

    static std::uint32_t wire_field(const Connection& c) {
        return c.initiated ? c.wire_id : (c.wire_id | kFromResponderBit);
    }

    std::uint32_t alloc_conn_id() {
        if (next_conn_ >= kFromResponderBit)
            throw Error(Errc::io_error, "connection id space exhausted");
        return next_conn_++;
    }

    Connection& register_conn(Connection c) {
        route_[{c.peer, c.wire_id, c.initiated}] = c.handle;
        auto [it, fresh] = conns_.emplace(c.handle, std::move(c));
        return it->second;
    }

    Connection* find_conn(std::uint32_t handle) {
        auto it = conns_.find(handle);
        return it == conns_.end() ? nullptr : &it->second;
    }

    Connection* find_route(NodeAddress peer, std::uint32_t wire_id, bool initiated) {
        auto it = route_.find({peer, wire_id, initiated});
        return it == route_.end() ? nullptr : find_conn(it->second);
    }

    void fail_conn(Connection& c, Errc cause, VirtualTime now) {
        if (c.state == ConnState::closed || c.state == ConnState::failed) return;
        if (c.channel) c.channel->close();
        c.state = ConnState::failed;
        c.fail_cause = cause;
        trace_state(now, c, "Failed");
        push_event(NodeEvent{NodeEvent::Kind::connection_failed, c.peer, c.handle, c.mode, cause,
                             {}, {}});
    }

    void push_event(NodeEvent ev) { events_.push_back(std::move(ev)); }

    void trace_state(VirtualTime now, const Connection& c, std::string_view state) {
        if (trace)
            trace(now, "state",
                  "conn=" + std::to_string(c.handle) + " peer=" + c.peer.str() + " mode=" +
                      std::string(auth_mode_name(c.mode)) + " state=" + std::string(state));
    }

    void trace_drop(VirtualTime now, std::string_view kind, const std::string& detail) {
        if (trace) trace(now, kind, detail);
    }

    NodeAddress addr_;
    Identity identity_;
    CryptoProvider* provider_;
    SplitMix64 rng_;
    NodePolicy policy_;
    ReliableEndpoint rel_;

    VirtualTime next_beacon_ = 0;
    std::map<NodeAddress, DeviceRecord> devices_;
    std::map<std::uint32_t, Connection> conns_;
    std::map<std::tuple<NodeAddress, std::uint32_t, bool>, std::uint32_t> route_;
    std::map<std::pair<NodeAddress, std::uint16_t>, PendingRef> pending_;
    NonceRegistry nonces_;
    std::uint32_t next_conn_ = 1;
    std::vector<NodeEvent> events_;
    NodeStats stats_;
};

}  // namespace adhocnet
