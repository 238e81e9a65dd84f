#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <vector>

#include "adhocnet/crypto/toy_provider.hpp"
#include "adhocnet/node.hpp"
#include "adhocnet/sim_medium.hpp"

namespace an = adhocnet;

namespace {

an::NodeAddress addr(std::uint8_t tail) {
    an::NodeAddress a{};
    a.bytes = {0xAA, 0x00, 0x00, 0x00, 0x00, tail};
    return a;
}

// A handful of nodes on one simulated medium, pumped the same way the
// simulator pumps them: quiesce at each instant, then jump to the earliest
// wakeup. Tests read each member's accumulated event history.
struct Net {
    an::ToyProvider provider;
    an::SimMedium medium;
    an::SplitMix64 seeder{515};
    an::SplitMix64 pki_rng{77};
    an::KeyPair ca;
    std::uint64_t next_serial = 1;
    an::VirtualTime now = 0;

    struct Member {
        std::unique_ptr<an::Node> node;
        std::unique_ptr<an::SimEndpoint> ep;
        std::vector<an::NodeEvent> events;
        bool active = true;
    };
    std::vector<std::unique_ptr<Member>> members;

    explicit Net(an::LinkModel model = {}) : medium(model) { ca = provider.generate_keypair(pki_rng); }

    an::Identity certified(const std::string& name, an::NodeAddress a) {
        an::KeyPair kp = provider.generate_keypair(pki_rng);
        an::Identity id;
        id.name = name;
        id.ca_public = ca.public_key;
        id.cert = an::issue_certificate(provider, ca.private_key, a, name, kp.public_key,
                                        next_serial++);
        id.private_key = kp.private_key;
        return id;
    }

    an::Identity plain(const std::string& name) {
        an::Identity id;
        id.name = name;
        return id;
    }

    Member& add(an::NodeAddress a, an::Identity id, an::NodePolicy policy = {}) {
        auto m = std::make_unique<Member>();
        m->node = std::make_unique<an::Node>(a, std::move(id), provider, seeder.fork(), policy);
        m->ep = medium.attach(a);
        members.push_back(std::move(m));
        return *members.back();
    }

    void pump(an::VirtualTime t) {
        medium.advance_to(t);
        bool progress = true;
        while (progress) {
            progress = false;
            for (auto& m : members) {
                if (!m->active) continue;
                m->node->on_tick(t);
                for (an::Frame& f : m->node->take_frames()) {
                    m->ep->send(f);
                    progress = true;
                }
            }
            for (auto& m : members) {
                if (!m->active) continue;
                while (auto f = m->ep->poll(t, t)) {
                    m->node->on_frame(*f, t);
                    progress = true;
                }
                for (an::NodeEvent& ev : m->node->take_events()) m->events.push_back(std::move(ev));
            }
        }
        now = t;
    }

    void run_until(an::VirtualTime end) {
        pump(now);
        while (now < end) {
            an::VirtualTime next = end;
            for (auto& m : members) {
                if (!m->active) continue;
                if (auto w = m->node->next_wakeup()) next = std::min(next, std::max(*w, now + 1));
            }
            pump(next);
        }
    }
};

std::vector<const an::NodeEvent*> of_kind(const Net::Member& m, an::NodeEvent::Kind k) {
    std::vector<const an::NodeEvent*> out;
    for (const an::NodeEvent& ev : m.events)
        if (ev.kind == k) out.push_back(&ev);
    return out;
}

// Drives a mutual-cert pair to Established and returns both handles.
struct EstablishedPair {
    Net net;
    Net::Member* alice;
    Net::Member* bob;
    std::uint32_t conn;  // alice's handle

    explicit EstablishedPair(an::LinkModel model = {}) : net(model) {
        alice = &net.add(addr(1), net.certified("alice", addr(1)));
        bob = &net.add(addr(2), net.certified("bob", addr(2)));
        while (net.now < 20000 && alice->node->devices().count(addr(2)) == 0)
            net.run_until(net.now + 500);
        conn = alice->node->connect(addr(2), net.now);
        while (net.now < 40000 && alice->node->connection(conn)->state == an::ConnState::connecting)
            net.run_until(net.now + 500);
    }

    std::uint32_t bob_conn() const {
        auto est = of_kind(*bob, an::NodeEvent::Kind::connection_established);
        return est.empty() ? 0 : est.front()->conn_id;
    }
};

}  // namespace

TEST(NodeDiscovery, PeersAppearWithinOneBeaconInterval) {
    Net net;
    auto& alice = net.add(addr(1), net.certified("alice", addr(1)));
    auto& bob = net.add(addr(2), net.plain("bob"));
    net.run_until(1000);

    ASSERT_EQ(alice.node->devices().count(addr(2)), 1u);
    ASSERT_EQ(bob.node->devices().count(addr(1)), 1u);
    const an::DeviceRecord& bob_seen = alice.node->devices().at(addr(2));
    EXPECT_EQ(bob_seen.name, "bob");
    EXPECT_EQ(bob_seen.state, an::DeviceState::discovered);
    EXPECT_EQ(bob_seen.modes, an::mode_bit(an::AuthMode::no_auth));

    const an::DeviceRecord& alice_seen = bob.node->devices().at(addr(1));
    EXPECT_EQ(alice_seen.name, "alice");
    // A certified verifier advertises NoAuth, MutualCert and OneWayCert.
    EXPECT_EQ(alice_seen.modes, an::mode_bit(an::AuthMode::no_auth) |
                                    an::mode_bit(an::AuthMode::mutual_cert) |
                                    an::mode_bit(an::AuthMode::one_way_cert));

    auto disc = of_kind(alice, an::NodeEvent::Kind::device_discovered);
    ASSERT_EQ(disc.size(), 1u);
    EXPECT_EQ(disc[0]->peer, addr(2));
    EXPECT_EQ(disc[0]->name, "bob");
}

TEST(NodeDiscovery, BeaconCadenceIsOnePerInterval) {
    Net net;
    auto& alice = net.add(addr(1), net.plain("alice"));
    net.run_until(5500);
    // Beacons at t = 0, 1000, ..., 5000.
    EXPECT_EQ(alice.node->stats().beacons_sent, 6u);
}

TEST(NodeDiscovery, SilentPeerGoesStaleThenRecoversThenPurges) {
    Net net;
    auto& alice = net.add(addr(1), net.plain("alice"));
    auto& bob = net.add(addr(2), net.plain("bob"));
    net.run_until(1500);
    ASSERT_EQ(alice.node->devices().at(addr(2)).state, an::DeviceState::discovered);

    bob.active = false;  // bob falls silent after his t=1000 beacon
    net.run_until(6100);  // expiry is 5000 past last_seen
    EXPECT_EQ(alice.node->devices().at(addr(2)).state, an::DeviceState::stale);
    ASSERT_EQ(of_kind(alice, an::NodeEvent::Kind::device_stale).size(), 1u);

    bob.active = true;  // a fresh HELLO re-announces the device
    net.run_until(7200);
    EXPECT_EQ(alice.node->devices().at(addr(2)).state, an::DeviceState::discovered);
    EXPECT_EQ(of_kind(alice, an::NodeEvent::Kind::device_discovered).size(), 2u);

    bob.active = false;  // silent long enough to purge the record entirely
    net.run_until(40000);
    EXPECT_EQ(alice.node->devices().count(addr(2)), 0u);
}

TEST(NodeDiscovery, OwnHelloIsIgnored) {
    an::ToyProvider provider;
    an::Identity id;
    id.name = "alice";
    an::Node alice(addr(1), std::move(id), provider, an::SplitMix64(3));
    alice.on_tick(0);
    std::vector<an::Frame> frames = alice.take_frames();
    ASSERT_FALSE(frames.empty());
    // A multicast backend can echo the node's own beacon back at it.
    for (const an::Frame& f : frames) alice.on_frame(f, 1);
    EXPECT_TRUE(alice.devices().empty());
    EXPECT_TRUE(alice.take_events().empty());
}

TEST(NodeConnection, ConnectRequiresLiveDiscoveredDevice) {
    Net net;
    auto& alice = net.add(addr(1), net.plain("alice"));
    net.add(addr(2), net.plain("bob"));
    try {
        alice.node->connect(addr(2), 0);
        FAIL() << "connect before discovery succeeded";
    } catch (const an::Error& e) {
        EXPECT_EQ(e.code(), an::Errc::unknown_device);
    }
}

TEST(NodeConnection, LifecycleConnectingEstablishedClosed) {
    Net net;
    auto& alice = net.add(addr(1), net.certified("alice", addr(1)));
    auto& bob = net.add(addr(2), net.certified("bob", addr(2)));
    net.run_until(100);

    std::uint32_t h = alice.node->connect(addr(2), net.now);
    ASSERT_NE(alice.node->connection(h), nullptr);
    EXPECT_EQ(alice.node->connection(h)->state, an::ConnState::connecting);
    EXPECT_TRUE(of_kind(alice, an::NodeEvent::Kind::connection_established).empty());

    net.run_until(net.now + 1000);
    ASSERT_EQ(alice.node->connection(h)->state, an::ConnState::established);
    auto est = of_kind(alice, an::NodeEvent::Kind::connection_established);
    ASSERT_EQ(est.size(), 1u);
    EXPECT_EQ(est[0]->peer, addr(2));
    EXPECT_EQ(est[0]->mode, an::AuthMode::mutual_cert);
    ASSERT_EQ(of_kind(*net.members[1], an::NodeEvent::Kind::connection_established).size(), 1u);

    // Both ends hold byte-identical key material.
    const an::SessionSecrets* sa = alice.node->connection(h)->session();
    std::uint32_t bh = of_kind(bob, an::NodeEvent::Kind::connection_established)[0]->conn_id;
    const an::SessionSecrets* sb = bob.node->connection(bh)->session();
    ASSERT_NE(sa, nullptr);
    ASSERT_NE(sb, nullptr);
    EXPECT_EQ(an::to_hex(sa->master.view()), an::to_hex(sb->master.view()));
    EXPECT_EQ(sa->peer_identity, "bob");
    EXPECT_EQ(sb->peer_identity, "alice");

    alice.node->close(h, net.now);
    EXPECT_EQ(alice.node->connection(h)->state, an::ConnState::closed);
    net.run_until(net.now + 500);
    EXPECT_EQ(bob.node->connection(bh)->state, an::ConnState::closed);
    EXPECT_EQ(of_kind(bob, an::NodeEvent::Kind::connection_closed).size(), 1u);
}

TEST(NodeConnection, UnansweredConnectFailsOnDeliveryExhaustion) {
    Net net;
    auto& alice = net.add(addr(1), net.certified("alice", addr(1)));
    auto& bob = net.add(addr(2), net.certified("bob", addr(2)));
    net.run_until(100);
    bob.active = false;

    std::uint32_t h = alice.node->connect(addr(2), net.now);
    net.run_until(net.now + 4000);
    ASSERT_EQ(alice.node->connection(h)->state, an::ConnState::failed);
    // The retry budget (13 rounds x 200ms) runs out before the 3s handshake
    // deadline, so the cause is delivery exhaustion.
    EXPECT_EQ(alice.node->connection(h)->fail_cause, an::Errc::delivery_failed);
    auto failed = of_kind(alice, an::NodeEvent::Kind::connection_failed);
    ASSERT_EQ(failed.size(), 1u);
    EXPECT_EQ(failed[0]->cause, an::Errc::delivery_failed);
}

TEST(NodeConnection, UnansweredConnectFailsOnHandshakeDeadline) {
    an::NodePolicy patient;
    patient.arq.max_retries = 100;  // outlive the 3s handshake deadline
    Net net;
    auto& alice = net.add(addr(1), net.certified("alice", addr(1)), patient);
    auto& bob = net.add(addr(2), net.certified("bob", addr(2)));
    net.run_until(100);
    bob.active = false;

    std::uint32_t h = alice.node->connect(addr(2), net.now);
    net.run_until(net.now + 4000);
    ASSERT_EQ(alice.node->connection(h)->state, an::ConnState::failed);
    EXPECT_EQ(alice.node->connection(h)->fail_cause, an::Errc::timeout);
}

TEST(NodeConnection, SendOnUnestablishedConnectionThrows) {
    Net net;
    auto& alice = net.add(addr(1), net.certified("alice", addr(1)));
    net.add(addr(2), net.certified("bob", addr(2)));
    net.run_until(100);
    std::uint32_t h = alice.node->connect(addr(2), net.now);
    an::Bytes msg{1, 2, 3};
    try {
        alice.node->send_secure(h, msg, net.now);  // still connecting
        FAIL() << "send while connecting succeeded";
    } catch (const an::Error& e) {
        EXPECT_EQ(e.code(), an::Errc::not_established);
    }

    net.run_until(net.now + 1000);
    alice.node->close(h, net.now);
    try {
        alice.node->send_secure(h, msg, net.now);  // closed now
        FAIL() << "send on closed connection succeeded";
    } catch (const an::Error& e) {
        EXPECT_EQ(e.code(), an::Errc::not_established);
    }
}

TEST(NodeConnection, DoubleCloseIsIdempotent) {
    EstablishedPair p;
    p.alice->node->close(p.conn, p.net.now);
    EXPECT_NO_THROW(p.alice->node->close(p.conn, p.net.now));
    p.net.run_until(p.net.now + 100);
    EXPECT_EQ(of_kind(*p.alice, an::NodeEvent::Kind::connection_closed).size(), 1u);
}

TEST(NodeConnection, NoAuthPairExchangesPlaintextData) {
    Net net;
    auto& alice = net.add(addr(1), net.plain("alice"));
    auto& bob = net.add(addr(2), net.plain("bob"));
    net.run_until(100);

    std::uint32_t h = alice.node->connect(addr(2), net.now);
    net.run_until(net.now + 1000);
    ASSERT_EQ(alice.node->connection(h)->state, an::ConnState::established);
    EXPECT_EQ(alice.node->connection(h)->mode, an::AuthMode::no_auth);
    EXPECT_EQ(alice.node->connection(h)->session(), nullptr);  // no keys in NoAuth

    an::Bytes msg{'h', 'i'};
    alice.node->send_secure(h, msg, net.now);
    net.run_until(net.now + 500);
    auto data = of_kind(bob, an::NodeEvent::Kind::data);
    ASSERT_EQ(data.size(), 1u);
    EXPECT_EQ(data[0]->data, msg);
    EXPECT_EQ(data[0]->mode, an::AuthMode::no_auth);
}

TEST(NodeData, SecureRoundTripOverLossyLink) {
    EstablishedPair p(an::LinkModel{.p_loss = 0.3, .p_dup = 0.0, .reorder_window = 0, .seed = 9});
    ASSERT_EQ(p.alice->node->connection(p.conn)->state, an::ConnState::established);

    an::Bytes big(2000);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<std::uint8_t>(i * 7);
    p.alice->node->send_secure(p.conn, big, p.net.now);
    p.net.run_until(p.net.now + 20000);

    auto got = of_kind(*p.bob, an::NodeEvent::Kind::data);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0]->data, big);

    // And the reverse direction over the same connection.
    an::Bytes reply{'o', 'k'};
    p.bob->node->send_secure(p.bob_conn(), reply, p.net.now);
    p.net.run_until(p.net.now + 20000);
    auto back = of_kind(*p.alice, an::NodeEvent::Kind::data);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0]->data, reply);
}

TEST(NodeData, BurstOfSendsArrivesCompleteAndInOrder) {
    EstablishedPair p;
    std::vector<an::Bytes> sent;
    for (int i = 0; i < 5; ++i) {
        an::Bytes msg(3000 + static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < msg.size(); ++j)
            msg[j] = static_cast<std::uint8_t>(j + static_cast<std::size_t>(i) * 31);
        sent.push_back(msg);
        p.alice->node->send_secure(p.conn, msg, p.net.now);  // all in one tick
    }
    p.net.run_until(p.net.now + 10000);

    auto got = of_kind(*p.bob, an::NodeEvent::Kind::data);
    ASSERT_EQ(got.size(), sent.size());
    for (std::size_t i = 0; i < sent.size(); ++i) EXPECT_EQ(got[i]->data, sent[i]) << "message " << i;
    EXPECT_FALSE(p.alice->node->connection(p.conn)->data_in_flight);
    EXPECT_TRUE(p.alice->node->connection(p.conn)->send_queue.empty());
    EXPECT_EQ(p.bob->node->stats().data_rejects, 0u);
}

TEST(NodeData, ReplayedRecordIsContainedNotFatal) {
    EstablishedPair p;
    an::Bytes msg{'s', 'e', 'c'};
    p.alice->node->send_secure(p.conn, msg, p.net.now);
    p.net.run_until(p.net.now + 500);
    ASSERT_EQ(of_kind(*p.bob, an::NodeEvent::Kind::data).size(), 1u);

    // An on-path attacker re-sends the first record under a fresh transfer
    // id. It reaches the channel, which flags the stale sequence number.
    const an::Connection* c = p.alice->node->connection(p.conn);
    an::SecureChannel replayer(p.net.provider, *c->session(), an::SecureChannel::Role::initiator);
    an::SplitMix64 rng(111);
    an::Record rec = replayer.seal(msg, rng);  // seq 1, already consumed by bob
    an::ByteWriter w;
    w.u8(an::kMsgData);
    w.u32(c->wire_id);
    w.raw(rec.encode());
    for (const an::Segment& s : an::fragment(w.data(), 1400, 0xF001))
        p.bob->node->on_frame(an::Frame{addr(2), addr(1), an::kEthertype, s.encode()}, p.net.now);
    p.net.run_until(p.net.now + 500);

    EXPECT_EQ(p.bob->node->stats().data_rejects, 1u);
    EXPECT_EQ(of_kind(*p.bob, an::NodeEvent::Kind::data).size(), 1u);  // no double delivery
    std::uint32_t bh = p.bob_conn();
    EXPECT_EQ(p.bob->node->connection(bh)->state, an::ConnState::established);

    // The connection still works afterwards.
    an::Bytes more{'m', 'o', 'r', 'e'};
    p.alice->node->send_secure(p.conn, more, p.net.now);
    p.net.run_until(p.net.now + 500);
    EXPECT_EQ(of_kind(*p.bob, an::NodeEvent::Kind::data).size(), 2u);
}

TEST(NodeData, TamperedRecordIsContainedNotFatal) {
    EstablishedPair p;
    const an::Connection* c = p.alice->node->connection(p.conn);
    an::SecureChannel forger(p.net.provider, *c->session(), an::SecureChannel::Role::initiator);
    an::SplitMix64 rng(222);
    an::Record rec = forger.seal(an::Bytes{'x'}, rng);
    rec.tag[0] ^= 0x01;
    an::ByteWriter w;
    w.u8(an::kMsgData);
    w.u32(c->wire_id);
    w.raw(rec.encode());
    for (const an::Segment& s : an::fragment(w.data(), 1400, 0xF002))
        p.bob->node->on_frame(an::Frame{addr(2), addr(1), an::kEthertype, s.encode()}, p.net.now);
    p.net.run_until(p.net.now + 500);

    EXPECT_EQ(p.bob->node->stats().data_rejects, 1u);
    EXPECT_TRUE(of_kind(*p.bob, an::NodeEvent::Kind::data).empty());
    EXPECT_EQ(p.bob->node->connection(p.bob_conn())->state, an::ConnState::established);
}

TEST(NodeHandshake, ReplayedM1IsCountedAndIgnored) {
    Net net;
    auto& bob = net.add(addr(2), net.plain("bob"));
    net.run_until(10);

    an::HandshakeM1 m1;
    m1.mode = an::AuthMode::no_auth;
    an::SplitMix64 rng(5);
    m1.n1 = net.provider.generate_nonce(rng);
    an::ByteWriter w;
    w.u8(an::kMsgHsM1);
    w.u32(7);  // initiator-allocated wire id
    w.raw(m1.encode());

    auto deliver = [&](std::uint16_t msg_id) {
        for (const an::Segment& s : an::fragment(w.data(), 1400, msg_id))
            bob.node->on_frame(an::Frame{addr(2), addr(1), an::kEthertype, s.encode()}, net.now);
    };
    deliver(0xF001);
    EXPECT_EQ(bob.node->connections().size(), 1u);
    deliver(0xF002);  // same nonce again, fresh transfer id
    EXPECT_EQ(bob.node->connections().size(), 1u);
    EXPECT_EQ(bob.node->stats().duplicate_m1, 1u);
}
