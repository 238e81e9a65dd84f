#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "adhocnet/reliable.hpp"

namespace an = adhocnet;

namespace {

an::NodeAddress addr(std::uint8_t last) {
    auto a = *an::NodeAddress::parse("aa:00:00:00:00:00");
    a.bytes[5] = last;
    return a;
}

const an::NodeAddress kA = addr(1);
const an::NodeAddress kB = addr(2);

// Delivers every pending frame from one endpoint to the other.
void pipe(an::ReliableEndpoint& from, an::ReliableEndpoint& to, an::VirtualTime now) {
    for (const an::Frame& f : from.take_frames()) to.on_frame(f, now);
}

// Runs both endpoints to quiescence on an ideal link.
void settle(an::ReliableEndpoint& a, an::ReliableEndpoint& b, an::VirtualTime& now) {
    for (int i = 0; i < 100; ++i) {
        auto fa = a.take_frames();
        auto fb = b.take_frames();
        if (fa.empty() && fb.empty()) break;
        for (const auto& f : fa) b.on_frame(f, now);
        for (const auto& f : fb) a.on_frame(f, now);
        ++now;
        a.on_tick(now);
        b.on_tick(now);
    }
}

std::vector<an::RelEvent> events_of_kind(std::vector<an::RelEvent> evs, an::RelEvent::Kind k) {
    std::vector<an::RelEvent> out;
    for (auto& e : evs)
        if (e.kind == k) out.push_back(std::move(e));
    return out;
}

}  // namespace

TEST(Reliable, SingleFragmentIdealLink) {
    an::ReliableEndpoint a(kA), b(kB);
    an::Bytes msg{1, 2, 3};
    a.send(kB, msg, 0);

    auto frames = a.take_frames();
    ASSERT_EQ(frames.size(), 1u);  // one transmission per fragment
    b.on_frame(frames[0], 1);

    auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
    ASSERT_EQ(msgs.size(), 1u);
    EXPECT_EQ(msgs[0].message, msg);
    EXPECT_EQ(msgs[0].peer, kA);

    auto acks = b.take_frames();
    ASSERT_EQ(acks.size(), 1u);  // one ACK
    a.on_frame(acks[0], 2);
    auto done = events_of_kind(a.take_events(), an::RelEvent::Kind::send_complete);
    ASSERT_EQ(done.size(), 1u);
    EXPECT_EQ(a.stats().data_transmissions, 1u);
    EXPECT_FALSE(a.next_wakeup().has_value());  // retransmit timer cancelled
}

TEST(Reliable, MultiFragmentRoundTrip) {
    an::ReliableEndpoint a(kA), b(kB);
    an::Bytes msg(4000, 0);
    for (std::size_t i = 0; i < msg.size(); ++i) msg[i] = static_cast<std::uint8_t>(i * 31);
    a.send(kB, msg, 0);
    an::VirtualTime now = 1;
    settle(a, b, now);
    auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
    ASSERT_EQ(msgs.size(), 1u);
    EXPECT_EQ(msgs[0].message, msg);
    ASSERT_EQ(events_of_kind(a.take_events(), an::RelEvent::Kind::send_complete).size(), 1u);
    EXPECT_EQ(a.stats().data_transmissions, 3u);  // ceil(4000/1486), no retransmits
}

TEST(Reliable, LostFragmentIsRetransmittedOnce) {
    an::ReliableEndpoint a(kA), b(kB);
    an::Bytes msg(3000, 0x77);
    a.send(kB, msg, 0);

    auto frames = a.take_frames();
    ASSERT_EQ(frames.size(), 3u);
    // Drop the first copy of fragment 1; deliver the others.
    b.on_frame(frames[0], 1);
    b.on_frame(frames[2], 1);
    pipe(b, a, 2);  // partial ACKs reach the sender
    EXPECT_TRUE(events_of_kind(b.take_events(), an::RelEvent::Kind::message).empty());

    a.on_tick(1 + a.policy().retransmit_timeout);
    auto retx = a.take_frames();
    ASSERT_EQ(retx.size(), 1u);  // only the missing fragment again
    auto seg = an::Segment::decode(retx[0].payload);
    ASSERT_TRUE(seg.has_value());
    EXPECT_EQ(seg->header.frag_index, 1);

    b.on_frame(retx[0], 300);
    auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
    ASSERT_EQ(msgs.size(), 1u);
    EXPECT_EQ(msgs[0].message, msg);
    pipe(b, a, 301);
    ASSERT_EQ(events_of_kind(a.take_events(), an::RelEvent::Kind::send_complete).size(), 1u);
    EXPECT_EQ(a.stats().data_transmissions, 4u);  // 3 + 1 retransmit
}

TEST(Reliable, DeadLinkFailsAfterExactRetryBudget) {
    an::ReliableEndpoint a(kA);
    a.send(kB, an::Bytes{5}, 0);
    std::uint64_t transmissions = a.take_frames().size();
    an::VirtualTime now = 0;
    for (int round = 0; round < 1000; ++round) {
        auto w = a.next_wakeup();
        if (!w) break;
        now = *w;
        a.on_tick(now);
        transmissions += a.take_frames().size();
        auto failed = events_of_kind(a.take_events(), an::RelEvent::Kind::send_failed);
        if (!failed.empty()) {
            EXPECT_EQ(transmissions, a.policy().max_retries + 1u);
            EXPECT_EQ(a.stats().data_transmissions, a.policy().max_retries + 1u);
            return;
        }
    }
    FAIL() << "send_failed never fired";
}

TEST(Reliable, AckCarriesPerFragmentBits) {
    an::ReliableEndpoint a(kA), b(kB);
    a.send(kB, an::Bytes(2000, 1), 0);
    auto frames = a.take_frames();
    ASSERT_EQ(frames.size(), 2u);
    b.on_frame(frames[0], 1);  // only fragment 0 arrives
    auto acks = b.take_frames();
    ASSERT_EQ(acks.size(), 1u);
    auto seg = an::Segment::decode(acks[0].payload);
    ASSERT_TRUE(seg.has_value());
    ASSERT_TRUE(seg->is_ack());
    auto bitmap = an::AckBitmap::decode(seg->payload, 2);
    ASSERT_TRUE(bitmap.has_value());
    EXPECT_TRUE(bitmap->get(0));
    EXPECT_FALSE(bitmap->get(1));
}

TEST(Reliable, StrayAckIgnoredAndCounted) {
    an::ReliableEndpoint a(kA);
    an::AckBitmap bm = an::AckBitmap::empty(999, 1);
    bm.set(0);
    an::Segment s;
    s.header.flags = an::kFlagAck;
    s.header.msg_id = 999;
    s.payload = bm.encode();
    s.header.payload_len = static_cast<std::uint16_t>(s.payload.size());
    s.header.crc32 = an::crc32_ieee(s.payload);
    a.on_frame(an::Frame{kA, kB, an::kEthertype, s.encode()}, 5);
    EXPECT_EQ(a.stats().stray_acks, 1u);
    EXPECT_TRUE(a.take_events().empty());
}

TEST(Reliable, DuplicateFragmentDeliversOnce) {
    an::ReliableEndpoint a(kA), b(kB);
    a.send(kB, an::Bytes{9, 9, 9}, 0);
    auto frames = a.take_frames();
    ASSERT_EQ(frames.size(), 1u);
    b.on_frame(frames[0], 1);
    b.on_frame(frames[0], 2);  // duplicate of a completed message
    b.on_frame(frames[0], 3);
    auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
    EXPECT_EQ(msgs.size(), 1u);
    // Duplicates of a completed message are re-ACKed so a sender whose ACK
    // was lost can still finish.
    EXPECT_GE(b.take_frames().size(), 3u);
}

TEST(Reliable, DuplicateWithinActiveReassemblyCounted) {
    an::ReliableEndpoint a(kA), b(kB);
    a.send(kB, an::Bytes(2000, 4), 0);
    auto frames = a.take_frames();
    ASSERT_EQ(frames.size(), 2u);
    b.on_frame(frames[0], 1);
    b.on_frame(frames[0], 2);  // same fragment again, message incomplete
    EXPECT_EQ(b.stats().duplicate_fragments, 1u);
    EXPECT_TRUE(events_of_kind(b.take_events(), an::RelEvent::Kind::message).empty());
}

TEST(Reliable, AllDeliveryOrdersReassemble) {
    an::Bytes msg(3500, 0);
    for (std::size_t i = 0; i < msg.size(); ++i) msg[i] = static_cast<std::uint8_t>(i % 251);
    std::vector<int> order{0, 1, 2};
    do {
        an::ReliableEndpoint a(kA), b(kB);
        a.send(kB, msg, 0);
        auto frames = a.take_frames();
        ASSERT_EQ(frames.size(), 3u);
        int fed = 0;
        for (int idx : order) {
            EXPECT_TRUE(events_of_kind(b.take_events(), an::RelEvent::Kind::message).empty())
                << "emitted before fragment " << fed;
            b.on_frame(frames[static_cast<std::size_t>(idx)], ++fed);
        }
        auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
        ASSERT_EQ(msgs.size(), 1u) << "order failed";
        EXPECT_EQ(msgs[0].message, msg);
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST(Reliable, BroadcastIsFireAndForget) {
    an::ReliableEndpoint a(kA), b(kB);
    a.send(an::NodeAddress::broadcast(), an::Bytes{1, 2}, 0);
    auto frames = a.take_frames();
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_TRUE(frames[0].dest.is_broadcast());
    EXPECT_FALSE(a.next_wakeup().has_value());  // nothing tracked

    b.on_frame(frames[0], 1);
    auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
    ASSERT_EQ(msgs.size(), 1u);
    EXPECT_TRUE(b.take_frames().empty());  // broadcasts are never ACKed
}

// Regression: msg_id counters are allocated per destination, so a node's
// broadcast stream and its unicast stream toward us both start at id 0. The
// receiver must keep the two streams' dedup state separate or the second
// arrival is silently swallowed as a duplicate.
TEST(Reliable, BroadcastAndUnicastStreamsDoNotShareDedup) {
    an::ReliableEndpoint a(kA), b(kB);
    an::Bytes hello{0xAA};
    an::Bytes direct{0xBB};
    std::uint16_t id1 = a.send(an::NodeAddress::broadcast(), hello, 0);
    std::uint16_t id2 = a.send(kB, direct, 0);
    EXPECT_EQ(id1, id2);  // same numeric id on both streams
    for (const auto& f : a.take_frames()) b.on_frame(f, 1);
    auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
    ASSERT_EQ(msgs.size(), 2u);
    EXPECT_EQ(msgs[0].message, hello);
    EXPECT_EQ(msgs[1].message, direct);
}

TEST(Reliable, CorruptedSegmentCountedNotDelivered) {
    an::ReliableEndpoint a(kA), b(kB);
    a.send(kB, an::Bytes{1, 2, 3, 4}, 0);
    auto frames = a.take_frames();
    ASSERT_EQ(frames.size(), 1u);
    an::Frame bad = frames[0];
    bad.payload.back() ^= 0xFF;  // payload byte flip → CRC mismatch
    b.on_frame(bad, 1);
    EXPECT_EQ(b.stats().crc_mismatches, 1u);
    an::Frame garbage{kB, kA, an::kEthertype, an::Bytes{1, 2, 3}};
    b.on_frame(garbage, 2);
    EXPECT_EQ(b.stats().malformed_segments, 1u);
    EXPECT_TRUE(b.take_events().empty());
}

TEST(Reliable, InconsistentFragCountRejected) {
    an::ReliableEndpoint b(kB);
    auto segs = an::fragment(an::Bytes(2000, 1), 1000, 3);
    ASSERT_EQ(segs.size(), 2u);
    an::Segment lie = segs[1];
    lie.header.frag_count = 7;  // disagrees with the first fragment's 2
    // (frag_index 1 stays < 7, so the segment is structurally valid)
    b.on_frame(an::Frame{kB, kA, an::kEthertype, segs[0].encode()}, 1);
    b.on_frame(an::Frame{kB, kA, an::kEthertype, lie.encode()}, 2);
    EXPECT_EQ(b.stats().inconsistent_frag_count, 1u);
    EXPECT_TRUE(events_of_kind(b.take_events(), an::RelEvent::Kind::message).empty());
}

TEST(Reliable, StalledReassemblyIsEvicted) {
    an::ReliableEndpoint a(kA), b(kB);
    a.send(kB, an::Bytes(2000, 2), 0);
    auto frames = a.take_frames();
    b.on_frame(frames[0], 1);  // fragment 1 never arrives
    b.on_tick(1 + b.policy().reassembly_timeout);
    EXPECT_EQ(b.stats().evicted_reassemblies, 1u);
    EXPECT_FALSE(b.next_wakeup().has_value());
}

TEST(Reliable, WindowLimitsInFlightFragments) {
    an::ArqPolicy p;
    p.window = 2;
    an::ReliableEndpoint a(kA, p), b(kB);
    a.send(kB, an::Bytes(1486 * 5, 6), 0);
    auto first = a.take_frames();
    EXPECT_EQ(first.size(), 2u);  // only the window goes out at once
    an::VirtualTime now = 1;
    for (const auto& f : first) b.on_frame(f, now);
    // ACKs release the rest; the message still completes.
    settle(a, b, now);
    auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
    ASSERT_EQ(msgs.size(), 1u);
    EXPECT_EQ(msgs[0].message.size(), 1486u * 5);
}

TEST(Reliable, ManyMessagesInterleaved) {
    an::ReliableEndpoint a(kA), b(kB);
    std::vector<an::Bytes> sent;
    an::VirtualTime now = 0;
    for (int i = 0; i < 20; ++i) {
        an::Bytes m(static_cast<std::size_t>(100 * i + 1), static_cast<std::uint8_t>(i));
        sent.push_back(m);
        a.send(kB, m, now);
    }
    settle(a, b, now);
    auto msgs = events_of_kind(b.take_events(), an::RelEvent::Kind::message);
    ASSERT_EQ(msgs.size(), sent.size());
    // Single-fragment messages over an ideal link arrive in send order.
    for (std::size_t i = 0; i < sent.size(); ++i) EXPECT_EQ(msgs[i].message, sent[i]);
    EXPECT_EQ(events_of_kind(a.take_events(), an::RelEvent::Kind::send_complete).size(),
              sent.size());
}
