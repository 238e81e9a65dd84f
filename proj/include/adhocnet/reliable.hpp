#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "adhocnet/segment.hpp"
#include "adhocnet/transport.hpp"

namespace adhocnet {

struct ArqPolicy {
    VirtualTime retransmit_timeout = 200;
    // Generous enough that exhaustion means a dead link, not bad luck: at 30%
    // frame loss the chance a fragment misses 13 rounds is ~1.6e-7.
    std::uint32_t max_retries = 12;
    VirtualTime reassembly_timeout = 5000;
    // Max unacked fragments in flight per message (0 = unlimited). Keeps
    // bursts inside OS socket buffers on the UDP backend.
    std::uint32_t window = 64;
    std::size_t capacity = kMaxSegmentPayload;
    // Completed msg_ids remembered per source to suppress replays.
    std::size_t dedup_horizon = 1024;

    void validate() const {
        if (retransmit_timeout == 0 || reassembly_timeout == 0 || max_retries == 0)
            throw Error(Errc::malformed, "ArqPolicy fields must be strictly positive");
        if (capacity == 0 || capacity > kMaxSegmentPayload)
            throw Error(Errc::malformed, "ArqPolicy capacity out of range");
    }
};

struct RelEvent {
    enum class Kind { message, send_complete, send_failed };
    Kind kind;
    NodeAddress peer;  // source for message, destination for send_*
    std::uint16_t msg_id = 0;
    Bytes message;  // only for Kind::message
};

struct RelStats {
    std::uint64_t malformed_segments = 0;
    std::uint64_t crc_mismatches = 0;
    std::uint64_t stray_acks = 0;
    std::uint64_t inconsistent_frag_count = 0;
    std::uint64_t duplicate_fragments = 0;
    std::uint64_t evicted_reassemblies = 0;
    std::uint64_t data_transmissions = 0;
};

// Reliable datagrams over frames: fragmentation, per-fragment ACK bitmaps,
// selective-repeat retransmission, dedup and reassembly.
//
// Pure event-driven core: every call consumes (input, now) and queues frames
// to transmit plus upward events; the owner drains them with take_frames()
// and take_events(). No internal threads, no blocking, one instance per node.
//
// Broadcast sends are fire-and-forget: fragments go out once, receivers do
// not acknowledge frames addressed to the broadcast address.
class ReliableEndpoint {
public:
    explicit ReliableEndpoint(NodeAddress self, ArqPolicy policy = {})
        : self_(self), policy_(policy) {
        policy_.validate();
    }

    const ArqPolicy& policy() const { return policy_; }
    const RelStats& stats() const { return stats_; }

    // Fragments and transmits; unicast messages are tracked until every
    // fragment is acknowledged (send_complete) or the retry budget is
    // exhausted (send_failed).
    std::uint16_t send(const NodeAddress& dest, ByteView message, VirtualTime now) {
        std::uint16_t id = next_msg_id_[dest]++;
        auto segments = fragment(message, policy_.capacity, id);
        if (dest.is_broadcast()) {
            for (const auto& s : segments) transmit(dest, s);
            return id;
        }
        Outbound ob;
        ob.segments = std::move(segments);
        ob.acked.assign(ob.segments.size(), false);
        ob.sent.assign(ob.segments.size(), false);
        auto [it, fresh] = outbound_.emplace(Key{dest, id}, std::move(ob));
        if (!fresh) throw Error(Errc::message_too_large, "msg_id space exhausted toward peer");
        top_up(it->first, it->second, now);
        return id;
    }

    void on_frame(const Frame& frame, VirtualTime now) {
        auto seg = Segment::decode(frame.payload);
        if (!seg) {
            ++stats_.malformed_segments;
            return;
        }
        if (!seg->crc_ok()) {
            ++stats_.crc_mismatches;
            return;
        }
        if (seg->is_ack())
            on_ack(frame.src, *seg, now);
        else
            on_data(frame.src, frame.dest.is_broadcast(), *seg, now);
    }

    void on_tick(VirtualTime now) {
        // Reassembly eviction: bounded state against peers that never finish.
        for (auto it = inbound_.begin(); it != inbound_.end();) {
            if (it->second.deadline <= now) {
                ++stats_.evicted_reassemblies;
                it = inbound_.erase(it);
            } else {
                ++it;
            }
        }
        for (auto it = outbound_.begin(); it != outbound_.end();) {
            Outbound& ob = it->second;
            if (ob.retx_deadline > now) {
                ++it;
                continue;
            }
            if (ob.rounds_used >= policy_.max_retries) {
                events_.push_back({RelEvent::Kind::send_failed, it->first.first, it->first.second, {}});
                it = outbound_.erase(it);
                continue;
            }
            ++ob.rounds_used;
            bool sent_any = false;
            for (std::size_t i = 0; i < ob.segments.size(); ++i) {
                if (ob.sent[i] && !ob.acked[i]) {
                    transmit(it->first.first, ob.segments[i]);
                    sent_any = true;
                }
            }
            top_up(it->first, ob, now);
            if (sent_any || ob.in_flight() > 0) ob.retx_deadline = now + policy_.retransmit_timeout;
            ++it;
        }
    }

    // Earliest time at which on_tick has work to do.
    std::optional<VirtualTime> next_wakeup() const {
        std::optional<VirtualTime> t;
        auto consider = [&](VirtualTime v) {
            if (!t || v < *t) t = v;
        };
        for (const auto& [k, ob] : outbound_) consider(ob.retx_deadline);
        for (const auto& [k, ib] : inbound_) consider(ib.deadline);
        return t;
    }

    std::vector<Frame> take_frames() { return std::exchange(frames_, {}); }
    std::vector<RelEvent> take_events() { return std::exchange(events_, {}); }

private:
    using Key = std::pair<NodeAddress, std::uint16_t>;
    // Receive-side stream key: a source's broadcast stream and its unicast
    // stream to us carry independent msg_id counters (ids are allocated
    // per-(source,dest)), so dedup and reassembly must not mix them.
    using InKey = std::tuple<NodeAddress, bool, std::uint16_t>;

    struct Outbound {
        std::vector<Segment> segments;
        std::vector<bool> acked;
        std::vector<bool> sent;
        std::size_t acked_count = 0;
        std::size_t sent_count = 0;
        std::uint32_t rounds_used = 0;
        VirtualTime retx_deadline = 0;

        std::size_t in_flight() const { return sent_count - acked_count; }
    };

    struct Inbound {
        std::uint16_t frag_count = 0;
        std::vector<std::optional<Bytes>> parts;
        std::size_t have = 0;
        VirtualTime deadline = 0;
    };

    // Recently completed msg_ids per source, with frag_count kept so a
    // retransmitted fragment of a finished message still gets a full re-ACK.
    struct Horizon {
        std::deque<std::uint16_t> order;
        std::map<std::uint16_t, std::uint16_t> frag_counts;
    };

    void transmit(const NodeAddress& dest, const Segment& seg) {
        frames_.push_back(Frame{dest, self_, kEthertype, seg.encode()});
        if (seg.is_data()) ++stats_.data_transmissions;
    }

    // First transmissions of not-yet-sent fragments, up to the window.
    void top_up(const Key& key, Outbound& ob, VirtualTime now) {
        std::size_t limit = policy_.window == 0 ? ob.segments.size() : policy_.window;
        bool sent_any = false;
        for (std::size_t i = 0; i < ob.segments.size() && ob.in_flight() < limit; ++i) {
            if (ob.sent[i]) continue;
            ob.sent[i] = true;
            ++ob.sent_count;
            transmit(key.first, ob.segments[i]);
            sent_any = true;
        }
        if (sent_any) ob.retx_deadline = now + policy_.retransmit_timeout;
    }

    void on_ack(const NodeAddress& from, const Segment& seg, VirtualTime now) {
        auto ack = AckBitmap::decode(seg.payload, seg.header.frag_count);
        if (!ack || ack->msg_id != seg.header.msg_id) {
            ++stats_.malformed_segments;
            return;
        }
        auto it = outbound_.find(Key{from, ack->msg_id});
        if (it == outbound_.end() || it->second.segments.size() != seg.header.frag_count) {
            ++stats_.stray_acks;  // liberal receiver: unknown msg_id is ignored
            return;
        }
        Outbound& ob = it->second;
        for (std::size_t i = 0; i < ob.segments.size(); ++i) {
            if (ack->get(i) && !ob.acked[i]) {
                ob.acked[i] = true;
                ++ob.acked_count;
            }
        }
        if (ob.acked_count == ob.segments.size()) {
            events_.push_back({RelEvent::Kind::send_complete, from, ack->msg_id, {}});
            outbound_.erase(it);
            return;
        }
        top_up(it->first, ob, now);
    }

    void on_data(const NodeAddress& from, bool was_broadcast, const Segment& seg,
                 VirtualTime now) {
        const std::uint16_t id = seg.header.msg_id;
        // Replay of an already-delivered message: re-ACK so the sender stops,
        // never deliver twice.
        if (auto h = completed_.find({from, was_broadcast}); h != completed_.end()) {
            auto fc = h->second.frag_counts.find(id);
            if (fc != h->second.frag_counts.end()) {
                ++stats_.duplicate_fragments;
                if (!was_broadcast) send_full_ack(from, id, fc->second);
                return;
            }
        }
        auto [it, fresh] = inbound_.try_emplace(InKey{from, was_broadcast, id});
        Inbound& ib = it->second;
        if (fresh) {
            ib.frag_count = seg.header.frag_count;
            ib.parts.assign(seg.header.frag_count, std::nullopt);
            ib.deadline = now + policy_.reassembly_timeout;
        } else if (ib.frag_count != seg.header.frag_count) {
            ++stats_.inconsistent_frag_count;
            return;  // dropped, not acked
        }
        if (ib.parts[seg.header.frag_index])
            ++stats_.duplicate_fragments;
        else {
            ib.parts[seg.header.frag_index] = seg.payload;
            ++ib.have;
        }
        if (!was_broadcast) send_cumulative_ack(from, id, ib);
        if (ib.have == ib.frag_count) {
            Bytes message;
            for (const auto& p : ib.parts) message.insert(message.end(), p->begin(), p->end());
            retire(from, was_broadcast, id, ib.frag_count);
            inbound_.erase(it);
            events_.push_back({RelEvent::Kind::message, from, id, std::move(message)});
        }
    }

    void send_cumulative_ack(const NodeAddress& to, std::uint16_t id, const Inbound& ib) {
        AckBitmap ack = AckBitmap::empty(id, ib.frag_count);
        for (std::size_t i = 0; i < ib.parts.size(); ++i)
            if (ib.parts[i]) ack.set(i);
        send_ack(to, id, ib.frag_count, ack);
    }

    void send_full_ack(const NodeAddress& to, std::uint16_t id, std::uint16_t frag_count) {
        AckBitmap ack = AckBitmap::empty(id, frag_count);
        for (std::size_t i = 0; i < frag_count; ++i) ack.set(i);
        send_ack(to, id, frag_count, ack);
    }

    void send_ack(const NodeAddress& to, std::uint16_t id, std::uint16_t frag_count,
                  const AckBitmap& ack) {
        Segment s;
        s.payload = ack.encode();
        s.header.flags = kFlagAck;
        s.header.msg_id = id;
        s.header.frag_index = 0;
        s.header.frag_count = frag_count;
        s.header.payload_len = static_cast<std::uint16_t>(s.payload.size());
        s.header.crc32 = crc32_ieee(s.payload);
        transmit(to, s);
    }

    void retire(const NodeAddress& from, bool was_broadcast, std::uint16_t id,
                std::uint16_t frag_count) {
        Horizon& h = completed_[{from, was_broadcast}];
        h.order.push_back(id);
        h.frag_counts[id] = frag_count;
        while (h.order.size() > policy_.dedup_horizon) {
            h.frag_counts.erase(h.order.front());
            h.order.pop_front();
        }
    }

    NodeAddress self_;
    ArqPolicy policy_;
    RelStats stats_;
    std::map<NodeAddress, std::uint16_t> next_msg_id_;
    std::map<Key, Outbound> outbound_;
    std::map<InKey, Inbound> inbound_;
    std::map<std::pair<NodeAddress, bool>, Horizon> completed_;
    std::vector<Frame> frames_;
    std::vector<RelEvent> events_;
};

}  // namespace adhocnet
