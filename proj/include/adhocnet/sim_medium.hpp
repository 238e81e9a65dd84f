#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "adhocnet/rng.hpp"
#include "adhocnet/transport.hpp"

namespace adhocnet {

// Link-fault model for the simulated medium. With a fixed seed and a fixed
// global submission order the full delivery trace is bit-identical across
// runs.
struct LinkModel {
    double p_loss = 0.0;
    double p_dup = 0.0;
    std::uint32_t reorder_window = 0;
    std::uint64_t seed = 0;
};

// Sees every honest frame submission; used by the attacker harness. Returning
// false suppresses the frame. Injections go through SimMedium::inject and are
// delivered directly (no fault draws, no re-tap).
class MediumTap {
public:
    virtual ~MediumTap() = default;
    virtual bool on_submit(const Frame& frame, VirtualTime now) = 0;
};

// Deterministic in-memory broadcast medium.
//
// Fault pipeline, applied per (frame, receiver) in receiver attachment order,
// one splitmix64 stream for the whole medium (this draw discipline is a fixed
// contract so tests can replay the stream offline):
//   1. always draw u_loss; the copy is lost if u_loss < p_loss
//   2. if not lost, always draw u_dup; deliver 2 copies if u_dup < p_dup
//   3. per delivered copy, only when reorder_window > 0: draw
//      k = next_u64() % (reorder_window + 1) and insert the copy k slots
//      before the tail of the receiver queue (clamped to queue size);
//      when reorder_window == 0 the copy is appended FIFO.
class SimMedium {
public:
    explicit SimMedium(LinkModel model = {}) : model_(model), rng_(model.seed) {}

    // Trace hooks (optional). reason for on_dropped: "loss" or "attacker".
    std::function<void(const Frame&, VirtualTime)> on_sent;
    std::function<void(const Frame&, const NodeAddress&, VirtualTime)> on_delivered;
    std::function<void(const Frame&, const NodeAddress&, const char*, VirtualTime)> on_dropped;

    void set_tap(MediumTap* tap) { tap_ = tap; }
    void advance_to(VirtualTime now) { now_ = now; }
    VirtualTime now() const { return now_; }
    const LinkModel& model() const { return model_; }

    class SimEndpoint final : public Endpoint {
    public:
        SimEndpoint(SimMedium* medium, std::size_t slot) : medium_(medium), slot_(slot) {}
        ~SimEndpoint() override {
            if (medium_) close();
        }

        SimEndpoint(const SimEndpoint&) = delete;
        SimEndpoint& operator=(const SimEndpoint&) = delete;

        NodeAddress address() const override { return medium_->slots_[slot_].addr; }

        void send(const Frame& frame) override {
            ensure_attached();
            frame.validate();
            if (frame.src != address())
                throw Error(Errc::source_mismatch, "frame.src must equal the endpoint address");
            medium_->submit(frame);
        }

        std::optional<Frame> poll(VirtualTime, VirtualTime) override {
            ensure_attached();
            auto& q = medium_->slots_[slot_].queue;
            if (q.empty()) return std::nullopt;
            Frame f = std::move(q.front());
            q.pop_front();
            return f;
        }

        bool has_pending() const { return !medium_->slots_[slot_].queue.empty(); }

        void close() override {
            if (medium_ && medium_->slots_[slot_].attached) medium_->detach(slot_);
            medium_ = nullptr;
        }

    private:
        void ensure_attached() const {
            if (!medium_ || !medium_->slots_[slot_].attached)
                throw Error(Errc::detached, "endpoint is detached");
        }

        SimMedium* medium_;
        std::size_t slot_;
    };

    // Attaches a new endpoint. Endpoints must not outlive the medium.
    std::unique_ptr<SimEndpoint> attach(const NodeAddress& addr) {
        if (addr.is_broadcast())
            throw Error(Errc::invalid_address, "cannot attach the broadcast address");
        for (const auto& s : slots_)
            if (s.attached && s.addr == addr)
                throw Error(Errc::duplicate_address, addr.str() + " already attached");
        slots_.push_back(Slot{addr, {}, true});
        return std::make_unique<SimEndpoint>(this, slots_.size() - 1);
    }

    // Attacker-side injection: delivered directly to matching receivers,
    // bypassing the fault model and the tap.
    void inject(const Frame& frame) {
        if (on_sent) on_sent(frame, now_);
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            if (!receives(i, frame)) continue;
            slots_[i].queue.push_back(frame);
            if (on_delivered) on_delivered(frame, slots_[i].addr, now_);
        }
    }

    bool any_pending() const {
        for (const auto& s : slots_)
            if (s.attached && !s.queue.empty()) return true;
        return false;
    }

private:
    struct Slot {
        NodeAddress addr;
        std::deque<Frame> queue;
        bool attached = false;
    };

    bool receives(std::size_t slot, const Frame& f) const {
        const Slot& s = slots_[slot];
        if (!s.attached || s.addr == f.src) return false;
        return f.dest.is_broadcast() || f.dest == s.addr;
    }

    void submit(const Frame& frame) {
        if (on_sent) on_sent(frame, now_);
        if (tap_ && !tap_->on_submit(frame, now_)) {
            if (on_dropped) on_dropped(frame, NodeAddress::broadcast(), "attacker", now_);
            return;
        }
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            if (!receives(i, frame)) continue;
            if (rng_.next_double() < model_.p_loss) {
                if (on_dropped) on_dropped(frame, slots_[i].addr, "loss", now_);
                continue;
            }
            int copies = rng_.next_double() < model_.p_dup ? 2 : 1;
            for (int c = 0; c < copies; ++c) {
                auto& q = slots_[i].queue;
                std::size_t k = 0;
                if (model_.reorder_window > 0) {
                    k = rng_.next_below(model_.reorder_window + 1);
                    if (k > q.size()) k = q.size();
                }
                q.insert(q.end() - static_cast<std::ptrdiff_t>(k), frame);
                if (on_delivered) on_delivered(frame, slots_[i].addr, now_);
            }
        }
    }

    void detach(std::size_t slot) {
        slots_[slot].attached = false;
        slots_[slot].queue.clear();
    }

    LinkModel model_;
    SplitMix64 rng_;
    std::vector<Slot> slots_;
    MediumTap* tap_ = nullptr;
    VirtualTime now_ = 0;
};

using SimEndpoint = SimMedium::SimEndpoint;

}  // namespace adhocnet
