#pragma once

#include <optional>

#include "adhocnet/frame.hpp"

namespace adhocnet {

// Addressable broadcast medium endpoint. Two interchangeable backends exist:
// the in-memory simulated medium (SimMedium) and the UDP-broadcast emulation
// (UdpEndpoint). Both carry byte-identical Frame encodings.
class Endpoint {
public:
    virtual ~Endpoint() = default;

    virtual NodeAddress address() const = 0;

    // Submits a frame. Throws SourceMismatch if frame.src differs from the
    // endpoint address, OversizePayload above the MTU, Detached after close.
    virtual void send(const Frame& frame) = 0;

    // Returns the next delivered frame, or nullopt once none is available by
    // `deadline`. The simulated backend never waits (virtual time is advanced
    // by its driver); the UDP backend blocks until the wall-clock deadline.
    virtual std::optional<Frame> poll(VirtualTime now, VirtualTime deadline) = 0;

    virtual void close() = 0;
};

}  // namespace adhocnet
