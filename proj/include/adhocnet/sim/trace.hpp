#pragma once

#include <string>
#include <vector>

#include "adhocnet/bytes.hpp"

namespace adhocnet {

// One line of a simulation trace. Events are totally ordered by
// (time, seq); lines contain only deterministic content (virtual times,
// addresses, hex payloads, state names), so a trace is byte-for-byte
// reproducible from (scenario, seed).
struct TraceEvent {
    VirtualTime time = 0;
    std::uint64_t seq = 0;
    std::string kind;    // frame-sent | frame-delivered | frame-dropped |
                         // state-transition | app-deliver | error | command | attacker
    std::string detail;

    std::string line() const {
        return "t=" + std::to_string(time) + " seq=" + std::to_string(seq) + " " + kind + " " +
               detail;
    }
};

class Trace {
public:
    void add(VirtualTime time, std::string kind, std::string detail) {
        events_.push_back(TraceEvent{time, next_seq_++, std::move(kind), std::move(detail)});
    }

    const std::vector<TraceEvent>& events() const { return events_; }

    std::string render() const {
        std::string out;
        for (const auto& ev : events_) {
            out += ev.line();
            out += '\n';
        }
        return out;
    }

    std::size_t count(std::string_view kind) const {
        std::size_t n = 0;
        for (const auto& ev : events_)
            if (ev.kind == kind) ++n;
        return n;
    }

private:
    std::vector<TraceEvent> events_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace adhocnet
