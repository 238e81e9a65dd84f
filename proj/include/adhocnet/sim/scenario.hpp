#pragma once

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "adhocnet/config.hpp"
#include "adhocnet/handshake.hpp"
#include "adhocnet/sim/attacker.hpp"
#include "adhocnet/sim_medium.hpp"

namespace adhocnet {

// A declarative description of one simulated run: participants (with their
// credentials), link-fault model, optional attacker script, a timed command
// schedule, and the expectations to check afterwards. The same text format
// doubles as the node config file for the live CLI.
//
// Sections are line-oriented: a section header ends with `{`, and `}` closes
// it on a line of its own.
//
//   seed 7
//   duration 10000
//   provider toy
//   attacker none
//   medium {
//     p_loss 0.1
//   }
//   node alice {
//     address aa:00:00:00:00:01
//     cert true
//   }
//   node bob {
//     address aa:00:00:00:00:02
//     cert true
//     psk team-red
//   }
//   schedule {
//     connect 1500 alice bob
//     send 2000 alice bob text hello
//     send 2100 alice bob hex deadbeef
//     send 2200 alice bob random 4096
//     close 6000 alice bob
//   }
//   expect {
//     established alice bob
//     mode alice bob MutualCert
//     delivered bob 3
//   }

struct NodeSpec {
    std::string name;
    NodeAddress address;
    bool cert = false;
    std::optional<std::string> psk_label;
};

struct Command {
    enum class Kind { connect, send, close };
    Kind kind = Kind::connect;
    VirtualTime at = 0;
    std::string from, to;
    Bytes payload;               // for send
    std::size_t random_size = 0; // for send ... random N
    bool random = false;
};

struct Expectation {
    enum class Kind { established, failed, not_established, delivered, discovered, mode };
    Kind kind = Kind::established;
    std::string a, b;
    std::size_t count = 0;   // delivered
    AuthMode mode = AuthMode::no_auth;  // mode
};

// Deterministic per-label group key so scenario text never embeds raw keys.
inline Bytes psk_from_label(std::string_view label) {
    Bytes salted = to_bytes("psk:");
    Bytes l = to_bytes(label);
    salted.insert(salted.end(), l.begin(), l.end());
    Digest d = sha256(salted);
    return Bytes(d.begin(), d.begin() + 16);
}

struct Scenario {
    std::uint64_t seed = 1;
    VirtualTime duration = 10000;
    std::string provider = "toy";  // "toy" | "default"
    AttackScript attacker = AttackScript::none;
    LinkModel medium;  // .seed is filled in by the simulator from `seed`
    std::vector<NodeSpec> nodes;
    std::vector<Command> schedule;
    std::vector<Expectation> expectations;

    const NodeSpec* find_node(std::string_view name) const {
        for (const NodeSpec& n : nodes)
            if (n.name == name) return &n;
        return nullptr;
    }

    static Scenario parse_text(std::string_view text) { return parse(parse_config(text)); }

    static Scenario parse(const ConfigNode& root) {
        Scenario sc;
        sc.seed = root.get_u64_or("seed", sc.seed);
        sc.duration = root.get_u64_or("duration", sc.duration);
        sc.provider = root.get_or("provider", sc.provider);
        if (sc.provider != "toy" && sc.provider != "default")
            throw Error(Errc::scenario_invalid, "unknown provider: " + sc.provider);
        std::string att = root.get_or("attacker", "none");
        if (auto s = attack_script_from(att))
            sc.attacker = *s;
        else
            throw Error(Errc::scenario_invalid, "unknown attacker script: " + att);

        if (const ConfigNode* m = root.child("medium")) {
            sc.medium.p_loss = m->get_double_or("p_loss", 0.0);
            sc.medium.p_dup = m->get_double_or("p_dup", 0.0);
            sc.medium.reorder_window =
                static_cast<std::uint32_t>(m->get_u64_or("reorder_window", 0));
            if (sc.medium.p_loss < 0 || sc.medium.p_loss >= 1 || sc.medium.p_dup < 0 ||
                sc.medium.p_dup >= 1)
                throw Error(Errc::scenario_invalid, "fault probabilities must be in [0,1)");
        }

        std::set<std::string> names;
        std::set<NodeAddress> addrs;
        for (const ConfigNode* n : root.children_named("node")) {
            NodeSpec spec;
            spec.name = n->arg;
            if (spec.name.empty())
                throw Error(Errc::scenario_invalid, "node section needs a name");
            if (!names.insert(spec.name).second)
                throw Error(Errc::scenario_invalid, "duplicate node name: " + spec.name);
            const std::string* addr = n->get("address");
            if (!addr)
                throw Error(Errc::scenario_invalid, "node " + spec.name + " needs an address");
            auto parsed = NodeAddress::parse(*addr);
            if (!parsed)
                throw Error(Errc::scenario_invalid, "bad address: " + *addr);
            spec.address = *parsed;
            if (!addrs.insert(spec.address).second)
                throw Error(Errc::scenario_invalid, "duplicate address: " + spec.address.str());
            spec.cert = n->get_bool_or("cert", false);
            if (const std::string* psk = n->get("psk")) spec.psk_label = *psk;
            sc.nodes.push_back(std::move(spec));
        }
        if (sc.nodes.empty()) throw Error(Errc::scenario_invalid, "scenario has no nodes");

        auto known = [&](const std::string& name) {
            if (!names.count(name))
                throw Error(Errc::scenario_invalid, "unknown node in schedule/expect: " + name);
            return name;
        };

        if (const ConfigNode* sch = root.child("schedule")) {
            for (const auto& [key, value] : sch->entries) {
                auto tok = tokenize(value);
                Command c;
                if (key == "connect" || key == "close") {
                    c.kind = key == "connect" ? Command::Kind::connect : Command::Kind::close;
                    if (tok.size() != 3)
                        throw Error(Errc::scenario_invalid, key + " wants: T FROM TO");
                    c.at = ConfigNode::parse_u64(tok[0], "time");
                    c.from = known(tok[1]);
                    c.to = known(tok[2]);
                } else if (key == "send") {
                    c.kind = Command::Kind::send;
                    if (tok.size() < 5)
                        throw Error(Errc::scenario_invalid,
                                    "send wants: T FROM TO hex|text|random ARG");
                    c.at = ConfigNode::parse_u64(tok[0], "time");
                    c.from = known(tok[1]);
                    c.to = known(tok[2]);
                    if (tok[3] == "hex") {
                        c.payload = from_hex(tok[4]);
                    } else if (tok[3] == "text") {
                        std::string joined;
                        for (std::size_t i = 4; i < tok.size(); ++i) {
                            if (i > 4) joined += ' ';
                            joined += tok[i];
                        }
                        c.payload = to_bytes(joined);
                    } else if (tok[3] == "random") {
                        c.random = true;
                        c.random_size = ConfigNode::parse_u64(tok[4], "size");
                    } else {
                        throw Error(Errc::scenario_invalid, "send payload kind: " + tok[3]);
                    }
                } else {
                    throw Error(Errc::scenario_invalid, "unknown schedule command: " + key);
                }
                if (c.at > sc.duration)
                    throw Error(Errc::scenario_invalid, "command scheduled past duration");
                sc.schedule.push_back(std::move(c));
            }
        }

        if (const ConfigNode* ex = root.child("expect")) {
            for (const auto& [key, value] : ex->entries) {
                auto tok = tokenize(value);
                Expectation e;
                if (key == "established" || key == "failed" || key == "not-established" ||
                    key == "discovered") {
                    if (tok.size() != 2)
                        throw Error(Errc::scenario_invalid, key + " wants: A B");
                    e.kind = key == "established"     ? Expectation::Kind::established
                             : key == "failed"        ? Expectation::Kind::failed
                             : key == "discovered"    ? Expectation::Kind::discovered
                                                      : Expectation::Kind::not_established;
                    e.a = known(tok[0]);
                    e.b = known(tok[1]);
                } else if (key == "delivered") {
                    if (tok.size() != 2)
                        throw Error(Errc::scenario_invalid, "delivered wants: NODE COUNT");
                    e.kind = Expectation::Kind::delivered;
                    e.a = known(tok[0]);
                    e.count = ConfigNode::parse_u64(tok[1], "count");
                } else if (key == "mode") {
                    if (tok.size() != 3)
                        throw Error(Errc::scenario_invalid, "mode wants: A B MODE");
                    e.kind = Expectation::Kind::mode;
                    e.a = known(tok[0]);
                    e.b = known(tok[1]);
                    bool found = false;
                    for (AuthMode m : {AuthMode::mutual_cert, AuthMode::one_way_cert,
                                       AuthMode::preshared_key, AuthMode::no_auth})
                        if (tok[2] == auth_mode_name(m)) {
                            e.mode = m;
                            found = true;
                        }
                    if (!found)
                        throw Error(Errc::scenario_invalid, "unknown mode: " + tok[2]);
                } else {
                    throw Error(Errc::scenario_invalid, "unknown expectation: " + key);
                }
                sc.expectations.push_back(std::move(e));
            }
        }
        return sc;
    }

private:
    static std::vector<std::string> tokenize(const std::string& line) {
        std::vector<std::string> out;
        std::istringstream is(line);
        std::string word;
        while (is >> word) out.push_back(word);
        return out;
    }
};

}  // namespace adhocnet
