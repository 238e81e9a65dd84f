// Command-line node: key and certificate management, a live node on the UDP
// loopback medium (or a solitary in-memory one), secure file transfer between
// processes, and scenario execution with built-in audits.
//
// Exit codes: 0 ok, 1 runtime/assertion failure, 2 unknown device,
// 3 handshake failed, 4 timeout, 5 invalid input.

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "adhocnet/adhocnet.hpp"

namespace an = adhocnet;

namespace {

// First byte of every secure payload: a one-octet application opcode.
constexpr std::uint8_t kAppFile = 0x01;    // followed by file bytes
constexpr std::uint8_t kAppDigest = 0x02;  // followed by sha256 of the file bytes

int exit_code_for(an::Errc c) {
    switch (c) {
        case an::Errc::unknown_device: return 2;
        case an::Errc::handshake_failed: return 3;
        case an::Errc::timeout: return 4;
        case an::Errc::scenario_invalid:
        case an::Errc::malformed:
        case an::Errc::malformed_key:
        case an::Errc::bad_certificate:
        case an::Errc::missing_credentials:
        case an::Errc::unsupported_mode: return 5;
        default: return 1;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw an::Error(an::Errc::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw an::Error(an::Errc::io_error, "cannot write " + path);
    out << text;
    if (!out.flush()) throw an::Error(an::Errc::io_error, "cannot write " + path);
}

std::unique_ptr<an::CryptoProvider> make_provider(const std::string& suite) {
    if (suite == "toy" || suite == an::ToyProvider{}.suite())
        return std::make_unique<an::ToyProvider>();
    if (suite == "default" || suite == an::DefaultProvider{}.suite())
        return std::make_unique<an::DefaultProvider>();
    throw an::Error(an::Errc::scenario_invalid, "unknown crypto suite: " + suite);
}

std::uint64_t pick_seed(std::uint64_t flag) {
    if (flag != 0) return flag;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// --- canonical key/cert file formats (config syntax) ------------------------

struct KeyFile {
    std::string suite;
    an::Bytes public_key;
    an::Bytes private_key;  // may be empty (public-only file)
};

KeyFile load_key_file(const std::string& path) {
    an::ConfigNode root = an::parse_config(read_file(path));
    KeyFile k;
    k.suite = root.get_or("suite", "");
    const std::string* pub = root.get("public");
    if (k.suite.empty() || !pub)
        throw an::Error(an::Errc::malformed_key, path + ": wants `suite` and `public`");
    k.public_key = an::from_hex(*pub);
    if (const std::string* prv = root.get("private")) k.private_key = an::from_hex(*prv);
    return k;
}

std::string render_key_file(const KeyFile& k) {
    std::string out = "suite " + k.suite + "\npublic " + an::to_hex(k.public_key) + "\n";
    if (!k.private_key.empty()) out += "private " + an::to_hex(k.private_key) + "\n";
    return out;
}

an::Certificate load_cert_file(const std::string& path) {
    an::ConfigNode root = an::parse_config(read_file(path));
    const std::string* hex = root.get("certificate");
    if (!hex) throw an::Error(an::Errc::bad_certificate, path + ": wants `certificate`");
    auto cert = an::Certificate::decode(an::from_hex(*hex));
    if (!cert) throw an::Error(an::Errc::bad_certificate, path + ": does not decode");
    return *cert;
}

// --- live node (UDP loopback, or a lone in-memory medium) -------------------

struct LiveConfig {
    std::string name = "node";
    an::NodeAddress address;
    std::string suite = "toy";
    std::optional<KeyFile> keypair;
    std::optional<an::Certificate> cert;
    std::optional<KeyFile> ca;
    std::optional<std::string> psk_label;
    std::uint16_t port = an::kDefaultUdpPort;
    std::string group = an::kDefaultMulticastGroup;
    an::NodePolicy policy;
};

LiveConfig load_live_config(const std::string& path) {
    an::ConfigNode root = an::parse_config(read_file(path));
    LiveConfig c;
    c.name = root.get_or("name", "node");
    const std::string* addr = root.get("address");
    if (!addr) throw an::Error(an::Errc::scenario_invalid, path + ": wants `address`");
    auto parsed = an::NodeAddress::parse(*addr);
    if (!parsed) throw an::Error(an::Errc::scenario_invalid, path + ": bad address " + *addr);
    c.address = *parsed;
    if (const std::string* p = root.get("keypair")) c.keypair = load_key_file(*p);
    if (const std::string* p = root.get("certificate")) c.cert = load_cert_file(*p);
    if (const std::string* p = root.get("ca")) c.ca = load_key_file(*p);
    if (const std::string* p = root.get("psk")) c.psk_label = *p;
    c.suite = root.get_or("suite", c.keypair ? c.keypair->suite : (c.ca ? c.ca->suite : "toy"));
    c.port = static_cast<std::uint16_t>(root.get_u64_or("port", c.port));
    c.group = root.get_or("group", c.group);
    c.policy.beacon_interval = root.get_u64_or("beacon_interval", c.policy.beacon_interval);
    if (c.cert) {
        if (!(c.cert->subject_addr == c.address))
            throw an::Error(an::Errc::scenario_invalid,
                            path + ": certificate subject does not match `address`");
        if (!c.keypair || c.keypair->private_key.empty())
            throw an::Error(an::Errc::scenario_invalid,
                            path + ": certificate without a private keypair");
    }
    return c;
}

class LiveNode {
public:
    LiveNode(const LiveConfig& cfg, const std::string& transport, std::uint64_t seed, bool verbose)
        : verbose_(verbose) {
        provider_ = make_provider(cfg.suite);
        an::Identity id;
        id.name = cfg.name;
        if (cfg.ca) id.ca_public = cfg.ca->public_key;
        if (cfg.cert) {
            id.cert = cfg.cert;
            id.private_key = cfg.keypair->private_key;
        }
        if (cfg.psk_label) {
            id.psk = an::psk_from_label(*cfg.psk_label);
            id.psk_id = *cfg.psk_label;
        }
        node_ = std::make_unique<an::Node>(cfg.address, std::move(id), *provider_,
                                           an::SplitMix64(seed), cfg.policy);
        node_->trace = [this](an::VirtualTime t, std::string_view kind, const std::string& d) {
            if (verbose_) std::cerr << "t=" << t << " " << kind << " " << d << "\n";
        };
        if (transport == "udp") {
            udp_ = std::make_unique<an::UdpMedium>(cfg.address, cfg.port, cfg.group);
        } else if (transport == "sim") {
            sim_ = std::make_unique<an::SimMedium>();
            sim_ep_ = sim_->attach(cfg.address);
        } else {
            throw an::Error(an::Errc::scenario_invalid, "unknown transport: " + transport);
        }
        start_ = std::chrono::steady_clock::now();
    }

    an::Node& node() { return *node_; }

    an::VirtualTime now() const {
        return static_cast<an::VirtualTime>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                std::chrono::steady_clock::now() - start_)
                                                .count());
    }

    // One poll/tick/flush cycle; sleeps in the socket poll up to wait_ms (or
    // the node's next deadline, whichever is sooner). Events land in events.
    std::deque<an::NodeEvent> events;

    void pump(int wait_ms = 50) {
        an::VirtualTime t = now();
        if (auto w = node_->next_wakeup(); w && *w > t)
            wait_ms = static_cast<int>(std::min<an::VirtualTime>(*w - t, wait_ms));
        if (udp_) {
            if (auto f = udp_->poll(wait_ms)) node_->on_frame(*f, now());
        } else {
            sim_->advance_to(t);
            if (auto f = sim_ep_->poll(t, t)) node_->on_frame(*f, t);
        }
        an::VirtualTime t2 = now();
        node_->on_tick(t2);
        for (const an::Frame& f : node_->take_frames()) {
            if (udp_)
                udp_->send(f);
            else
                sim_ep_->send(f);
        }
        for (an::NodeEvent& ev : node_->take_events()) events.push_back(std::move(ev));
        if (!udp_) {  // nothing will ever arrive; do not busy-spin
            std::this_thread::sleep_for(std::chrono::milliseconds(wait_ms));
        }
    }

private:
    bool verbose_;
    std::unique_ptr<an::CryptoProvider> provider_;
    std::unique_ptr<an::Node> node_;
    std::unique_ptr<an::UdpMedium> udp_;
    std::unique_ptr<an::SimMedium> sim_;
    std::unique_ptr<an::SimEndpoint> sim_ep_;
    std::chrono::steady_clock::time_point start_;
};

// --- subcommands -------------------------------------------------------------

int cmd_keygen(const std::string& suite, std::uint64_t seed, const std::string& out,
               const std::string& public_out) {
    auto provider = make_provider(suite);
    an::SplitMix64 rng(pick_seed(seed));
    an::KeyPair kp = provider->generate_keypair(rng);
    KeyFile k{std::string(provider->suite()), kp.public_key, kp.private_key};
    write_file(out, render_key_file(k));
    std::cout << "keypair " << out << " suite " << k.suite << "\n";
    if (!public_out.empty()) {
        write_file(public_out, render_key_file(KeyFile{k.suite, k.public_key, {}}));
        std::cout << "public " << public_out << "\n";
    }
    return 0;
}

int cmd_cert_issue(const std::string& ca_path, const std::string& subject_path,
                   const std::string& address, const std::string& name, std::uint64_t serial,
                   const std::string& out) {
    KeyFile ca = load_key_file(ca_path);
    if (ca.private_key.empty())
        throw an::Error(an::Errc::malformed_key, ca_path + ": CA file has no private key");
    KeyFile subject = load_key_file(subject_path);
    if (subject.suite != ca.suite)
        throw an::Error(an::Errc::malformed_key, "CA and subject use different suites");
    auto addr = an::NodeAddress::parse(address);
    if (!addr) throw an::Error(an::Errc::scenario_invalid, "bad address: " + address);
    auto provider = make_provider(ca.suite);
    an::Certificate cert = an::issue_certificate(*provider, ca.private_key, *addr, name,
                                                 subject.public_key, serial);
    write_file(out, "certificate " + an::to_hex(cert.encode()) + "\n");
    std::cout << "certificate " << out << " subject " << addr->str() << " serial " << serial
              << "\n";
    return 0;
}

int cmd_cert_verify(const std::string& ca_pub_path, const std::string& cert_path) {
    KeyFile ca = load_key_file(ca_pub_path);
    an::Certificate cert = load_cert_file(cert_path);
    auto provider = make_provider(ca.suite);
    bool ok = an::verify_certificate(*provider, ca.public_key, cert);
    std::cout << "verify " << (ok ? "ok" : "rejected") << " subject " << cert.subject_addr.str()
              << " name " << cert.subject_name << "\n";
    return ok ? 0 : 1;
}

int cmd_run(const std::string& config, const std::string& transport, std::uint64_t seed,
            an::VirtualTime duration_ms, bool verbose) {
    LiveConfig cfg = load_live_config(config);
    LiveNode live(cfg, transport, pick_seed(seed), verbose);
    std::cout << "running " << cfg.name << " " << cfg.address.str() << " transport " << transport
              << "\n"
              << std::flush;
    while (duration_ms == 0 || live.now() < duration_ms) {
        live.pump();
        while (!live.events.empty()) {
            an::NodeEvent ev = std::move(live.events.front());
            live.events.pop_front();
            switch (ev.kind) {
                case an::NodeEvent::Kind::device_discovered:
                    std::cout << "discovered " << ev.peer.str() << " " << ev.name << "\n"
                              << std::flush;
                    break;
                case an::NodeEvent::Kind::connection_established:
                    std::cout << "established conn " << ev.conn_id << " peer " << ev.peer.str()
                              << " mode " << an::auth_mode_name(ev.mode) << "\n"
                              << std::flush;
                    break;
                case an::NodeEvent::Kind::data: {
                    if (ev.data.empty()) break;
                    if (ev.data[0] == kAppFile) {
                        an::ByteView body(ev.data.data() + 1, ev.data.size() - 1);
                        an::Digest d = an::sha256(body);
                        std::cout << "file conn " << ev.conn_id << " bytes " << body.size()
                                  << " sha256 " << an::to_hex(an::digest_view(d)) << "\n"
                                  << std::flush;
                        an::Bytes reply;
                        reply.push_back(kAppDigest);
                        reply.insert(reply.end(), d.begin(), d.end());
                        try {
                            live.node().send_secure(ev.conn_id, reply, live.now());
                        } catch (const an::Error& e) {
                            std::cerr << "digest reply failed: " << e.what() << "\n";
                        }
                    }
                    break;
                }
                case an::NodeEvent::Kind::connection_failed:
                    std::cout << "failed conn " << ev.conn_id << " cause "
                              << an::errc_name(ev.cause) << "\n"
                              << std::flush;
                    break;
                case an::NodeEvent::Kind::connection_closed:
                    std::cout << "closed conn " << ev.conn_id << "\n" << std::flush;
                    break;
                default:
                    break;
            }
        }
    }
    return 0;
}

int cmd_peers(const std::string& config, const std::string& transport, std::uint64_t seed,
              an::VirtualTime wait_ms, bool verbose) {
    LiveConfig cfg = load_live_config(config);
    LiveNode live(cfg, transport, pick_seed(seed), verbose);
    while (live.now() < wait_ms) live.pump();
    for (const auto& [addr, dev] : live.node().devices())
        std::cout << "peer " << addr.str() << " " << dev.name << " modes "
                  << static_cast<unsigned>(dev.modes) << " "
                  << (dev.state == an::DeviceState::discovered ? "discovered" : "stale") << "\n";
    return 0;
}

int cmd_send(const std::string& config, const std::string& transport, std::uint64_t seed,
             const std::string& peer, const std::string& file, an::VirtualTime wait_ms,
             bool verbose) {
    auto addr = an::NodeAddress::parse(peer);
    if (!addr) throw an::Error(an::Errc::scenario_invalid, "bad peer address: " + peer);
    std::string body = read_file(file);
    an::Bytes payload;
    payload.push_back(kAppFile);
    payload.insert(payload.end(), body.begin(), body.end());
    an::Digest local = an::sha256(an::ByteView(payload.data() + 1, payload.size() - 1));
    std::cout << "local sha256 " << an::to_hex(an::digest_view(local)) << "\n" << std::flush;

    LiveConfig cfg = load_live_config(config);
    LiveNode live(cfg, transport, pick_seed(seed), verbose);

    // 1. discover the peer
    while (!live.node().devices().count(*addr)) {
        if (live.now() >= wait_ms)
            throw an::Error(an::Errc::unknown_device, "peer never discovered: " + peer);
        live.pump();
    }
    // 2. connect (strongest mutual mode)
    std::uint32_t conn = live.node().connect(*addr, live.now());
    bool established = false;
    while (!established) {
        if (live.now() >= wait_ms) throw an::Error(an::Errc::timeout, "handshake still pending");
        live.pump();
        for (auto& ev : live.events) {
            if (ev.kind == an::NodeEvent::Kind::connection_established && ev.conn_id == conn)
                established = true;
            if (ev.kind == an::NodeEvent::Kind::connection_failed && ev.conn_id == conn)
                throw an::Error(an::Errc::handshake_failed,
                                std::string(an::errc_name(ev.cause)));
        }
        live.events.clear();
    }
    const an::Connection* c = live.node().connection(conn);
    std::cout << "established mode " << an::auth_mode_name(c->mode) << "\n" << std::flush;
    // 3. ship the file and wait for the receiver's digest
    live.node().send_secure(conn, payload, live.now());
    for (;;) {
        if (live.now() >= wait_ms) throw an::Error(an::Errc::timeout, "no digest reply");
        live.pump();
        for (auto& ev : live.events) {
            if (ev.kind == an::NodeEvent::Kind::connection_failed && ev.conn_id == conn)
                throw an::Error(an::Errc::handshake_failed, "connection failed mid-transfer");
            if (ev.kind != an::NodeEvent::Kind::data || ev.conn_id != conn || ev.data.empty() ||
                ev.data[0] != kAppDigest)
                continue;
            an::Bytes remote(ev.data.begin() + 1, ev.data.end());
            std::cout << "remote sha256 " << an::to_hex(remote) << "\n";
            bool match = remote.size() == local.size() &&
                         std::equal(remote.begin(), remote.end(), local.begin());
            std::cout << "transfer " << (match ? "ok" : "digest-mismatch") << " bytes "
                      << body.size() << "\n";
            return match ? 0 : 1;
        }
        live.events.clear();
    }
}

int cmd_scenario(const std::string& path, std::uint64_t seed_override,
                 const std::string& trace_out, bool verbose) {
    an::Scenario sc = an::Scenario::parse_text(read_file(path));
    if (seed_override != 0) sc.seed = seed_override;
    an::SimResult res = an::Simulator(sc).run();
    if (!trace_out.empty()) write_file(trace_out, res.trace.render());
    if (verbose) std::cerr << res.trace.render();
    const an::Verdicts& v = res.verdicts;
    std::cout << "sessions " << v.established_pairs << "\n";
    std::cout << "deliveries " << res.deliveries.size() << "\n";
    std::cout << "verdict agreement " << (v.agreement_ok ? "ok" : "VIOLATED") << "\n";
    std::cout << "verdict secrecy " << (v.secrecy_ok ? "ok" : "VIOLATED") << "\n";
    std::cout << "verdict expectations " << (v.expectations_ok ? "ok" : "FAILED") << "\n";
    for (const auto& f : v.agreement_failures) std::cout << "agreement-failure " << f << "\n";
    for (const auto& f : v.secrecy_failures) std::cout << "secrecy-failure " << f << "\n";
    for (const auto& f : v.expectation_failures) std::cout << "expectation-failure " << f << "\n";
    return v.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"secure ad-hoc network node"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("--verbose", verbose, "trace to stderr");

    std::string suite = "toy", out, public_out;
    std::uint64_t seed = 0;
    auto* keygen = app.add_subcommand("keygen", "generate a keypair file");
    keygen->add_option("--suite", suite, "toy | default")->capture_default_str();
    keygen->add_option("--seed", seed, "deterministic seed (toy suite)");
    keygen->add_option("--out", out, "keypair file")->required();
    keygen->add_option("--public-out", public_out, "also write a public-only file");

    std::string ca_path, subject_path, address, name = "node", cert_path;
    std::uint64_t serial = 1;
    auto* cert = app.add_subcommand("cert", "certificate operations");
    cert->require_subcommand(1);
    auto* issue = cert->add_subcommand("issue", "issue a certificate");
    issue->add_option("--ca", ca_path, "CA keypair file (with private key)")->required();
    issue->add_option("--subject", subject_path, "subject keypair file")->required();
    issue->add_option("--address", address, "subject link address")->required();
    issue->add_option("--name", name, "subject display name")->capture_default_str();
    issue->add_option("--serial", serial, "certificate serial")->capture_default_str();
    issue->add_option("--out", out, "certificate file")->required();
    auto* verify = cert->add_subcommand("verify", "verify a certificate");
    verify->add_option("--ca", ca_path, "CA public key file")->required();
    verify->add_option("--cert", cert_path, "certificate file")->required();

    std::string config, transport = "udp", peer, file, trace_out, scenario_path;
    std::uint64_t duration = 0, wait = 8000;
    auto* run = app.add_subcommand("run", "run a node until --duration elapses (0 = forever)");
    run->add_option("--config", config, "node config file")->required();
    run->add_option("--transport", transport, "udp | sim")->capture_default_str();
    run->add_option("--seed", seed, "rng seed");
    run->add_option("--duration", duration, "stop after this many ms");

    auto* peers = app.add_subcommand("peers", "listen for beacons, print the device table");
    peers->add_option("--config", config, "node config file")->required();
    peers->add_option("--transport", transport, "udp | sim")->capture_default_str();
    peers->add_option("--seed", seed, "rng seed");
    peers->add_option("--wait", wait, "listen time in ms")->capture_default_str();

    auto* send = app.add_subcommand("send", "send a file over a secure connection");
    send->add_option("--config", config, "node config file")->required();
    send->add_option("--transport", transport, "udp | sim")->capture_default_str();
    send->add_option("--seed", seed, "rng seed");
    send->add_option("--peer", peer, "destination link address")->required();
    send->add_option("--file", file, "file to send")->required();
    send->add_option("--wait", wait, "overall deadline in ms")->capture_default_str();

    auto* scenario = app.add_subcommand("scenario", "run a scenario file with audits");
    scenario->add_option("path", scenario_path, "scenario file")->required();
    scenario->add_option("--seed", seed, "override the scenario seed");
    scenario->add_option("--trace-out", trace_out, "write the event trace here");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*keygen) return cmd_keygen(suite, seed, out, public_out);
        if (*issue) return cmd_cert_issue(ca_path, subject_path, address, name, serial, out);
        if (*verify) return cmd_cert_verify(ca_path, cert_path);
        if (*run) return cmd_run(config, transport, seed, duration, verbose);
        if (*peers) return cmd_peers(config, transport, seed, wait, verbose);
        if (*send) return cmd_send(config, transport, seed, peer, file, wait, verbose);
        if (*scenario) return cmd_scenario(scenario_path, seed, trace_out, verbose);
    } catch (const an::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
