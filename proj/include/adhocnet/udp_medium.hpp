#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>
#include <string>

#include "adhocnet/frame.hpp"

namespace adhocnet {

constexpr const char* kDefaultMulticastGroup = "239.77.77.1";
constexpr std::uint16_t kDefaultUdpPort = 47474;

// Live shared-medium emulation over UDP multicast: every frame (unicast or
// broadcast alike) goes to the group and every process on the host sees it,
// like stations sharing a radio channel. The receive path filters the
// sender's own multicast echo and frames addressed to other stations, so the
// node above observes exactly what a real interface would deliver.
class UdpMedium {
public:
    explicit UdpMedium(NodeAddress self, std::uint16_t port = kDefaultUdpPort,
                       const std::string& group = kDefaultMulticastGroup)
        : self_(self) {
        fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd_ < 0) throw Error(Errc::io_error, std::string("socket: ") + std::strerror(errno));
        try {
            int one = 1;
            if (::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one)) < 0)
                throw Error(Errc::io_error, "SO_REUSEADDR");
#ifdef SO_REUSEPORT
            ::setsockopt(fd_, SOL_SOCKET, SO_REUSEPORT, &one, sizeof(one));
#endif
            int buf = 1 << 20;  // absorb bursts while the process is busy
            ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof(buf));

            sockaddr_in local{};
            local.sin_family = AF_INET;
            local.sin_addr.s_addr = htonl(INADDR_ANY);
            local.sin_port = htons(port);
            if (::bind(fd_, reinterpret_cast<sockaddr*>(&local), sizeof(local)) < 0)
                throw Error(Errc::io_error, std::string("bind: ") + std::strerror(errno));

            in_addr iface{};
            iface.s_addr = htonl(INADDR_LOOPBACK);
            ip_mreq mreq{};
            if (::inet_pton(AF_INET, group.c_str(), &mreq.imr_multiaddr) != 1)
                throw Error(Errc::io_error, "bad multicast group: " + group);
            mreq.imr_interface = iface;
            if (::setsockopt(fd_, IPPROTO_IP, IP_ADD_MEMBERSHIP, &mreq, sizeof(mreq)) < 0)
                throw Error(Errc::io_error,
                            std::string("IP_ADD_MEMBERSHIP: ") + std::strerror(errno));
            if (::setsockopt(fd_, IPPROTO_IP, IP_MULTICAST_IF, &iface, sizeof(iface)) < 0)
                throw Error(Errc::io_error, "IP_MULTICAST_IF");
            unsigned char loop = 1;
            ::setsockopt(fd_, IPPROTO_IP, IP_MULTICAST_LOOP, &loop, sizeof(loop));

            dest_ = {};
            dest_.sin_family = AF_INET;
            dest_.sin_port = htons(port);
            if (::inet_pton(AF_INET, group.c_str(), &dest_.sin_addr) != 1)
                throw Error(Errc::io_error, "bad multicast group: " + group);
        } catch (...) {
            ::close(fd_);
            throw;
        }
    }

    ~UdpMedium() {
        if (fd_ >= 0) ::close(fd_);
    }

    UdpMedium(const UdpMedium&) = delete;
    UdpMedium& operator=(const UdpMedium&) = delete;

    NodeAddress self() const { return self_; }

    void send(const Frame& frame) {
        frame.validate();
        Bytes wire = frame.encode();
        ssize_t n = ::sendto(fd_, wire.data(), wire.size(), 0,
                             reinterpret_cast<const sockaddr*>(&dest_), sizeof(dest_));
        if (n < 0 || static_cast<std::size_t>(n) != wire.size())
            throw Error(Errc::io_error, std::string("sendto: ") + std::strerror(errno));
    }

    // Next frame addressed to this station (or broadcast), waiting up to
    // timeout_ms. Own echoes, foreign unicast and undecodable datagrams are
    // skipped silently without consuming the full timeout.
    std::optional<Frame> poll(int timeout_ms) {
        for (;;) {
            pollfd p{fd_, POLLIN, 0};
            int r = ::poll(&p, 1, timeout_ms);
            if (r < 0) {
                if (errno == EINTR) continue;
                throw Error(Errc::io_error, std::string("poll: ") + std::strerror(errno));
            }
            if (r == 0) return std::nullopt;
            std::uint8_t buf[2048];
            ssize_t n = ::recvfrom(fd_, buf, sizeof(buf), 0, nullptr, nullptr);
            if (n < 0) {
                if (errno == EINTR || errno == EAGAIN) continue;
                throw Error(Errc::io_error, std::string("recvfrom: ") + std::strerror(errno));
            }
            auto f = Frame::decode(ByteView(buf, static_cast<std::size_t>(n)));
            if (!f) continue;
            if (f->src == self_) continue;  // our own multicast echo
            if (!f->dest.is_broadcast() && f->dest != self_) continue;
            return f;
            // Note: timeout_ms is an upper bound per call; skipped datagrams
            // re-enter poll() with the same budget, which is fine for a
            // driver loop that recomputes its deadline each iteration.
        }
    }

    int fd() const { return fd_; }

private:
    NodeAddress self_;
    int fd_ = -1;
    sockaddr_in dest_{};
};

}  // namespace adhocnet
