#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adhocnet {

enum class Errc {
    // frame transport
    duplicate_address,
    invalid_address,
    oversize_payload,
    source_mismatch,
    detached,
    // reliable ethernet
    message_too_large,
    crc_mismatch,
    inconsistent_frag_count,
    delivery_failed,
    malformed,
    // crypto
    decrypt_failure,
    malformed_key,
    unknown_label,
    // handshake
    missing_credentials,
    bad_certificate,
    unsupported_mode,
    signature_invalid,
    stale_nonce,
    timeout,
    // secure channel
    channel_closed,
    integrity_failure,
    replay_detected,
    // connection manager
    unknown_device,
    handshake_failed,
    not_established,
    // simulator / cli
    scenario_invalid,
    parse_ambiguity,
    io_error,
};

inline std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::duplicate_address: return "DuplicateAddress";
        case Errc::invalid_address: return "InvalidAddress";
        case Errc::oversize_payload: return "OversizePayload";
        case Errc::source_mismatch: return "SourceMismatch";
        case Errc::detached: return "Detached";
        case Errc::message_too_large: return "MessageTooLarge";
        case Errc::crc_mismatch: return "CrcMismatch";
        case Errc::inconsistent_frag_count: return "InconsistentFragCount";
        case Errc::delivery_failed: return "DeliveryFailed";
        case Errc::malformed: return "Malformed";
        case Errc::decrypt_failure: return "DecryptFailure";
        case Errc::malformed_key: return "MalformedKey";
        case Errc::unknown_label: return "UnknownLabel";
        case Errc::missing_credentials: return "MissingCredentials";
        case Errc::bad_certificate: return "BadCertificate";
        case Errc::unsupported_mode: return "UnsupportedMode";
        case Errc::signature_invalid: return "SignatureInvalid";
        case Errc::stale_nonce: return "StaleNonce";
        case Errc::timeout: return "Timeout";
        case Errc::channel_closed: return "ChannelClosed";
        case Errc::integrity_failure: return "IntegrityFailure";
        case Errc::replay_detected: return "ReplayDetected";
        case Errc::unknown_device: return "UnknownDevice";
        case Errc::handshake_failed: return "HandshakeFailed";
        case Errc::not_established: return "NotEstablished";
        case Errc::scenario_invalid: return "ScenarioInvalid";
        case Errc::parse_ambiguity: return "ParseAmbiguity";
        case Errc::io_error: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    explicit Error(Errc code) : std::runtime_error(std::string(errc_name(code))), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

}  // namespace adhocnet
