#pragma once

#include <stdexcept>
#include <string>

namespace efpix {

enum class Errc {
    // crypto
    key_gen_failed,
    invalid_key,
    plaintext_too_long,
    plaintext_too_short,
    sign_failed,
    nonce_exhausted,
    bad_difficulty,
    bad_length,
    // codec
    alias_too_long,
    invalid_alias,
    message_too_long,
    malformed_payload,
    malformed_message,
    unsupported_version,
    malformed_input,
    // identity
    duplicate_alias,
    keystore_corrupt,
    not_found,
    // relay
    unknown_recipient,
    precondition,
    // simulator / config / net
    scenario_error,
    config_error,
    io_error,
    protocol_violation,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace efpix
