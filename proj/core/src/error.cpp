#include "efpix/error.hpp"

namespace efpix {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::key_gen_failed: return "key_gen_failed";
        case Errc::invalid_key: return "invalid_key";
        case Errc::plaintext_too_long: return "plaintext_too_long";
        case Errc::plaintext_too_short: return "plaintext_too_short";
        case Errc::sign_failed: return "sign_failed";
        case Errc::nonce_exhausted: return "nonce_exhausted";
        case Errc::bad_difficulty: return "bad_difficulty";
        case Errc::bad_length: return "bad_length";
        case Errc::alias_too_long: return "alias_too_long";
        case Errc::invalid_alias: return "invalid_alias";
        case Errc::message_too_long: return "message_too_long";
        case Errc::malformed_payload: return "malformed_payload";
        case Errc::malformed_message: return "malformed_message";
        case Errc::unsupported_version: return "unsupported_version";
        case Errc::malformed_input: return "malformed_input";
        case Errc::duplicate_alias: return "duplicate_alias";
        case Errc::keystore_corrupt: return "keystore_corrupt";
        case Errc::not_found: return "not_found";
        case Errc::unknown_recipient: return "unknown_recipient";
        case Errc::precondition: return "precondition";
        case Errc::scenario_error: return "scenario_error";
        case Errc::config_error: return "config_error";
        case Errc::io_error: return "io_error";
        case Errc::protocol_violation: return "protocol_violation";
    }
    return "unknown";
}

}  // namespace efpix
