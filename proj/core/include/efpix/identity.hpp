#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "efpix/bytes.hpp"
#include "efpix/crypto/suite.hpp"

namespace efpix {

struct Contact {
    std::string their_alias;
    Bytes their_public_key;
    std::string my_alias_for_them;

    bool operator==(const Contact&) const = default;
};

// The local "(other alias) -> (public key, my alias)" map plus the node's own
// key pair. Read-mostly: concurrent readers are fine as long as writers are
// externally serialized against them.
class ContactBook {
public:
    ContactBook() = default;
    explicit ContactBook(KeyPair own) : own_(std::move(own)) {}

    const KeyPair& own_keypair() const { return own_; }
    void set_own_keypair(KeyPair own) { own_ = std::move(own); }

    // Throws Error{invalid_alias} or, without replace, Error{duplicate_alias}.
    void add_contact(Contact contact, bool replace = false);

    // nullptr means the alias is unknown and the message is anonymous;
    // never throws.
    const Contact* lookup_sender(std::string_view alias) const;

    std::size_t size() const { return contacts_.size(); }

    // Sorted by alias.
    std::vector<Contact> contacts() const;

private:
    KeyPair own_;
    std::map<std::string, Contact, std::less<>> contacts_;
};

// Keystore file: a JSON document with base64 key blobs, written with
// owner-only permissions. load_book throws Error{not_found} for a missing
// file and Error{keystore_corrupt} for anything unreadable.
void save_book(const ContactBook& book, const std::filesystem::path& path);
ContactBook load_book(const std::filesystem::path& path);

}  // namespace efpix
