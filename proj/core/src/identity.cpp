#include "efpix/identity.hpp"

#include <fstream>
#include <json.hpp>

#include "efpix/codec.hpp"
#include "efpix/error.hpp"

namespace efpix {

namespace {
constexpr const char* kFormatTag = "efpix-keystore";
constexpr int kFormatVersion = 1;
}  // namespace

void ContactBook::add_contact(Contact contact, bool replace) {
    if (!valid_alias(contact.their_alias)) {
        raise(Errc::invalid_alias, "contact alias '" + contact.their_alias + "'");
    }
    if (!valid_alias(contact.my_alias_for_them)) {
        raise(Errc::invalid_alias, "own alias '" + contact.my_alias_for_them + "'");
    }
    auto it = contacts_.find(contact.their_alias);
    if (it != contacts_.end() && !replace) {
        raise(Errc::duplicate_alias, "contact '" + contact.their_alias + "' already exists");
    }
    contacts_.insert_or_assign(contact.their_alias, std::move(contact));
}

const Contact* ContactBook::lookup_sender(std::string_view alias) const {
    auto it = contacts_.find(alias);
    return it == contacts_.end() ? nullptr : &it->second;
}

std::vector<Contact> ContactBook::contacts() const {
    std::vector<Contact> out;
    out.reserve(contacts_.size());
    for (const auto& [alias, contact] : contacts_) out.push_back(contact);
    return out;
}

void save_book(const ContactBook& book, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["format"] = kFormatTag;
    doc["version"] = kFormatVersion;
    doc["suite"] = suite_name(book.own_keypair().suite);
    doc["own"] = {
        {"public_key", base64_encode(as_span(book.own_keypair().public_key))},
        {"private_key", base64_encode(as_span(book.own_keypair().private_key))},
    };
    auto contacts = nlohmann::ordered_json::array();
    for (const Contact& c : book.contacts()) {
        contacts.push_back({
            {"alias", c.their_alias},
            {"public_key", base64_encode(as_span(c.their_public_key))},
            {"my_alias", c.my_alias_for_them},
        });
    }
    doc["contacts"] = std::move(contacts);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io_error, "cannot write keystore " + path.string());
    out << doc.dump(2) << '\n';
    out.close();
    if (!out) raise(Errc::io_error, "short write to keystore " + path.string());

    std::error_code ec;
    std::filesystem::permissions(path,
                                 std::filesystem::perms::owner_read |
                                     std::filesystem::perms::owner_write,
                                 std::filesystem::perm_options::replace, ec);
}

ContactBook load_book(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        raise(Errc::not_found, "keystore " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::not_found, "keystore " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    try {
        nlohmann::json doc = nlohmann::json::parse(text);
        if (doc.at("format").get<std::string>() != kFormatTag ||
            doc.at("version").get<int>() != kFormatVersion) {
            raise(Errc::keystore_corrupt, "unrecognized keystore format");
        }
        KeyPair own;
        own.suite = suite_from_name(doc.at("suite").get<std::string>());
        own.public_key = base64_decode(doc.at("own").at("public_key").get<std::string>());
        own.private_key = base64_decode(doc.at("own").at("private_key").get<std::string>());
        ContactBook book(std::move(own));
        for (const auto& c : doc.at("contacts")) {
            book.add_contact(Contact{
                c.at("alias").get<std::string>(),
                base64_decode(c.at("public_key").get<std::string>()),
                c.at("my_alias").get<std::string>(),
            });
        }
        return book;
    } catch (const Error& e) {
        if (e.code() == Errc::keystore_corrupt) throw;
        raise(Errc::keystore_corrupt, path.string() + ": " + e.what());
    } catch (const std::exception& e) {
        raise(Errc::keystore_corrupt, path.string() + ": " + e.what());
    }
}

}  // namespace efpix
