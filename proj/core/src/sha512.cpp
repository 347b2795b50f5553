#include "efpix/crypto/sha512.hpp"

#include <openssl/evp.h>

#include "efpix/error.hpp"

namespace efpix {

Hash64 sha512(ByteSpan data) { return sha512({data}); }

Hash64 sha512(std::initializer_list<ByteSpan> parts) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) raise(Errc::io_error, "EVP_MD_CTX_new");
    Hash64 out{};
    unsigned int len = 0;
    int ok = EVP_DigestInit_ex(ctx, EVP_sha512(), nullptr);
    for (ByteSpan p : parts) {
        if (ok != 1) break;
        ok = EVP_DigestUpdate(ctx, p.data(), p.size());
    }
    if (ok == 1) ok = EVP_DigestFinal_ex(ctx, out.data(), &len);
    EVP_MD_CTX_free(ctx);
    if (ok != 1 || len != out.size()) raise(Errc::io_error, "SHA-512 failed");
    return out;
}

}  // namespace efpix
