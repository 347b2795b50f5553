#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "efpix/bytes.hpp"
#include "efpix/error.hpp"
#include "efpix/rng.hpp"

namespace efpix::test {

inline std::filesystem::path fixtures_dir() { return std::filesystem::path(EFPIX_FIXTURES_DIR); }

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::not_found, "fixture " + path.string());
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline Seed32 seed_of(std::uint8_t fill) {
    Seed32 s{};
    s.fill(fill);
    return s;
}

inline Bytes random_bytes(Rng& rng, std::size_t n) {
    Bytes out(n);
    rng.fill(out);
    return out;
}

// Unique scratch directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        dir_ = std::filesystem::temp_directory_path() /
               ("efpix-test-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
};

}  // namespace efpix::test
