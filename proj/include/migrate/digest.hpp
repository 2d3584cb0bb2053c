#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace migrate::digest {

/// Incremental SHA-256 hasher backed by OpenSSL's EVP interface.
class Sha256 {
public:
    Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    ~Sha256();

    void update(std::string_view data);
    /// Finalizes and returns the lowercase hex digest. The hasher must not
    /// be reused afterwards.
    std::string hex_digest();

private:
    void* ctx_;
};

/// One-shot convenience wrapper.
std::string sha256_hex(std::string_view data);

} // namespace migrate::digest
