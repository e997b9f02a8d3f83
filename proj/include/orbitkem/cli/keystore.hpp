#pragma once

// Key-management scaling: pre-shared pairwise symmetric keys versus one KEM keypair per node.

#include <cstdint>
#include <limits>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/kem/params.hpp"

namespace orbitkem::cli {

inline constexpr std::uint64_t kSymmetricKeyBytes = 32;
inline constexpr std::uint64_t kKeypairBytes = kem::kPublicKeyBytes + kem::kSecretKeyBytes;  // 2432

class KeystoreError : public Error {
public:
    using Error::Error;
};

struct KeystoreRow {
    std::uint64_t n = 0;
    std::uint64_t pairwise_keys = 0;          // n(n-1)/2 distinct shared keys
    std::uint64_t symmetric_storage_bytes = 0;  // one copy of every pairwise key
    std::uint64_t keypairs = 0;               // one per node
    std::uint64_t pk_keys = 0;                // public + secret halves
    std::uint64_t pk_storage_bytes = 0;

    friend bool operator==(const KeystoreRow&, const KeystoreRow&) = default;
};

inline KeystoreRow keystore(std::uint64_t n) {
    if (n == 0) throw KeystoreError("keystore: need at least one node");
    if (n > (std::uint64_t{1} << 31)) throw KeystoreError("keystore: node count too large");
    KeystoreRow r;
    r.n = n;
    r.pairwise_keys = n * (n - 1) / 2;
    r.symmetric_storage_bytes = r.pairwise_keys * kSymmetricKeyBytes;
    r.keypairs = n;
    r.pk_keys = 2 * n;
    r.pk_storage_bytes = n * kKeypairBytes;
    return r;
}

} // namespace orbitkem::cli
