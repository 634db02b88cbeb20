#pragma once

#include <sodium.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <vector>

#include "stash_shuffle/errors.hpp"
#include "stash_shuffle/record.hpp"
#include "stash_shuffle/rng.hpp"

namespace stashshuffle {

/// Fixed-size encrypted record. Real and dummy records encrypt to the same
/// length, which is the whole point: the adversary sees only sizes and
/// addresses.
struct Ciphertext {
    std::vector<std::uint8_t> bytes;

    bool operator==(const Ciphertext&) const = default;
};

namespace detail {
inline void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw IoError("libsodium initialization failed");
}
}  // namespace detail

// Plaintext layout: [dummy flag (1)] [tag (8, LE)] [payload (P)].
inline constexpr std::size_t kPlainHeader = 9;
inline constexpr std::size_t kEncOverhead = kPlainHeader +
                                            crypto_aead_xchacha20poly1305_ietf_NPUBBYTES +
                                            crypto_aead_xchacha20poly1305_ietf_ABYTES;

inline std::size_t ciphertext_size(std::size_t payload_size) { return payload_size + kEncOverhead; }

/// Authenticated encryption for one array (one key, its own nonce sequence).
/// Nonces are a random 16-byte prefix plus a counter, so every call is fresh
/// and a run is reproducible from its seed.
class Cipher {
  public:
    Cipher(StreamRng key_rng, StreamRng nonce_rng) {
        detail::ensure_sodium();
        key_rng.fill_bytes(key_.data(), key_.size());
        nonce_rng.fill_bytes(nonce_prefix_.data(), nonce_prefix_.size());
    }

    Ciphertext encrypt(const Record& record, std::size_t payload_size) {
        if (record.payload.size() != payload_size)
            throw IoError("record payload does not match the configured payload size");
        std::vector<std::uint8_t> plain(kPlainHeader + payload_size);
        plain[0] = record.dummy ? 1 : 0;
        for (int i = 0; i < 8; ++i) plain[1 + i] = static_cast<std::uint8_t>(record.tag >> (8 * i));
        std::memcpy(plain.data() + kPlainHeader, record.payload.data(), payload_size);

        std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_NPUBBYTES> nonce{};
        std::memcpy(nonce.data(), nonce_prefix_.data(), nonce_prefix_.size());
        const std::uint64_t ctr = counter_++;
        for (int i = 0; i < 8; ++i)
            nonce[nonce_prefix_.size() + i] = static_cast<std::uint8_t>(ctr >> (8 * i));

        Ciphertext out;
        out.bytes.resize(nonce.size() + plain.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
        std::memcpy(out.bytes.data(), nonce.data(), nonce.size());
        unsigned long long clen = 0;
        crypto_aead_xchacha20poly1305_ietf_encrypt(out.bytes.data() + nonce.size(), &clen,
                                                   plain.data(), plain.size(), nullptr, 0, nullptr,
                                                   nonce.data(), key_.data());
        return out;
    }

    Record decrypt(const Ciphertext& ct, std::size_t payload_size) const {
        const std::size_t expect = ciphertext_size(payload_size);
        if (ct.bytes.size() != expect) throw IntegrityError("ciphertext has unexpected length");
        const std::uint8_t* nonce = ct.bytes.data();
        const std::uint8_t* body = ct.bytes.data() + crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
        const std::size_t body_len = ct.bytes.size() - crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;

        std::vector<std::uint8_t> plain(kPlainHeader + payload_size);
        unsigned long long plen = 0;
        if (crypto_aead_xchacha20poly1305_ietf_decrypt(plain.data(), &plen, nullptr, body, body_len,
                                                       nullptr, 0, nonce, key_.data()) != 0)
            throw IntegrityError("ciphertext failed authentication");

        Record r;
        r.dummy = plain[0] != 0;
        r.tag = 0;
        for (int i = 0; i < 8; ++i) r.tag |= static_cast<std::uint64_t>(plain[1 + i]) << (8 * i);
        r.payload.assign(plain.begin() + kPlainHeader, plain.end());
        return r;
    }

  private:
    std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_KEYBYTES> key_{};
    std::array<std::uint8_t, 16> nonce_prefix_{};
    std::uint64_t counter_ = 0;
};

/// One cipher per untrusted array, with distinct keys and nonce domains so mid
/// and out ciphertexts of the same record never correlate.
struct Keychain {
    Cipher in;
    Cipher mid;
    Cipher out;

    static Keychain derive(const RngSuite& rngs) {
        return Keychain{
            Cipher(rngs.stream(Stream::KeyMaterial, 0), rngs.stream(Stream::NoncePrefix, 0)),
            Cipher(rngs.stream(Stream::KeyMaterial, 1), rngs.stream(Stream::NoncePrefix, 1)),
            Cipher(rngs.stream(Stream::KeyMaterial, 2), rngs.stream(Stream::NoncePrefix, 2)),
        };
    }
};

}  // namespace stashshuffle
