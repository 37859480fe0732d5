#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>

namespace debtlab {

// Self-contained SHA-256 so report digests do not depend on a crypto library.
class Sha256 {
  public:
    Sha256() { reset(); }

    void reset() {
        h_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
              0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
        len_ = 0;
        buf_used_ = 0;
    }

    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        len_ += n;
        while (n > 0) {
            std::size_t take = 64 - buf_used_;
            if (take > n) take = n;
            std::memcpy(buf_.data() + buf_used_, p, take);
            buf_used_ += take;
            p += take;
            n -= take;
            if (buf_used_ == 64) {
                compress(buf_.data());
                buf_used_ = 0;
            }
        }
    }

    void update(const std::string& s) { update(s.data(), s.size()); }

    std::string hex_digest() {
        std::uint64_t bits = len_ * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (buf_used_ != 56) update(&zero, 1);
        unsigned char lenb[8];
        for (int k = 0; k < 8; ++k) lenb[k] = static_cast<unsigned char>(bits >> (56 - 8 * k));
        update(lenb, 8);
        static const char* hex = "0123456789abcdef";
        std::string out(64, '0');
        for (int w = 0; w < 8; ++w)
            for (int b = 0; b < 4; ++b) {
                unsigned char byte = static_cast<unsigned char>(h_[w] >> (24 - 8 * b));
                out[static_cast<std::size_t>(w * 8 + b * 2)] = hex[byte >> 4];
                out[static_cast<std::size_t>(w * 8 + b * 2 + 1)] = hex[byte & 0xf];
            }
        return out;
    }

  private:
    static std::uint32_t rotr(std::uint32_t x, int s) { return (x >> s) | (x << (32 - s)); }

    void compress(const unsigned char* block) {
        static constexpr std::array<std::uint32_t, 64> K = {
            0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
            0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
            0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
            0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
            0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
            0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
            0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
            0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
            0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
            0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
            0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};
        std::uint32_t w[64];
        for (int t = 0; t < 16; ++t)
            w[t] = (static_cast<std::uint32_t>(block[t * 4]) << 24) |
                   (static_cast<std::uint32_t>(block[t * 4 + 1]) << 16) |
                   (static_cast<std::uint32_t>(block[t * 4 + 2]) << 8) |
                   static_cast<std::uint32_t>(block[t * 4 + 3]);
        for (int t = 16; t < 64; ++t) {
            std::uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
            std::uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
            w[t] = w[t - 16] + s0 + w[t - 7] + s1;
        }
        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3];
        std::uint32_t e = h_[4], f = h_[5], g = h_[6], h = h_[7];
        for (int t = 0; t < 64; ++t) {
            std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = h + S1 + ch + K[static_cast<std::size_t>(t)] + w[t];
            std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = S0 + maj;
            h = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h_[0] += a; h_[1] += b; h_[2] += c; h_[3] += d;
        h_[4] += e; h_[5] += f; h_[6] += g; h_[7] += h;
    }

    std::array<std::uint32_t, 8> h_{};
    std::array<unsigned char, 64> buf_{};
    std::uint64_t len_ = 0;
    std::size_t buf_used_ = 0;
};

inline std::string sha256_hex(const std::string& data) {
    Sha256 h;
    h.update(data);
    return h.hex_digest();
}

}  // namespace debtlab
