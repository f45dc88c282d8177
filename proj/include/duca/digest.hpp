#pragma once

#include <cstdint>
#include <cstring>
#include <string>

namespace duca {

// FNV-1a 64-bit; used to chain artifact files to their inputs. Mismatch
// detection only, not a cryptographic commitment.
class Digester {
 public:
  Digester& update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  Digester& update(const std::string& s) { return update(s.data(), s.size()); }

  Digester& update_u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    return update(buf, 8);
  }

  std::uint64_t value() const { return hash_; }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = hash_;
    for (int i = 15; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = digits[v & 0xf];
      v >>= 4;
    }
    return out;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::string digest_hex(const void* data, std::size_t n) {
  Digester d;
  d.update(data, n);
  return d.hex();
}

inline std::string digest_hex(const std::string& s) {
  return digest_hex(s.data(), s.size());
}

}  // namespace duca
