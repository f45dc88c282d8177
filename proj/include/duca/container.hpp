#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace duca {

// Shared on-disk layout for every artifact file:
//   magic (4 bytes) | version u32 | dim u32 | count u64
//   count*dim float32 row-major
//   meta_len u64 | UTF-8 JSON
// All integers little-endian. Magics: DUCF features/vectors, DUCB codebooks,
// DUCW metric encoders, DUCM models.
struct Container {
  std::string magic;  // exactly 4 chars
  std::uint32_t version = 1;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  std::vector<float> matrix;  // count * dim
  nlohmann::json meta = nlohmann::json::object();
};

// Digest over dims and matrix bytes plus meta with the "digests" key
// removed, so a file's digest is stable under re-chaining.
std::string container_digest(const Container& c);

// Atomic write (temp + rename). Computes and embeds meta["digests"]["self"].
void save_container(const Container& c, const std::filesystem::path& path);

// Validates magic, version, payload length, meta JSON, and the embedded
// self digest. Each failure mode throws a distinct message.
Container load_container(const std::filesystem::path& path, const std::string& expected_magic);

}  // namespace duca
