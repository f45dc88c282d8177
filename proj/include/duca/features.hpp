#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "duca/image.hpp"

namespace duca {

using Descriptor = std::vector<double>;

// Addresses one patch descriptor: "imageId/variantTag/patchIndex".
struct PatchKey {
  std::string image_id;
  std::string variant_tag;
  std::uint32_t patch_index = 0;

  std::string str() const;
  static PatchKey parse(const std::string& key);
};

// The patch-descriptor contract. Real activations enter through a
// FeatureStore of precomputed vectors; the stub makes the pipeline testable
// without a network.
class FeatureBackend {
 public:
  virtual ~FeatureBackend() = default;
  virtual const std::string& name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::array<double, 3> mean_rgb() const = 0;
  virtual Descriptor describe(const PatchKey& key, const ImageTensor& patch) const = 0;
};

// Deterministic stand-in: 16x16x3 block means of the patch, centered, then
// a fixed seeded random projection through tanh.
class StubBackend : public FeatureBackend {
 public:
  explicit StubBackend(std::uint64_t seed, std::size_t dim = 512);

  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return dim_; }
  std::array<double, 3> mean_rgb() const override { return {0.0, 0.0, 0.0}; }
  Descriptor describe(const PatchKey& key, const ImageTensor& patch) const override;

  std::uint64_t seed() const { return seed_; }

 private:
  std::string name_;
  std::size_t dim_;
  std::uint64_t seed_;
  std::vector<double> projection_;  // dim x 768
};

Descriptor stub_describe(const ImageTensor& patch, std::uint64_t seed, std::size_t dim);

class FeatureStore {
 public:
  FeatureStore() = default;
  explicit FeatureStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return manifest_.size(); }

  bool contains(const PatchKey& key) const { return manifest_.count(key.str()) > 0; }
  std::size_t add(const PatchKey& key, const Descriptor& value);  // float32 truncation
  std::size_t add_row(const std::string& key, std::span<const float> row);

  std::size_t row_index(const PatchKey& key) const;  // throws MissingFeature
  std::span<const float> row(std::size_t index) const;
  Descriptor descriptor(const PatchKey& key) const;
  Descriptor descriptor_at(std::size_t index) const;

  const std::map<std::string, std::uint64_t>& manifest() const { return manifest_; }
  const std::vector<float>& matrix() const { return matrix_; }

  std::string backend_name;
  std::array<double, 3> mean_rgb{0.0, 0.0, 0.0};
  std::string config_digest;

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::uint64_t> manifest_;
  std::vector<float> matrix_;
};

void save_store(const FeatureStore& store, const std::filesystem::path& path);
FeatureStore load_store(const std::filesystem::path& path);
std::string store_digest(const FeatureStore& store);

// Keyed lookup into precomputed features; the patch pixels are ignored.
class StoreBackend : public FeatureBackend {
 public:
  explicit StoreBackend(std::shared_ptr<const FeatureStore> store)
      : store_(std::move(store)), name_("store:" + store_->backend_name) {}

  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return store_->dim(); }
  std::array<double, 3> mean_rgb() const override { return store_->mean_rgb; }
  Descriptor describe(const PatchKey& key, const ImageTensor&) const override {
    return store_->descriptor(key);
  }

 private:
  std::shared_ptr<const FeatureStore> store_;
  std::string name_;
};

}  // namespace duca
