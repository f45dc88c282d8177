#include "duca/features.hpp"

#include <cmath>

#include "duca/container.hpp"
#include "duca/error.hpp"
#include "duca/rng.hpp"

namespace duca {

namespace {

constexpr int kBlockGrid = 16;  // 224/16 = 14-pixel blocks
constexpr std::size_t kBlockDim = kBlockGrid * kBlockGrid * 3;

std::vector<double> block_means(const ImageTensor& patch) {
  if (patch.height != 224 || patch.width != 224) {
    fail(ErrorKind::InvalidInput, "stub backend expects a 224x224 patch, got " +
                                      std::to_string(patch.height) + "x" +
                                      std::to_string(patch.width));
  }
  const int block = 224 / kBlockGrid;
  std::vector<double> v(kBlockDim, 0.0);
  for (int by = 0; by < kBlockGrid; ++by) {
    for (int bx = 0; bx < kBlockGrid; ++bx) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int y = by * block; y < (by + 1) * block; ++y) {
        for (int x = bx * block; x < (bx + 1) * block; ++x) {
          for (int c = 0; c < 3; ++c) acc[c] += patch.at(y, x, c);
        }
      }
      const double inv = 1.0 / (block * block);
      for (int c = 0; c < 3; ++c) {
        v[(static_cast<std::size_t>(by) * kBlockGrid + bx) * 3 + c] = acc[c] * inv;
      }
    }
  }
  return v;
}

}  // namespace

std::string PatchKey::str() const {
  return image_id + "/" + variant_tag + "/" + std::to_string(patch_index);
}

PatchKey PatchKey::parse(const std::string& key) {
  const auto second = key.rfind('/');
  if (second == std::string::npos || second == 0) {
    fail(ErrorKind::Format, "malformed patch key: " + key);
  }
  const auto first = key.rfind('/', second - 1);
  if (first == std::string::npos) fail(ErrorKind::Format, "malformed patch key: " + key);
  PatchKey k;
  k.image_id = key.substr(0, first);
  k.variant_tag = key.substr(first + 1, second - first - 1);
  try {
    k.patch_index = static_cast<std::uint32_t>(std::stoul(key.substr(second + 1)));
  } catch (const std::exception&) {
    fail(ErrorKind::Format, "malformed patch index in key: " + key);
  }
  return k;
}

StubBackend::StubBackend(std::uint64_t seed, std::size_t dim)
    : name_("stub"), dim_(dim), seed_(seed), projection_(dim * kBlockDim) {
  if (dim == 0) fail(ErrorKind::InvalidInput, "stub dimension must be positive");
  Rng rng(seed);
  const double sigma = 2.0 / std::sqrt(static_cast<double>(kBlockDim));
  for (auto& w : projection_) w = sigma * rng.normal();
}

Descriptor StubBackend::describe(const PatchKey&, const ImageTensor& patch) const {
  std::vector<double> v = block_means(patch);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;

  Descriptor out(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    const double* row = &projection_[k * kBlockDim];
    double z = 0.0;
    for (std::size_t j = 0; j < kBlockDim; ++j) z += row[j] * v[j];
    out[k] = std::tanh(z);
  }
  return out;
}

Descriptor stub_describe(const ImageTensor& patch, std::uint64_t seed, std::size_t dim) {
  return StubBackend(seed, dim).describe({}, patch);
}

std::size_t FeatureStore::add(const PatchKey& key, const Descriptor& value) {
  if (value.size() != dim_) {
    fail(ErrorKind::InvalidInput, "descriptor dimension " + std::to_string(value.size()) +
                                      " does not match store dimension " + std::to_string(dim_));
  }
  std::vector<float> row(dim_);
  for (std::size_t i = 0; i < dim_; ++i) row[i] = static_cast<float>(value[i]);
  return add_row(key.str(), row);
}

std::size_t FeatureStore::add_row(const std::string& key, std::span<const float> row) {
  if (row.size() != dim_) fail(ErrorKind::InvalidInput, "row dimension mismatch");
  if (manifest_.count(key)) fail(ErrorKind::InvalidInput, "duplicate store key: " + key);
  const std::size_t index = manifest_.size();
  manifest_.emplace(key, index);
  matrix_.insert(matrix_.end(), row.begin(), row.end());
  return index;
}

std::size_t FeatureStore::row_index(const PatchKey& key) const {
  const auto it = manifest_.find(key.str());
  if (it == manifest_.end()) {
    fail(ErrorKind::MissingFeature, "no stored feature for key " + key.str());
  }
  return it->second;
}

std::span<const float> FeatureStore::row(std::size_t index) const {
  return {matrix_.data() + index * dim_, dim_};
}

Descriptor FeatureStore::descriptor(const PatchKey& key) const {
  return descriptor_at(row_index(key));
}

Descriptor FeatureStore::descriptor_at(std::size_t index) const {
  const auto r = row(index);
  return Descriptor(r.begin(), r.end());
}

void save_store(const FeatureStore& store, const std::filesystem::path& path) {
  Container c;
  c.magic = "DUCF";
  c.dim = static_cast<std::uint32_t>(store.dim());
  c.count = store.count();
  c.matrix = store.matrix();
  c.meta["manifest"] = store.manifest();
  c.meta["backend"] = store.backend_name;
  c.meta["mean"] = store.mean_rgb;
  if (!store.config_digest.empty()) c.meta["digests"]["config"] = store.config_digest;
  save_container(c, path);
}

FeatureStore load_store(const std::filesystem::path& path) {
  const Container c = load_container(path, "DUCF");
  FeatureStore store(c.dim);
  if (!c.meta.contains("manifest")) {
    fail(ErrorKind::Format, path.string() + ": missing manifest");
  }
  const auto& manifest = c.meta["manifest"];
  if (manifest.size() != c.count) {
    fail(ErrorKind::Integrity, path.string() + ": manifest has " + std::to_string(manifest.size()) +
                                   " entries for " + std::to_string(c.count) + " rows");
  }
  // rows are re-inserted in stored row order so the matrix layout survives
  std::vector<const std::string*> by_row(c.count, nullptr);
  for (auto it = manifest.begin(); it != manifest.end(); ++it) {
    const std::uint64_t row = it.value().get<std::uint64_t>();
    if (row >= c.count) {
      fail(ErrorKind::Integrity,
           path.string() + ": manifest entry \"" + it.key() + "\" references row " +
               std::to_string(row) + " of " + std::to_string(c.count));
    }
    if (by_row[row] != nullptr) {
      fail(ErrorKind::Integrity, path.string() + ": duplicate manifest row " + std::to_string(row));
    }
    by_row[row] = &it.key();
  }
  for (std::uint64_t r = 0; r < c.count; ++r) {
    store.add_row(*by_row[r], {c.matrix.data() + r * c.dim, c.dim});
  }
  store.backend_name = c.meta.value("backend", std::string{});
  if (c.meta.contains("mean")) {
    const auto mean = c.meta["mean"];
    for (int i = 0; i < 3; ++i) store.mean_rgb[static_cast<std::size_t>(i)] = mean.at(i).get<double>();
  }
  if (c.meta.contains("digests") && c.meta["digests"].contains("config")) {
    store.config_digest = c.meta["digests"]["config"].get<std::string>();
  }
  return store;
}

std::string store_digest(const FeatureStore& store) {
  Container c;
  c.magic = "DUCF";
  c.dim = static_cast<std::uint32_t>(store.dim());
  c.count = store.count();
  c.matrix = store.matrix();
  c.meta["manifest"] = store.manifest();
  c.meta["backend"] = store.backend_name;
  c.meta["mean"] = store.mean_rgb;
  return container_digest(c);
}

}  // namespace duca
