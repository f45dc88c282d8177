#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duca/features.hpp"
#include "duca/image.hpp"

namespace duca {

enum class CodebookKind { Supervised, Random, Kmeans };

const char* codebook_kind_name(CodebookKind kind);
CodebookKind codebook_kind_from_name(const std::string& name);

struct Provenance {
  CodebookKind kind = CodebookKind::Random;
  std::uint64_t seed = 0;
  std::string source;
};

// Ordered set of SRP descriptors: the m columns of the encoding matrix X,
// stored here as float32 rows. Supervised books carry one category label
// per atom.
class Codebook {
 public:
  Codebook(std::size_t dim, std::vector<float> atoms,
           std::optional<std::vector<std::string>> labels, Provenance provenance);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return count_; }
  std::span<const float> atom(std::size_t j) const { return {atoms_.data() + j * dim_, dim_}; }
  const std::vector<float>& atoms() const { return atoms_; }
  const std::optional<std::vector<std::string>>& labels() const { return labels_; }
  const Provenance& provenance() const { return provenance_; }
  std::string digest() const;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<float> atoms_;  // count x dim
  std::optional<std::vector<std::string>> labels_;
  Provenance provenance_;
};

struct CodebookBank {
  std::vector<Codebook> books;

  std::size_t total_atoms() const {
    std::size_t total = 0;
    for (const auto& b : books) total += b.size();
    return total;
  }
  std::string digest() const;
};

struct SupervisedOpts {
  int rescale = 256;
  int window = 224;
  int stride = 32;
};

// One atom per category: the elementwise max over the descriptors of every
// dense patch of every image in the category.
Codebook build_supervised(
    const std::vector<std::pair<std::string, std::vector<ImageTensor>>>& categories,
    const FeatureBackend& backend, const SupervisedOpts& opts = {});

// Same max-pool construction over precomputed rows, grouped by category.
Codebook build_supervised_from_store(
    const FeatureStore& pool,
    const std::vector<std::pair<std::string, std::vector<std::size_t>>>& category_rows);

Codebook build_unsupervised_random(const FeatureStore& pool, std::size_t size, std::uint64_t seed);

// The multi-codebook draw: one sample of sum(sizes) rows without
// replacement, split in order, so books never share an atom.
std::vector<Codebook> build_random_bank(const FeatureStore& pool,
                                        const std::vector<std::size_t>& sizes, std::uint64_t seed);

struct KmeansOpts {
  std::size_t max_iters = 100;
  double tol = 1e-4;
};

struct KmeansDiag {
  std::size_t iterations = 0;
  std::vector<double> objective_history;
};

Codebook build_unsupervised_kmeans(const FeatureStore& pool, std::size_t k, std::uint64_t seed,
                                   const KmeansOpts& opts = {}, KmeansDiag* diag = nullptr);

void save_codebook(const Codebook& book, const std::filesystem::path& path,
                   const std::string& config_digest = {});
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace duca
