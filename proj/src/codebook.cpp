#include "duca/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "duca/container.hpp"
#include "duca/error.hpp"
#include "duca/kernels.hpp"
#include "duca/log.hpp"
#include "duca/rng.hpp"

namespace duca {

namespace {

bool is_zero_row(std::span<const float> row) {
  for (float v : row) {
    if (v != 0.0f) return false;
  }
  return true;
}

std::vector<double> promote(std::span<const float> row) {
  return std::vector<double>(row.begin(), row.end());
}

}  // namespace

const char* codebook_kind_name(CodebookKind kind) {
  switch (kind) {
    case CodebookKind::Supervised: return "supervised";
    case CodebookKind::Random:     return "random";
    case CodebookKind::Kmeans:     return "kmeans";
  }
  return "?";
}

CodebookKind codebook_kind_from_name(const std::string& name) {
  if (name == "supervised") return CodebookKind::Supervised;
  if (name == "random") return CodebookKind::Random;
  if (name == "kmeans") return CodebookKind::Kmeans;
  fail(ErrorKind::Format, "unknown codebook kind: " + name);
}

Codebook::Codebook(std::size_t dim, std::vector<float> atoms,
                   std::optional<std::vector<std::string>> labels, Provenance provenance)
    : dim_(dim), atoms_(std::move(atoms)), labels_(std::move(labels)),
      provenance_(provenance) {
  if (dim_ == 0) fail(ErrorKind::InvalidInput, "codebook dimension must be positive");
  if (atoms_.empty() || atoms_.size() % dim_ != 0) {
    fail(ErrorKind::InvalidInput, "codebook atom matrix size is not a multiple of dim");
  }
  count_ = atoms_.size() / dim_;
  for (std::size_t j = 0; j < count_; ++j) {
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!std::isfinite(atoms_[j * dim_ + i])) {
        fail(ErrorKind::InvalidInput, "codebook atom " + std::to_string(j) + " is not finite");
      }
    }
    if (is_zero_row(atom(j))) {
      fail(ErrorKind::InvalidInput, "codebook atom " + std::to_string(j) + " is all-zero");
    }
  }
  if (provenance_.kind == CodebookKind::Supervised) {
    if (!labels_ || labels_->size() != count_) {
      fail(ErrorKind::Integrity, "supervised codebook requires one label per atom");
    }
    std::set<std::string> names(labels_->begin(), labels_->end());
    if (names.size() != labels_->size()) {
      fail(ErrorKind::Integrity, "supervised codebook labels must be unique");
    }
  }
}

std::string Codebook::digest() const {
  Container c;
  c.magic = "DUCB";
  c.dim = static_cast<std::uint32_t>(dim_);
  c.count = count_;
  c.matrix = atoms_;
  c.meta["kind"] = codebook_kind_name(provenance_.kind);
  if (labels_) c.meta["labels"] = *labels_;
  return container_digest(c);
}

std::string CodebookBank::digest() const {
  Digester d;
  for (const auto& b : books) d.update(b.digest());
  return d.hex();
}

Codebook build_supervised(
    const std::vector<std::pair<std::string, std::vector<ImageTensor>>>& categories,
    const FeatureBackend& backend, const SupervisedOpts& opts) {
  if (categories.empty()) fail(ErrorKind::InvalidInput, "no categories given");

  const std::size_t dim = backend.dim();
  std::vector<float> atoms;
  atoms.reserve(categories.size() * dim);
  std::vector<std::string> labels;
  labels.reserve(categories.size());

  const PatchConfig patch_cfg{opts.rescale, opts.window, opts.stride};
  for (const auto& [name, images] : categories) {
    if (images.empty()) fail(ErrorKind::InvalidInput, "category \"" + name + "\" has no images");
    std::vector<double> pooled(dim, -std::numeric_limits<double>::infinity());
    std::size_t patch_count = 0;
    for (const auto& img : images) {
      const ImageTensor scaled = rescale_min_side(img, opts.rescale);
      if (std::min(scaled.height, scaled.width) < opts.window) {
        log_warn("category \"" + name + "\": image smaller than window after rescale, skipped");
        continue;
      }
      for (const auto& rect :
           patch_grid(scaled.height, scaled.width, patch_cfg.window, patch_cfg.stride)) {
        const ImageTensor patch = crop(scaled, rect.y0, rect.x0, rect.side, rect.side);
        const Descriptor d = backend.describe({}, patch);
        kernels::elem_max(pooled.data(), d.data(), dim);
        ++patch_count;
      }
    }
    if (patch_count == 0) {
      fail(ErrorKind::InvalidInput, "category \"" + name + "\" yielded no patches");
    }
    labels.push_back(name);
    for (double v : pooled) atoms.push_back(static_cast<float>(v));
  }

  Provenance prov{CodebookKind::Supervised, 0,
                  std::to_string(categories.size()) + " categories"};
  return Codebook(dim, std::move(atoms), std::move(labels), prov);
}

Codebook build_supervised_from_store(
    const FeatureStore& pool,
    const std::vector<std::pair<std::string, std::vector<std::size_t>>>& category_rows) {
  if (category_rows.empty()) fail(ErrorKind::InvalidInput, "no categories given");
  const std::size_t dim = pool.dim();

  std::vector<float> atoms;
  atoms.reserve(category_rows.size() * dim);
  std::vector<std::string> labels;
  for (const auto& [name, rows] : category_rows) {
    if (rows.empty()) fail(ErrorKind::InvalidInput, "category \"" + name + "\" has no rows");
    std::vector<double> pooled(dim, -std::numeric_limits<double>::infinity());
    for (const std::size_t r : rows) {
      if (r >= pool.count()) fail(ErrorKind::InvalidInput, "row index out of range");
      const Descriptor d = pool.descriptor_at(r);
      kernels::elem_max(pooled.data(), d.data(), dim);
    }
    labels.push_back(name);
    for (double v : pooled) atoms.push_back(static_cast<float>(v));
  }

  Provenance prov{CodebookKind::Supervised, 0,
                  std::to_string(category_rows.size()) + " categories from store"};
  return Codebook(dim, std::move(atoms), std::move(labels), prov);
}

namespace {

// Uniform draw without replacement, skipping all-zero rows (unusable as
// atoms). Throws when the pool cannot supply `size` usable rows.
std::vector<std::size_t> draw_rows(const FeatureStore& pool, std::size_t size, Rng& rng) {
  if (size == 0) fail(ErrorKind::InvalidInput, "codebook size must be positive");
  if (size > pool.count()) {
    fail(ErrorKind::InvalidInput, "requested " + std::to_string(size) + " atoms from a pool of " +
                                      std::to_string(pool.count()) + " rows");
  }
  const std::vector<std::size_t> order =
      rng.sample_without_replacement(pool.count(), pool.count());
  std::vector<std::size_t> chosen;
  chosen.reserve(size);
  for (const std::size_t r : order) {
    if (is_zero_row(pool.row(r))) continue;
    chosen.push_back(r);
    if (chosen.size() == size) break;
  }
  if (chosen.size() < size) {
    fail(ErrorKind::InvalidInput, "pool has only " + std::to_string(chosen.size()) +
                                      " nonzero rows, need " + std::to_string(size));
  }
  return chosen;
}

Codebook book_from_rows(const FeatureStore& pool, std::span<const std::size_t> rows,
                        std::uint64_t seed) {
  std::vector<float> atoms;
  atoms.reserve(rows.size() * pool.dim());
  for (const std::size_t r : rows) {
    const auto row = pool.row(r);
    atoms.insert(atoms.end(), row.begin(), row.end());
  }
  Provenance prov{CodebookKind::Random, seed,
                  "sampled from " + std::to_string(pool.count()) + "-row pool"};
  return Codebook(pool.dim(), std::move(atoms), std::nullopt, prov);
}

}  // namespace

Codebook build_unsupervised_random(const FeatureStore& pool, std::size_t size,
                                   std::uint64_t seed) {
  Rng rng(seed);
  const auto rows = draw_rows(pool, size, rng);
  return book_from_rows(pool, rows, seed);
}

std::vector<Codebook> build_random_bank(const FeatureStore& pool,
                                        const std::vector<std::size_t>& sizes,
                                        std::uint64_t seed) {
  if (sizes.empty()) fail(ErrorKind::InvalidInput, "bank must have at least one codebook");
  std::size_t total = 0;
  for (const std::size_t s : sizes) total += s;
  Rng rng(seed);
  const auto rows = draw_rows(pool, total, rng);
  std::vector<Codebook> books;
  books.reserve(sizes.size());
  std::size_t offset = 0;
  for (const std::size_t s : sizes) {
    books.push_back(book_from_rows(pool, {rows.data() + offset, s}, seed));
    offset += s;
  }
  return books;
}

Codebook build_unsupervised_kmeans(const FeatureStore& pool, std::size_t k, std::uint64_t seed,
                                   const KmeansOpts& opts, KmeansDiag* diag) {
  const std::size_t n = pool.count();
  const std::size_t dim = pool.dim();
  if (k == 0) fail(ErrorKind::InvalidInput, "k must be positive");
  if (n < k) {
    fail(ErrorKind::InvalidInput,
         "pool has " + std::to_string(n) + " rows, need at least " + std::to_string(k));
  }

  std::vector<double> points(n * dim);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = pool.row(r);
    for (std::size_t i = 0; i < dim; ++i) points[r * dim + i] = row[i];
  }
  const auto point = [&](std::size_t r) { return points.data() + r * dim; };

  Rng rng(seed);
  std::vector<double> centroids(k * dim);
  const auto centroid = [&](std::size_t c) { return centroids.data() + c * dim; };

  // k-means++ seeding
  std::vector<double> dist_sq(n, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = static_cast<std::size_t>(rng.uniform_int(n));
    std::copy(point(first), point(first) + dim, centroid(0));
    for (std::size_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> diff(point(r), point(r) + dim);
        kernels::axpy(-1.0, centroid(c - 1), diff.data(), dim);
        dist_sq[r] = std::min(dist_sq[r], kernels::nrm2sq(diff.data(), dim));
        total += dist_sq[r];
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        const double target = rng.uniform01() * total;
        double cum = 0.0;
        pick = n - 1;
        for (std::size_t r = 0; r < n; ++r) {
          cum += dist_sq[r];
          if (cum >= target) {
            pick = r;
            break;
          }
        }
      } else {
        pick = static_cast<std::size_t>(rng.uniform_int(n));
      }
      std::copy(point(pick), point(pick) + dim, centroid(c));
    }
  }

  std::vector<std::size_t> assignment(n, 0);
  std::vector<double> point_dist(n, 0.0);
  if (diag) {
    diag->iterations = 0;
    diag->objective_history.clear();
  }

  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  std::vector<double> scratch(dim);

  for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
    // assignment step
    double objective = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        std::copy(point(r), point(r) + dim, scratch.data());
        kernels::axpy(-1.0, centroid(c), scratch.data(), dim);
        const double d = kernels::nrm2sq(scratch.data(), dim);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      assignment[r] = best_c;
      point_dist[r] = best;
      objective += best;
    }
    if (diag) {
      diag->iterations = iter + 1;
      diag->objective_history.push_back(objective);
    }

    // update step
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      kernels::elem_add(&sums[assignment[r] * dim], point(r), dim);
      ++counts[assignment[r]];
    }

    double movement = 0.0;
    std::set<std::size_t> reused;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // re-seed an empty cluster from the farthest point
        std::size_t farthest = 0;
        double farthest_d = -1.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (reused.count(r)) continue;
          if (point_dist[r] > farthest_d) {
            farthest_d = point_dist[r];
            farthest = r;
          }
        }
        reused.insert(farthest);
        std::copy(point(farthest), point(farthest) + dim, scratch.data());
      } else {
        std::copy(&sums[c * dim], &sums[c * dim] + dim, scratch.data());
        kernels::scal(1.0 / static_cast<double>(counts[c]), scratch.data(), dim);
      }
      std::vector<double> diff(scratch);
      kernels::axpy(-1.0, centroid(c), diff.data(), dim);
      movement += std::sqrt(kernels::nrm2sq(diff.data(), dim));
      std::copy(scratch.begin(), scratch.end(), centroid(c));
    }
    if (movement < opts.tol) break;
  }

  std::vector<float> atoms(k * dim);
  for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i] = static_cast<float>(centroids[i]);
  Provenance prov{CodebookKind::Kmeans, seed,
                  "k-means over " + std::to_string(n) + "-row pool"};
  return Codebook(dim, std::move(atoms), std::nullopt, prov);
}

void save_codebook(const Codebook& book, const std::filesystem::path& path,
                   const std::string& config_digest) {
  Container c;
  c.magic = "DUCB";
  c.dim = static_cast<std::uint32_t>(book.dim());
  c.count = book.size();
  c.matrix = book.atoms();
  c.meta["kind"] = codebook_kind_name(book.provenance().kind);
  c.meta["seed"] = book.provenance().seed;
  c.meta["source"] = book.provenance().source;
  if (book.labels()) c.meta["labels"] = *book.labels();
  if (!config_digest.empty()) c.meta["digests"]["config"] = config_digest;
  save_container(c, path);
}

Codebook load_codebook(const std::filesystem::path& path) {
  const Container c = load_container(path, "DUCB");
  if (!c.meta.contains("kind")) fail(ErrorKind::Format, path.string() + ": missing codebook kind");
  Provenance prov;
  prov.kind = codebook_kind_from_name(c.meta["kind"].get<std::string>());
  prov.seed = c.meta.value("seed", std::uint64_t{0});
  prov.source = c.meta.value("source", std::string{});
  std::optional<std::vector<std::string>> labels;
  if (c.meta.contains("labels")) labels = c.meta["labels"].get<std::vector<std::string>>();
  if (prov.kind == CodebookKind::Supervised && !labels) {
    fail(ErrorKind::Integrity, path.string() + ": supervised codebook has no labels");
  }
  return Codebook(c.dim, c.matrix, std::move(labels), prov);
}

}  // namespace duca
