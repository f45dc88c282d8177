#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "duca/encoding.hpp"
#include "duca/svm.hpp"

namespace duca {

enum class Pooling { Max, Mean };

const char* pooling_name(Pooling mode);
Pooling pooling_from_name(const std::string& name);

// Per-image feature: patch codes pooled elementwise, optionally l2-normalized.
struct ImageVector {
  std::vector<double> values;
  Pooling pooling = Pooling::Max;
  bool normalized = true;
};

ImageVector pool(const std::vector<Code>& codes, Pooling mode, bool normalize = true);

// One-vs-one multiclass model: one binary SVM per unordered class pair,
// prediction by majority vote.
struct OvOModel {
  std::vector<std::string> classes;  // sorted, defines pair enumeration
  std::size_t dim = 0;
  std::vector<BinarySvm> machines;   // L*(L-1)/2, pair order below
  std::string bank_digest;
  std::string config_digest;

  // pairs enumerated (0,1), (0,2), ..., (0,L-1), (1,2), ...
  static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t l);
  std::size_t class_index(const std::string& label) const;
};

struct ClassifierOpts {
  double c = 1.0;
  double tol = 1e-4;
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

// The first class of each sorted pair is the +1 side of its machine.
OvOModel train_classifier(const std::vector<ImageVector>& vectors,
                          const std::vector<std::string>& labels,
                          const ClassifierOpts& opts = {});

struct Prediction {
  std::string label;
  std::vector<int> votes;          // per class
  std::vector<double> margin_sums; // per class, signed decision sums
};

// Majority vote; ties resolved by margin sums, then by lowest class index.
Prediction predict(const OvOModel& model, const ImageVector& v);

// Per-patch credit for max-pooled dimensions, weighted by the target
// class's aggregate machine weights, min-max normalized to [0, 1].
std::vector<double> patch_contributions(const OvOModel& model,
                                        const std::vector<Code>& patch_codes,
                                        const ImageVector& pooled,
                                        const std::string& target_label);

void save_model(const OvOModel& model, const std::filesystem::path& path);
OvOModel load_model(const std::filesystem::path& path);

}  // namespace duca
