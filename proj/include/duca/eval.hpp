#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "duca/encoding.hpp"
#include "duca/manifest.hpp"

namespace duca {

enum class SplitRule { PerClassCount, Percentage, OddEven };

const char* split_rule_name(SplitRule rule);
SplitRule split_rule_from_name(const std::string& name);

struct SplitProtocol {
  SplitRule rule = SplitRule::Percentage;
  // PerClassCount
  int train_count = 0;
  int test_count = 0;
  // Percentage (normalized by their sum; test count floors)
  double train_pct = 66.0;
  double test_pct = 33.0;
  // OddEven: first `count` odd-position items train, first `count` even test
  int count = 0;
  std::uint64_t seed = 0;
  bool contiguous = false;  // split on contiguous frame blocks instead of shuffling
};

struct Split {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

// Per-class, deterministic under seed; train and test are always disjoint.
Split make_split(const DatasetManifest& manifest, const SplitProtocol& protocol);

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<double> per_class_accuracy;
  double mean_accuracy = 0.0;     // mean of per-class accuracies
  double overall_accuracy = 0.0;  // total correct / total
  std::vector<std::vector<std::int64_t>> confusion_counts;  // truth x predicted
  std::vector<std::vector<double>> confusion;               // row-normalized
  std::optional<std::vector<double>> cmc;
  std::optional<std::map<std::string, double>> per_class_eer;

  nlohmann::json to_json() const;
};

EvalReport confusion_and_accuracy(const std::vector<std::string>& predictions,
                                  const std::vector<std::string>& truths,
                                  const std::vector<std::string>& classes);

// CMC(k) = fraction of samples whose true class scores among the top k.
// Equal scores rank by class index.
std::vector<double> cmc_curve(const std::vector<std::vector<double>>& scores,
                              const std::vector<std::size_t>& truth_indices);

// Crossing point of false-positive and false-negative rates under a
// descending threshold sweep, linearly interpolated between the two
// adjacent operating points.
double equal_error_rate(const std::vector<double>& scores, const std::vector<int>& truths);

struct EncodeBenchmark {
  double single_seconds_per_patch = 0.0;
  double multi_seconds_per_patch = 0.0;
  double ratio = 0.0;  // multi / single
  std::size_t patches = 0;
  std::size_t single_atoms = 0;
  std::vector<std::size_t> multi_atoms;
  std::string note;

  nlohmann::json to_json() const;
};

// Times bank encoding of the same descriptors against one large codebook
// and against several smaller ones with the same total atom count.
EncodeBenchmark benchmark_encoding(const Codebook& single_book,
                                   const std::vector<Codebook>& multi_books,
                                   const std::vector<Descriptor>& sample_patches,
                                   const EncodeParams& params);

}  // namespace duca
