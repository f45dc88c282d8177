#include "duca/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "duca/digest.hpp"
#include "duca/error.hpp"
#include "duca/kernels.hpp"
#include "duca/rng.hpp"

namespace duca {

const char* split_rule_name(SplitRule rule) {
  switch (rule) {
    case SplitRule::PerClassCount: return "per-class-count";
    case SplitRule::Percentage:    return "percentage";
    case SplitRule::OddEven:       return "odd-even-index";
  }
  return "?";
}

SplitRule split_rule_from_name(const std::string& name) {
  if (name == "per-class-count") return SplitRule::PerClassCount;
  if (name == "percentage") return SplitRule::Percentage;
  if (name == "odd-even-index") return SplitRule::OddEven;
  fail(ErrorKind::Format, "unknown split rule: " + name);
}

namespace {

// Manifest order, or frame order when frames are present.
std::vector<const ManifestItem*> class_items_in_order(const DatasetManifest& manifest,
                                                      const std::string& label) {
  std::vector<const ManifestItem*> items;
  for (const auto& item : manifest.items) {
    if (item.label == label) items.push_back(&item);
  }
  std::stable_sort(items.begin(), items.end(), [](const ManifestItem* a, const ManifestItem* b) {
    if (a->frame && b->frame && *a->frame != *b->frame) return *a->frame < *b->frame;
    return false;
  });
  return items;
}

std::uint64_t class_seed(std::uint64_t seed, const std::string& label) {
  Digester d;
  d.update_u64(seed);
  d.update(label);
  return d.value();
}

}  // namespace

Split make_split(const DatasetManifest& manifest, const SplitProtocol& protocol) {
  manifest.validate();
  Split split;
  for (const auto& label : manifest.classes) {
    auto items = class_items_in_order(manifest, label);
    const std::size_t n = items.size();
    if (n == 0) fail(ErrorKind::InvalidInput, "class \"" + label + "\" has no images");

    switch (protocol.rule) {
      case SplitRule::PerClassCount: {
        const std::size_t want =
            static_cast<std::size_t>(protocol.train_count) + protocol.test_count;
        if (protocol.train_count < 1 || protocol.test_count < 1) {
          fail(ErrorKind::InvalidInput, "per-class-count needs positive train and test counts");
        }
        if (n < want) {
          fail(ErrorKind::InvalidInput, "class \"" + label + "\" has " + std::to_string(n) +
                                            " images, protocol needs " + std::to_string(want));
        }
        Rng rng(class_seed(protocol.seed, label));
        rng.shuffle(items);
        for (int i = 0; i < protocol.train_count; ++i) split.train_ids.push_back(items[i]->id);
        for (int i = 0; i < protocol.test_count; ++i) {
          split.test_ids.push_back(items[protocol.train_count + i]->id);
        }
        break;
      }
      case SplitRule::Percentage: {
        if (protocol.train_pct <= 0.0 || protocol.test_pct <= 0.0) {
          fail(ErrorKind::InvalidInput, "percentage split needs positive percentages");
        }
        const double test_frac = protocol.test_pct / (protocol.train_pct + protocol.test_pct);
        const std::size_t test_n =
            static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_frac));
        if (!protocol.contiguous) {
          Rng rng(class_seed(protocol.seed, label));
          rng.shuffle(items);
        }
        // contiguous: later frames become the test block
        for (std::size_t i = 0; i < n - test_n; ++i) split.train_ids.push_back(items[i]->id);
        for (std::size_t i = n - test_n; i < n; ++i) split.test_ids.push_back(items[i]->id);
        break;
      }
      case SplitRule::OddEven: {
        if (protocol.count < 1) fail(ErrorKind::InvalidInput, "odd-even split needs a count");
        const std::size_t want = static_cast<std::size_t>(protocol.count);
        std::vector<const ManifestItem*> odd, even;
        for (std::size_t i = 0; i < n; ++i) {
          ((i % 2 == 0) ? odd : even).push_back(items[i]);  // position 1 is odd
        }
        if (odd.size() < want || even.size() < want) {
          fail(ErrorKind::InvalidInput,
               "class \"" + label + "\" is too small for odd-even count " +
                   std::to_string(protocol.count));
        }
        for (std::size_t i = 0; i < want; ++i) split.train_ids.push_back(odd[i]->id);
        for (std::size_t i = 0; i < want; ++i) split.test_ids.push_back(even[i]->id);
        break;
      }
    }
  }
  return split;
}

EvalReport confusion_and_accuracy(const std::vector<std::string>& predictions,
                                  const std::vector<std::string>& truths,
                                  const std::vector<std::string>& classes) {
  if (predictions.size() != truths.size()) {
    fail(ErrorKind::InvalidInput, "prediction and truth lists differ in length");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index[classes[c]] = c;
  const std::size_t l = classes.size();

  EvalReport report;
  report.classes = classes;
  report.confusion_counts.assign(l, std::vector<std::int64_t>(l, 0));
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto t = index.find(truths[i]);
    const auto p = index.find(predictions[i]);
    if (t == index.end()) fail(ErrorKind::InvalidInput, "unknown truth label: " + truths[i]);
    if (p == index.end()) fail(ErrorKind::InvalidInput, "unknown predicted label: " + predictions[i]);
    ++report.confusion_counts[t->second][p->second];
  }

  report.confusion.assign(l, std::vector<double>(l, 0.0));
  report.per_class_accuracy.assign(l, 0.0);
  std::int64_t total = 0, correct = 0;
  std::size_t nonempty = 0;
  double acc_sum = 0.0;
  for (std::size_t t = 0; t < l; ++t) {
    std::int64_t row_total = 0;
    for (const std::int64_t v : report.confusion_counts[t]) row_total += v;
    total += row_total;
    correct += report.confusion_counts[t][t];
    if (row_total > 0) {
      for (std::size_t p = 0; p < l; ++p) {
        report.confusion[t][p] =
            static_cast<double>(report.confusion_counts[t][p]) / static_cast<double>(row_total);
      }
      report.per_class_accuracy[t] = report.confusion[t][t];
      acc_sum += report.per_class_accuracy[t];
      ++nonempty;
    }
  }
  if (total == 0) fail(ErrorKind::InvalidInput, "no samples to evaluate");
  report.mean_accuracy = nonempty ? acc_sum / static_cast<double>(nonempty) : 0.0;
  report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return report;
}

std::vector<double> cmc_curve(const std::vector<std::vector<double>>& scores,
                              const std::vector<std::size_t>& truth_indices) {
  if (scores.empty() || scores.size() != truth_indices.size()) {
    fail(ErrorKind::InvalidInput, "score matrix and truth list must align");
  }
  const std::size_t l = scores.front().size();
  std::vector<std::size_t> rank_hits(l, 0);
  for (std::size_t s = 0; s < scores.size(); ++s) {
    const auto& row = scores[s];
    if (row.size() != l) fail(ErrorKind::InvalidInput, "ragged score matrix");
    const std::size_t t = truth_indices[s];
    if (t >= l) fail(ErrorKind::InvalidInput, "truth index out of range");
    for (const double v : row) {
      if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "non-finite score");
    }
    std::size_t rank = 1;
    for (std::size_t c = 0; c < l; ++c) {
      if (row[c] > row[t] || (row[c] == row[t] && c < t)) ++rank;
    }
    ++rank_hits[rank - 1];
  }
  std::vector<double> cmc(l, 0.0);
  std::size_t cum = 0;
  for (std::size_t k = 0; k < l; ++k) {
    cum += rank_hits[k];
    cmc[k] = static_cast<double>(cum) / static_cast<double>(scores.size());
  }
  return cmc;
}

double equal_error_rate(const std::vector<double>& scores, const std::vector<int>& truths) {
  if (scores.size() != truths.size() || scores.empty()) {
    fail(ErrorKind::InvalidInput, "scores and truths must align");
  }
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (truths[i] > 0 ? pos : neg).push_back(scores[i]);
  }
  if (pos.empty() || neg.empty()) {
    fail(ErrorKind::InvalidInput, "equal error rate needs both classes");
  }

  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  // descending sweep of "positive iff score >= threshold"
  const auto rates = [&](double threshold) {
    std::size_t fp = 0, fn = 0;
    for (const double v : neg) {
      if (v >= threshold) ++fp;
    }
    for (const double v : pos) {
      if (v < threshold) ++fn;
    }
    return std::pair<double, double>{static_cast<double>(fp) / neg.size(),
                                     static_cast<double>(fn) / pos.size()};
  };

  double prev_fpr = 0.0, prev_fnr = 1.0;  // threshold above every score
  for (const double threshold : thresholds) {
    const auto [fpr, fnr] = rates(threshold);
    const double prev_diff = prev_fnr - prev_fpr;
    const double diff = fnr - fpr;
    if (diff <= 0.0) {
      if (prev_diff <= 0.0) return prev_fpr;
      const double t = prev_diff / (prev_diff - diff);
      return prev_fpr + t * (fpr - prev_fpr);
    }
    prev_fpr = fpr;
    prev_fnr = fnr;
  }
  // every threshold still misses positives; crossing sits at the (1, 0) end
  const double prev_diff = prev_fnr - prev_fpr;
  const double t = prev_diff / (prev_diff - (0.0 - 1.0));
  return prev_fpr + t * (1.0 - prev_fpr);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["classes"] = classes;
  j["per_class_accuracy"] = per_class_accuracy;
  j["mean_accuracy"] = mean_accuracy;
  j["overall_accuracy"] = overall_accuracy;
  j["confusion_counts"] = confusion_counts;
  j["confusion"] = confusion;
  if (cmc) j["cmc"] = *cmc;
  if (per_class_eer) j["per_class_eer"] = *per_class_eer;
  return j;
}

nlohmann::json EncodeBenchmark::to_json() const {
  nlohmann::json j;
  j["single_seconds_per_patch"] = single_seconds_per_patch;
  j["multi_seconds_per_patch"] = multi_seconds_per_patch;
  j["ratio_multi_over_single"] = ratio;
  j["patches"] = patches;
  j["single_atoms"] = single_atoms;
  j["multi_atoms"] = multi_atoms;
  j["note"] = note;
  return j;
}

EncodeBenchmark benchmark_encoding(const Codebook& single_book,
                                   const std::vector<Codebook>& multi_books,
                                   const std::vector<Descriptor>& sample_patches,
                                   const EncodeParams& params) {
  if (sample_patches.empty()) fail(ErrorKind::InvalidInput, "no sample patches");
  std::size_t multi_total = 0;
  for (const auto& b : multi_books) multi_total += b.size();
  if (multi_total != single_book.size()) {
    fail(ErrorKind::InvalidInput, "single and multi configurations must have equal atom counts");
  }

  CodebookBank single_bank;
  single_bank.books.push_back(single_book);
  CodebookBank multi_bank;
  multi_bank.books = multi_books;

  const auto time_bank = [&](const CodebookBank& bank) {
    const BankEncoder encoder(bank, params);
    encoder.encode(sample_patches.front());  // warm-up
    const auto start = std::chrono::steady_clock::now();
    for (const auto& x : sample_patches) encoder.encode(x);
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count() /
           static_cast<double>(sample_patches.size());
  };

  EncodeBenchmark bench;
  bench.single_seconds_per_patch = time_bank(single_bank);
  bench.multi_seconds_per_patch = time_bank(multi_bank);
  bench.ratio = bench.multi_seconds_per_patch / bench.single_seconds_per_patch;
  bench.patches = sample_patches.size();
  bench.single_atoms = single_book.size();
  for (const auto& b : multi_books) bench.multi_atoms.push_back(b.size());
  bench.note = std::string("mode=") + encode_mode_name(params.mode) +
               ", kernels=" + kernels::backend_name(kernels::active_backend()) +
               ", single-threaded";
  return bench;
}

}  // namespace duca
