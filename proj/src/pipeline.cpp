#include "duca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "duca/container.hpp"
#include "duca/error.hpp"
#include "duca/kernels.hpp"
#include "duca/parallel.hpp"

namespace duca {

const char* pooling_name(Pooling mode) { return mode == Pooling::Max ? "max" : "mean"; }

Pooling pooling_from_name(const std::string& name) {
  if (name == "max") return Pooling::Max;
  if (name == "mean") return Pooling::Mean;
  fail(ErrorKind::Format, "unknown pooling mode: " + name);
}

ImageVector pool(const std::vector<Code>& codes, Pooling mode, bool normalize) {
  if (codes.empty()) fail(ErrorKind::InvalidInput, "cannot pool an empty code list");
  const std::size_t len = codes.front().values.size();
  for (const auto& c : codes) {
    if (c.values.size() != len) fail(ErrorKind::InvalidInput, "ragged code lengths in pool");
  }

  ImageVector out;
  out.pooling = mode;
  out.normalized = normalize;
  out.values = codes.front().values;
  if (mode == Pooling::Max) {
    for (std::size_t i = 1; i < codes.size(); ++i) {
      kernels::elem_max(out.values.data(), codes[i].values.data(), len);
    }
  } else {
    for (std::size_t i = 1; i < codes.size(); ++i) {
      kernels::elem_add(out.values.data(), codes[i].values.data(), len);
    }
    kernels::scal(1.0 / static_cast<double>(codes.size()), out.values.data(), len);
  }

  if (normalize) {
    const double norm = std::sqrt(kernels::nrm2sq(out.values.data(), len));
    if (norm > 0.0) kernels::scal(1.0 / norm, out.values.data(), len);
  }
  return out;
}

std::size_t OvOModel::pair_index(std::size_t i, std::size_t j, std::size_t l) {
  // position of (i, j), i < j, in row-major upper-triangle order
  return i * l - i * (i + 1) / 2 + (j - i - 1);
}

std::size_t OvOModel::class_index(const std::string& label) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) {
    fail(ErrorKind::InvalidInput, "unknown class label: " + label);
  }
  return static_cast<std::size_t>(it - classes.begin());
}

OvOModel train_classifier(const std::vector<ImageVector>& vectors,
                          const std::vector<std::string>& labels, const ClassifierOpts& opts) {
  if (vectors.size() != labels.size() || vectors.empty()) {
    fail(ErrorKind::InvalidInput, "need one label per training vector");
  }
  const std::size_t dim = vectors.front().values.size();
  for (const auto& v : vectors) {
    if (v.values.size() != dim) fail(ErrorKind::InvalidInput, "ragged training vectors");
  }

  OvOModel model;
  model.dim = dim;
  {
    std::set<std::string> names(labels.begin(), labels.end());
    model.classes.assign(names.begin(), names.end());
  }
  const std::size_t l = model.classes.size();
  if (l < 2) fail(ErrorKind::InvalidInput, "training requires at least 2 classes");

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  struct Pair {
    std::size_t a, b;
  };
  std::vector<Pair> pairs;
  pairs.reserve(l * (l - 1) / 2);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j) pairs.push_back({i, j});
  }

  model.machines.resize(pairs.size());
  parallel_for(pairs.size(), opts.workers, [&](std::size_t k) {
    const auto [a, b] = pairs[k];
    const auto& rows_a = by_class.at(model.classes[a]);
    const auto& rows_b = by_class.at(model.classes[b]);
    const std::size_t n = rows_a.size() + rows_b.size();
    std::vector<double> xs(n * dim);
    std::vector<int> ys(n);
    std::size_t at = 0;
    for (const std::size_t r : rows_a) {
      std::copy(vectors[r].values.begin(), vectors[r].values.end(), xs.begin() + at * dim);
      ys[at++] = 1;
    }
    for (const std::size_t r : rows_b) {
      std::copy(vectors[r].values.begin(), vectors[r].values.end(), xs.begin() + at * dim);
      ys[at++] = -1;
    }
    SvmOpts svm_opts;
    svm_opts.tol = opts.tol;
    svm_opts.max_epochs = opts.max_epochs;
    svm_opts.seed = opts.seed + k;
    try {
      model.machines[k] = train_binary(xs, n, dim, ys, opts.c, svm_opts);
    } catch (const Error& e) {
      fail(e.kind(), "pair (" + model.classes[a] + ", " + model.classes[b] + "): " + e.what());
    }
  });
  return model;
}

Prediction predict(const OvOModel& model, const ImageVector& v) {
  if (v.values.size() != model.dim) {
    fail(ErrorKind::InvalidInput, "vector dimension " + std::to_string(v.values.size()) +
                                      " does not match model dimension " +
                                      std::to_string(model.dim));
  }
  const std::size_t l = model.classes.size();
  Prediction p;
  p.votes.assign(l, 0);
  p.margin_sums.assign(l, 0.0);

  std::size_t k = 0;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j, ++k) {
      const double d = decision(model.machines[k], v.values);
      if (d > 0.0) {
        ++p.votes[i];
      } else {
        ++p.votes[j];
      }
      p.margin_sums[i] += d;
      p.margin_sums[j] -= d;
    }
  }

  // argmax votes; ties by margin sum, then lowest index
  std::size_t best = 0;
  for (std::size_t c = 1; c < l; ++c) {
    if (p.votes[c] > p.votes[best] ||
        (p.votes[c] == p.votes[best] && p.margin_sums[c] > p.margin_sums[best])) {
      best = c;
    }
  }
  p.label = model.classes[best];
  return p;
}

std::vector<double> patch_contributions(const OvOModel& model,
                                        const std::vector<Code>& patch_codes,
                                        const ImageVector& pooled,
                                        const std::string& target_label) {
  if (pooled.pooling != Pooling::Max) {
    fail(ErrorKind::Unsupported, "patch contributions are defined for max pooling only");
  }
  if (patch_codes.empty()) fail(ErrorKind::InvalidInput, "no patch codes given");
  const std::size_t dim = model.dim;
  for (const auto& c : patch_codes) {
    if (c.values.size() != dim) fail(ErrorKind::InvalidInput, "code length mismatch");
  }
  const std::size_t target = model.class_index(target_label);
  const std::size_t l = model.classes.size();

  // aggregate weight vector of the target's machines, signed toward it
  std::vector<double> w_hat(dim, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j, ++k) {
      if (i == target) {
        kernels::axpy(1.0, model.machines[k].w.data(), w_hat.data(), dim);
      } else if (j == target) {
        kernels::axpy(-1.0, model.machines[k].w.data(), w_hat.data(), dim);
      }
    }
  }

  const std::size_t n = patch_codes.size();
  std::vector<double> raw(n, 0.0);
  std::vector<std::size_t> winners;
  for (std::size_t d = 0; d < dim; ++d) {
    double best = patch_codes[0].values[d];
    for (std::size_t i = 1; i < n; ++i) best = std::max(best, patch_codes[i].values[d]);
    winners.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (patch_codes[i].values[d] == best) winners.push_back(i);
    }
    const double share = w_hat[d] * best / static_cast<double>(winners.size());
    for (const std::size_t i : winners) raw[i] += share;
  }

  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> scores(n, 1.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < n; ++i) scores[i] = (raw[i] - lo) / (hi - lo);
  }
  return scores;
}

void save_model(const OvOModel& model, const std::filesystem::path& path) {
  Container c;
  c.magic = "DUCM";
  c.dim = static_cast<std::uint32_t>(model.dim + 1);  // per machine: w then b
  c.count = model.machines.size();
  c.matrix.reserve(c.count * c.dim);
  for (const auto& svm : model.machines) {
    for (const double v : svm.w) c.matrix.push_back(static_cast<float>(v));
    c.matrix.push_back(static_cast<float>(svm.b));
  }
  c.meta["classes"] = model.classes;
  c.meta["input_dim"] = model.dim;
  c.meta["c"] = model.machines.empty() ? 1.0 : model.machines.front().c;
  if (!model.bank_digest.empty()) c.meta["digests"]["bank"] = model.bank_digest;
  if (!model.config_digest.empty()) c.meta["digests"]["config"] = model.config_digest;
  save_container(c, path);
}

OvOModel load_model(const std::filesystem::path& path) {
  const Container c = load_container(path, "DUCM");
  OvOModel model;
  if (!c.meta.contains("classes") || !c.meta.contains("input_dim")) {
    fail(ErrorKind::Format, path.string() + ": missing model metadata");
  }
  model.classes = c.meta["classes"].get<std::vector<std::string>>();
  model.dim = c.meta["input_dim"].get<std::size_t>();
  if (!std::is_sorted(model.classes.begin(), model.classes.end())) {
    fail(ErrorKind::Integrity, path.string() + ": class list is not sorted");
  }
  const std::size_t l = model.classes.size();
  if (c.count != l * (l - 1) / 2) {
    fail(ErrorKind::Integrity, path.string() + ": machine count does not match class count");
  }
  if (c.dim != model.dim + 1) {
    fail(ErrorKind::Integrity, path.string() + ": machine width does not match input dim");
  }
  const double cost = c.meta.value("c", 1.0);
  model.machines.resize(c.count);
  for (std::size_t k = 0; k < c.count; ++k) {
    BinarySvm& svm = model.machines[k];
    svm.w.resize(model.dim);
    const float* row = c.matrix.data() + k * c.dim;
    for (std::size_t i = 0; i < model.dim; ++i) svm.w[i] = row[i];
    svm.b = row[model.dim];
    svm.c = cost;
  }
  if (c.meta.contains("digests")) {
    model.bank_digest = c.meta["digests"].value("bank", std::string{});
    model.config_digest = c.meta["digests"].value("config", std::string{});
  }
  return model;
}

}  // namespace duca
