#include "duca/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "duca/container.hpp"
#include "duca/error.hpp"
#include "duca/kernels.hpp"
#include "duca/log.hpp"
#include "duca/parallel.hpp"

namespace duca {

const char* encode_mode_name(EncodeMode mode) {
  return mode == EncodeMode::Sparse ? "sparse" : "metric";
}

EncodeMode encode_mode_from_name(const std::string& name) {
  if (name == "sparse") return EncodeMode::Sparse;
  if (name == "metric") return EncodeMode::Metric;
  fail(ErrorKind::Format, "unknown encoding mode: " + name);
}

PreparedBook::PreparedBook(const Codebook& book)
    : dim_(book.dim()), count_(book.size()), atoms_(book.size() * book.dim()) {
  for (std::size_t j = 0; j < count_; ++j) {
    const auto a = book.atom(j);
    double* out = atoms_.data() + j * dim_;
    for (std::size_t i = 0; i < dim_; ++i) out[i] = a[i];
    const double norm = std::sqrt(kernels::nrm2sq(out, dim_));
    kernels::scal(1.0 / norm, out, dim_);  // atoms are never all-zero
  }
}

namespace {

double soft_threshold(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

void check_finite(std::span<const double> x) {
  for (const double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "non-finite value in descriptor");
  }
}

double nnz_fraction_of(std::span<const double> f) {
  if (f.empty()) return 0.0;
  std::size_t nnz = 0;
  for (const double v : f) {
    if (v != 0.0) ++nnz;
  }
  return static_cast<double>(nnz) / static_cast<double>(f.size());
}

}  // namespace

double kkt_violation(const PreparedBook& book, std::span<const double> x,
                     std::span<const double> f, double lambda) {
  const std::size_t dim = book.dim();
  // r = x - Xf
  std::vector<double> r(x.begin(), x.end());
  for (std::size_t j = 0; j < book.size(); ++j) {
    if (f[j] != 0.0) kernels::axpy(-f[j], book.atom(j), r.data(), dim);
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < book.size(); ++j) {
    const double corr = kernels::dot(book.atom(j), r.data(), dim);
    double violation;
    if (f[j] > 0.0) {
      violation = std::fabs(corr - lambda);
    } else if (f[j] < 0.0) {
      violation = std::fabs(corr + lambda);
    } else {
      violation = std::max(0.0, std::fabs(corr) - lambda);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

SparseResult sparse_solve(const PreparedBook& book, std::span<const double> x, double lambda,
                          const SparseOpts& opts) {
  const std::size_t dim = book.dim();
  const std::size_t m = book.size();
  if (x.size() != dim) {
    fail(ErrorKind::InvalidInput, "descriptor dimension " + std::to_string(x.size()) +
                                      " does not match codebook dimension " + std::to_string(dim));
  }
  if (lambda <= 0.0) fail(ErrorKind::InvalidInput, "lambda must be positive");
  check_finite(x);

  std::vector<double> f(m, 0.0);
  std::vector<double> r(x.begin(), x.end());  // r = x - Xf, maintained exactly

  SparseResult result;
  const auto objective = [&] {
    double l1 = 0.0;
    for (const double v : f) l1 += std::fabs(v);
    return 0.5 * kernels::nrm2sq(r.data(), dim) + lambda * l1;
  };

  for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double* aj = book.atom(j);
      const double old = f[j];
      // unit-norm atom: exact minimizer along coordinate j
      const double updated = soft_threshold(old + kernels::dot(aj, r.data(), dim), lambda);
      if (updated != old) {
        kernels::axpy(old - updated, aj, r.data(), dim);
        f[j] = updated;
        max_delta = std::max(max_delta, std::fabs(updated - old));
      }
    }
    result.sweeps = sweep + 1;
    if (opts.record_history) result.objective_history.push_back(objective());

    // deltas bound optimality loosely; certify with the real KKT conditions
    if (max_delta <= opts.eps * 0.5) {
      result.kkt_violation = kkt_violation(book, x, f, lambda);
      if (result.kkt_violation <= opts.eps) break;
    } else {
      result.kkt_violation = std::numeric_limits<double>::infinity();
    }
  }

  if (result.kkt_violation > opts.eps) {
    result.kkt_violation = kkt_violation(book, x, f, lambda);
    if (result.kkt_violation > opts.eps) {
      fail(ErrorKind::Convergence,
           "sparse solve did not reach KKT tolerance " + std::to_string(opts.eps) + " in " +
               std::to_string(opts.max_sweeps) + " sweeps (violation " +
               std::to_string(result.kkt_violation) + ", residual " +
               std::to_string(std::sqrt(kernels::nrm2sq(r.data(), dim))) + ")");
    }
  }

  result.objective = objective();
  result.code.values = std::move(f);
  result.code.mode = EncodeMode::Sparse;
  result.code.nnz_fraction = nnz_fraction_of(result.code.values);
  if (result.code.nnz_fraction > opts.nnz_cap) {
    fail(ErrorKind::Integrity,
         "sparse code density " + std::to_string(result.code.nnz_fraction) + " exceeds cap " +
             std::to_string(opts.nnz_cap));
  }
  return result;
}

Code sparse_encode(const Codebook& book, std::span<const double> x, double lambda,
                   const SparseOpts& opts) {
  return sparse_solve(PreparedBook(book), x, lambda, opts).code;
}

double lambda_max(const PreparedBook& book, std::span<const double> x) {
  double best = 0.0;
  for (std::size_t j = 0; j < book.size(); ++j) {
    best = std::max(best, std::fabs(kernels::dot(book.atom(j), x.data(), book.dim())));
  }
  return best;
}

double lambda_max(const Codebook& book, std::span<const double> x) {
  return lambda_max(PreparedBook(book), x);
}

MetricEncoder train_metric_encoder(const Codebook& book, const MetricTrainOpts& opts) {
  const std::size_t m = book.size();
  const std::size_t dim = book.dim();
  if (m < 2) fail(ErrorKind::InvalidInput, "metric encoder needs at least 2 atoms");

  std::vector<double> atoms(m * dim);
  for (std::size_t j = 0; j < m; ++j) {
    const auto a = book.atom(j);
    for (std::size_t i = 0; i < dim; ++i) atoms[j * dim + i] = a[i];
  }

  MetricEncoder enc;
  enc.dim = dim;
  enc.weights.assign(m * dim, 0.0f);
  enc.biases.assign(m, 0.0f);
  enc.book_digest = book.digest();

  parallel_for(m, opts.workers, [&](std::size_t j) {
    std::vector<int> labels(m, -1);
    labels[j] = 1;
    SvmOpts svm_opts;
    svm_opts.tol = opts.tol;
    svm_opts.max_epochs = opts.max_epochs;
    svm_opts.bias = opts.bias;
    svm_opts.seed = opts.seed + j;
    BinarySvm svm;
    try {
      svm = train_binary(atoms, m, dim, labels, opts.c, svm_opts);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Convergence) {
        fail(ErrorKind::Convergence, "atom " + std::to_string(j) + ": " + e.what());
      }
      throw;
    }
    const double margin = decision(svm, {atoms.data() + j * dim, dim});
    if (margin <= 0.0) {
      log_warn("metric encoder atom " + std::to_string(j) +
               " is not separable from the rest (margin " + std::to_string(margin) + ")");
    }
    for (std::size_t i = 0; i < dim; ++i) {
      enc.weights[j * dim + i] = static_cast<float>(svm.w[i]);
    }
    enc.biases[j] = static_cast<float>(svm.b);
  });
  return enc;
}

Code metric_encode(const MetricEncoder& enc, std::span<const double> x, bool include_bias) {
  if (x.size() != enc.dim) {
    fail(ErrorKind::InvalidInput, "descriptor dimension " + std::to_string(x.size()) +
                                      " does not match encoder dimension " +
                                      std::to_string(enc.dim));
  }
  const std::size_t m = enc.size();
  Code code;
  code.mode = EncodeMode::Metric;
  code.values.resize(m);
  std::vector<double> w(enc.dim);
  for (std::size_t j = 0; j < m; ++j) {
    const float* row = enc.weights.data() + j * enc.dim;
    for (std::size_t i = 0; i < enc.dim; ++i) w[i] = row[i];
    code.values[j] = kernels::dot(w.data(), x.data(), enc.dim) +
                     (include_bias ? static_cast<double>(enc.biases[j]) : 0.0);
  }
  code.nnz_fraction = 1.0;
  return code;
}

void save_metric_encoder(const MetricEncoder& enc, const std::filesystem::path& path) {
  Container c;
  c.magic = "DUCW";
  c.dim = static_cast<std::uint32_t>(enc.dim);
  c.count = enc.size();
  c.matrix = enc.weights;
  c.meta["biases"] = enc.biases;
  c.meta["digests"]["codebook"] = enc.book_digest;
  save_container(c, path);
}

MetricEncoder load_metric_encoder(const std::filesystem::path& path) {
  const Container c = load_container(path, "DUCW");
  if (!c.meta.contains("biases")) fail(ErrorKind::Format, path.string() + ": missing biases");
  MetricEncoder enc;
  enc.dim = c.dim;
  enc.weights = c.matrix;
  enc.biases = c.meta["biases"].get<std::vector<float>>();
  if (enc.biases.size() != c.count) {
    fail(ErrorKind::Integrity, path.string() + ": bias count does not match weight rows");
  }
  if (c.meta.contains("digests") && c.meta["digests"].contains("codebook")) {
    enc.book_digest = c.meta["digests"]["codebook"].get<std::string>();
  }
  return enc;
}

BankEncoder::BankEncoder(const CodebookBank& bank, const EncodeParams& params)
    : BankEncoder(bank, {}, params) {}

BankEncoder::BankEncoder(const CodebookBank& bank, std::vector<MetricEncoder> encoders,
                         const EncodeParams& params)
    : encoders_(std::move(encoders)), params_(params) {
  if (bank.books.empty()) fail(ErrorKind::InvalidInput, "bank must have at least one codebook");
  dim_ = bank.books.front().dim();
  for (const auto& book : bank.books) {
    if (book.dim() != dim_) {
      fail(ErrorKind::InvalidInput, "codebooks in a bank must share one dimension");
    }
    code_length_ += book.size();
  }
  if (params_.mode == EncodeMode::Sparse) {
    prepared_.reserve(bank.books.size());
    for (const auto& book : bank.books) prepared_.emplace_back(book);
  } else {
    if (encoders_.empty()) {
      MetricTrainOpts train;
      train.bias = params_.metric_bias;
      for (const auto& book : bank.books) encoders_.push_back(train_metric_encoder(book, train));
    }
    if (encoders_.size() != bank.books.size()) {
      fail(ErrorKind::InvalidInput, "one metric encoder per codebook required");
    }
    for (std::size_t k = 0; k < encoders_.size(); ++k) {
      if (encoders_[k].size() != bank.books[k].size() || encoders_[k].dim != dim_) {
        fail(ErrorKind::Integrity, "metric encoder " + std::to_string(k) +
                                       " does not match its codebook shape");
      }
      if (!encoders_[k].book_digest.empty() &&
          encoders_[k].book_digest != bank.books[k].digest()) {
        fail(ErrorKind::DigestMismatch, "metric encoder " + std::to_string(k) +
                                            " was trained on a different codebook");
      }
    }
  }
}

Code BankEncoder::encode(std::span<const double> x) const {
  if (x.size() != dim_) {
    fail(ErrorKind::InvalidInput, "descriptor dimension does not match bank dimension");
  }
  Code out;
  out.mode = params_.mode;
  out.values.reserve(code_length_);
  if (params_.mode == EncodeMode::Sparse) {
    std::size_t nnz = 0;
    for (const auto& book : prepared_) {
      double lambda;
      if (params_.fixed_lambda) {
        lambda = *params_.fixed_lambda;
      } else {
        const double lmax = lambda_max(book, x);
        lambda = lmax > 0.0 ? params_.alpha * lmax : 1.0;  // orthogonal x: any lambda gives 0
      }
      const Code code = sparse_solve(book, x, lambda, params_.sparse).code;
      for (const double v : code.values) {
        if (v != 0.0) ++nnz;
      }
      out.values.insert(out.values.end(), code.values.begin(), code.values.end());
    }
    out.nnz_fraction = code_length_ ? static_cast<double>(nnz) / code_length_ : 0.0;
  } else {
    for (const auto& enc : encoders_) {
      const Code code = metric_encode(enc, x, params_.metric_bias);
      out.values.insert(out.values.end(), code.values.begin(), code.values.end());
    }
    out.nnz_fraction = 1.0;
  }
  return out;
}

}  // namespace duca
