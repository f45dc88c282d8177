#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "duca/codebook.hpp"
#include "duca/svm.hpp"

namespace duca {

enum class EncodeMode { Sparse, Metric };

const char* encode_mode_name(EncodeMode mode);
EncodeMode encode_mode_from_name(const std::string& name);

// Association vector of one patch with one codebook (length m) or with a
// whole bank (length sum of m_k).
struct Code {
  std::vector<double> values;
  EncodeMode mode = EncodeMode::Sparse;
  double nnz_fraction = 0.0;
};

// Codebook with atoms l2-normalized into double precision, ready for
// repeated solves. Codes are expressed in this normalized frame.
class PreparedBook {
 public:
  explicit PreparedBook(const Codebook& book);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return count_; }
  const double* atom(std::size_t j) const { return atoms_.data() + j * dim_; }

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> atoms_;
};

struct SparseOpts {
  double eps = 1e-6;           // KKT tolerance
  std::size_t max_sweeps = 1000;
  double nnz_cap = 1.0;        // max allowed nonzero fraction
  bool record_history = false;
};

struct SparseResult {
  Code code;
  std::size_t sweeps = 0;
  double kkt_violation = 0.0;
  double objective = 0.0;
  std::vector<double> objective_history;
};

// Cyclic coordinate descent on 1/2 ||Xf - x||^2 + lambda ||f||_1 with
// unit-norm atoms. Returns once the KKT stationarity conditions hold at
// eps; throws Convergence with the residual diagnostics otherwise.
SparseResult sparse_solve(const PreparedBook& book, std::span<const double> x, double lambda,
                          const SparseOpts& opts = {});
Code sparse_encode(const Codebook& book, std::span<const double> x, double lambda,
                   const SparseOpts& opts = {});

// ||X'x||_inf over the normalized atoms: the smallest lambda whose solution
// is exactly zero.
double lambda_max(const PreparedBook& book, std::span<const double> x);
double lambda_max(const Codebook& book, std::span<const double> x);

// Independent KKT check, recomputed from scratch; used by tests and the
// solver's exit condition alike.
double kkt_violation(const PreparedBook& book, std::span<const double> x,
                     std::span<const double> f, double lambda);

// Per-atom one-vs-all max-margin hyperplanes; encoding is f = W'x (+ b).
struct MetricEncoder {
  std::size_t dim = 0;
  std::vector<float> weights;  // m x dim, row j = column j of W
  std::vector<float> biases;   // m
  std::string book_digest;

  std::size_t size() const { return biases.size(); }
};

struct MetricTrainOpts {
  double c = 1.0;
  double tol = 1e-4;
  std::size_t max_epochs = 1000;
  bool bias = true;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

// Trains one binary squared-hinge SVM per atom, that atom the sole positive
// against the other m-1. Solver failures are reported with the atom index.
MetricEncoder train_metric_encoder(const Codebook& book, const MetricTrainOpts& opts = {});

Code metric_encode(const MetricEncoder& enc, std::span<const double> x, bool include_bias = true);

void save_metric_encoder(const MetricEncoder& enc, const std::filesystem::path& path);
MetricEncoder load_metric_encoder(const std::filesystem::path& path);

struct EncodeParams {
  EncodeMode mode = EncodeMode::Sparse;
  double alpha = 0.1;                  // lambda = alpha * lambda_max per patch
  std::optional<double> fixed_lambda;  // overrides alpha when set
  SparseOpts sparse;
  bool metric_bias = true;
};

// Per-book codes concatenated in bank order; length is sum of m_k with
// stable block boundaries.
class BankEncoder {
 public:
  BankEncoder(const CodebookBank& bank, const EncodeParams& params);
  BankEncoder(const CodebookBank& bank, std::vector<MetricEncoder> encoders,
              const EncodeParams& params);

  Code encode(std::span<const double> x) const;
  std::size_t code_length() const { return code_length_; }
  const std::vector<MetricEncoder>& encoders() const { return encoders_; }

 private:
  std::vector<PreparedBook> prepared_;
  std::vector<MetricEncoder> encoders_;
  EncodeParams params_;
  std::size_t dim_ = 0;
  std::size_t code_length_ = 0;
};

}  // namespace duca
