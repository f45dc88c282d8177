#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace duca {

struct SvmDiag {
  std::size_t epochs = 0;
  double max_violation = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  std::vector<double> dual_objective_history;  // filled when opts.record_history
};

// L2-regularized squared-hinge binary linear SVM:
//   min_w 1/2 w'w + C sum_i max(0, 1 - y_i w'x_i)^2
// The bias, when enabled, is a regularized intercept trained as an
// appended constant-1 feature.
struct BinarySvm {
  std::vector<double> w;
  double b = 0.0;
  double c = 1.0;
  bool has_bias = true;
  SvmDiag diag;
};

struct SvmOpts {
  double tol = 1e-4;
  std::size_t max_epochs = 1000;
  bool bias = true;
  std::uint64_t seed = 1;
  bool record_history = false;
};

// Dual coordinate descent with a seeded shuffle of the coordinate order per
// epoch. Throws InvalidInput unless both labels appear, Convergence if the
// projected-gradient violation is still above tol at max_epochs.
BinarySvm train_binary(std::span<const double> samples, std::size_t n, std::size_t dim,
                       std::span<const int> labels, double c, const SvmOpts& opts = {});

BinarySvm train_binary(const std::vector<std::vector<double>>& samples,
                       const std::vector<int>& labels, double c, const SvmOpts& opts = {});

double decision(const BinarySvm& svm, std::span<const double> x);

}  // namespace duca
