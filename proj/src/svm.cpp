#include "duca/svm.hpp"

#include <algorithm>
#include <cmath>

#include "duca/error.hpp"
#include "duca/kernels.hpp"
#include "duca/rng.hpp"

namespace duca {

namespace {

// Dual of the squared-hinge SVM: min_a 1/2 a'Qa + 1/(4C) sum a_i^2 - sum a_i
// over a >= 0, with w = sum_i a_i y_i x_i. Coordinate updates are exact:
//   a_i <- max(0, a_i - G_i / (x_i'x_i + 1/(2C)))
//   G_i = y_i w'x_i - 1 + a_i / (2C)
double primal_objective(const std::vector<double>& w, std::span<const double> xs, std::size_t n,
                        std::size_t dim, std::span<const int> y, double c) {
  double obj = 0.5 * kernels::nrm2sq(w.data(), w.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double margin = 1.0 - y[i] * kernels::dot(w.data(), xs.data() + i * dim, dim);
    if (margin > 0.0) obj += c * margin * margin;
  }
  return obj;
}

}  // namespace

BinarySvm train_binary(std::span<const double> samples, std::size_t n, std::size_t dim,
                       std::span<const int> labels, double c, const SvmOpts& opts) {
  if (c <= 0.0) fail(ErrorKind::InvalidInput, "C must be positive");
  if (n == 0 || dim == 0) fail(ErrorKind::InvalidInput, "empty training set");
  if (samples.size() != n * dim || labels.size() != n) {
    fail(ErrorKind::InvalidInput, "training matrix does not match n x dim");
  }
  bool has_pos = false, has_neg = false;
  for (const int y : labels) {
    if (y == 1) has_pos = true;
    else if (y == -1) has_neg = true;
    else fail(ErrorKind::InvalidInput, "labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) {
    fail(ErrorKind::InvalidInput, "training set must contain both classes");
  }

  const std::size_t d_aug = dim + (opts.bias ? 1 : 0);
  std::vector<double> xs(n * d_aug);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(samples.begin() + static_cast<std::ptrdiff_t>(i * dim),
              samples.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim),
              xs.begin() + static_cast<std::ptrdiff_t>(i * d_aug));
    if (opts.bias) xs[i * d_aug + dim] = 1.0;
  }

  const double diag_add = 1.0 / (2.0 * c);
  std::vector<double> q_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    q_diag[i] = kernels::nrm2sq(xs.data() + i * d_aug, d_aug) + diag_add;
  }

  std::vector<double> w(d_aug, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  Rng rng(opts.seed);
  SvmDiag diag;
  bool converged = false;

  for (std::size_t epoch = 0; epoch < opts.max_epochs; ++epoch) {
    rng.shuffle(order);
    double max_violation = 0.0;
    for (const std::size_t i : order) {
      const double* xi = xs.data() + i * d_aug;
      const double yi = labels[i];
      const double grad = yi * kernels::dot(w.data(), xi, d_aug) - 1.0 + alpha[i] * diag_add;
      const double pg = alpha[i] > 0.0 ? grad : std::min(grad, 0.0);
      max_violation = std::max(max_violation, std::fabs(pg));
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::max(0.0, alpha[i] - grad / q_diag[i]);
      if (alpha[i] != old) {
        kernels::axpy((alpha[i] - old) * yi, xi, w.data(), d_aug);
      }
    }
    diag.epochs = epoch + 1;
    diag.max_violation = max_violation;
    if (opts.record_history) {
      double alpha_sq = 0.0, alpha_sum = 0.0;
      for (const double a : alpha) {
        alpha_sq += a * a;
        alpha_sum += a;
      }
      // the minimized dual: 1/2 a'Q~a - sum a
      diag.dual_objective_history.push_back(
          0.5 * (kernels::nrm2sq(w.data(), d_aug) + alpha_sq * diag_add) - alpha_sum);
    }
    if (max_violation < opts.tol) {
      converged = true;
      break;
    }
  }

  diag.primal_objective = primal_objective(w, xs, n, d_aug, labels, c);
  double alpha_sq = 0.0, alpha_sum = 0.0;
  for (const double a : alpha) {
    alpha_sq += a * a;
    alpha_sum += a;
  }
  diag.dual_objective =
      alpha_sum - 0.5 * kernels::nrm2sq(w.data(), d_aug) - alpha_sq / (4.0 * c);
  diag.duality_gap = diag.primal_objective - diag.dual_objective;

  if (!converged) {
    fail(ErrorKind::Convergence,
         "svm did not converge in " + std::to_string(opts.max_epochs) + " epochs (violation " +
             std::to_string(diag.max_violation) + ", tol " + std::to_string(opts.tol) + ")");
  }

  BinarySvm svm;
  svm.c = c;
  svm.has_bias = opts.bias;
  if (opts.bias) {
    svm.w.assign(w.begin(), w.end() - 1);
    svm.b = w.back();
  } else {
    svm.w = std::move(w);
    svm.b = 0.0;
  }
  svm.diag = diag;
  return svm;
}

BinarySvm train_binary(const std::vector<std::vector<double>>& samples,
                       const std::vector<int>& labels, double c, const SvmOpts& opts) {
  if (samples.empty()) fail(ErrorKind::InvalidInput, "empty training set");
  const std::size_t dim = samples.front().size();
  std::vector<double> flat;
  flat.reserve(samples.size() * dim);
  for (const auto& s : samples) {
    if (s.size() != dim) fail(ErrorKind::InvalidInput, "ragged training samples");
    flat.insert(flat.end(), s.begin(), s.end());
  }
  return train_binary(flat, samples.size(), dim, labels, c, opts);
}

double decision(const BinarySvm& svm, std::span<const double> x) {
  if (x.size() != svm.w.size()) {
    fail(ErrorKind::InvalidInput, "decision input dimension " + std::to_string(x.size()) +
                                      " does not match model dimension " +
                                      std::to_string(svm.w.size()));
  }
  return kernels::dot(svm.w.data(), x.data(), x.size()) + svm.b;
}

}  // namespace duca
