#include <cmath>
#include <numeric>

#include "phosml/error.hpp"
#include "phosml/kernels.hpp"
#include "phosml/learners.hpp"

namespace phosml {

namespace {

Matrix gram(const Matrix& a, const Matrix& b, KernelType kernel, double gamma) {
  return kernel == KernelType::Rbf ? kernels::rbf_gram(a, b, gamma) : kernels::linear_gram(a, b);
}

// In-place Cholesky of a symmetric positive definite matrix (lower factor),
// then forward/back substitution for one right-hand side.
std::vector<double> cholesky_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double floor = static_cast<double>(n) * 1e-15 * std::max(max_diag, 1e-300);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > floor))
      throw Error(Errc::SingularKernel, "K + alpha I is not positive definite (pivot " + std::to_string(j) +
                                            "); increase alpha or remove duplicate rows");
    const double l = std::sqrt(d);
    a(j, j) = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / l;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
    b[i] = s / a(i, i);
  }
  return b;
}

}  // namespace

// Kernel ridge regression on standardized features and centred targets:
// (K + alpha I) a = y - mean(y), f(x) = sum_i a_i k(x, x_i) + mean(y).
KrrModel train_krr(const Matrix& x, std::span<const double> y, const KrrParams& p) {
  KrrModel m;
  m.scaler = fit_scaler(x);
  m.train = apply_scaler(x, m.scaler);
  m.kernel = p.kernel;
  m.gamma = p.gamma.value_or(1.0 / static_cast<double>(std::max<std::size_t>(x.cols(), 1)));
  m.intercept = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  Matrix k = gram(m.train, m.train, m.kernel, m.gamma);
  for (std::size_t i = 0; i < k.rows(); ++i) k(i, i) += p.alpha;
  std::vector<double> rhs(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) rhs[i] = y[i] - m.intercept;
  m.dual = cholesky_solve(std::move(k), std::move(rhs));
  return m;
}

std::vector<double> predict_krr(const KrrModel& m, const Matrix& x) {
  const Matrix k = gram(apply_scaler(x, m.scaler), m.train, m.kernel, m.gamma);
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = m.intercept + kernels::dot(k.row(i), m.dual);
  return out;
}

}  // namespace phosml
