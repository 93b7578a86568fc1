#include <cmath>
#include <limits>
#include <numeric>

#include "phosml/kernels.hpp"
#include "phosml/learners.hpp"

namespace phosml {

// Sequential minimal optimization over the 2n-variable epsilon-SVR dual,
// choosing the maximal violating pair each iteration (lowest index on ties).
// Variables t < n carry sign +1 (alpha_t), t >= n carry sign -1 (alpha*_t).
SvrDual solve_svr_dual(const Matrix& gram, std::span<const double> z, double c, double epsilon, double tol,
                       std::size_t max_iter) {
  constexpr double kTau = 1e-12;
  const std::size_t n = z.size();
  const std::size_t l = 2 * n;
  auto sign = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
  auto base = [n](std::size_t t) { return t < n ? t : t - n; };
  auto q = [&](std::size_t s, std::size_t t) { return sign(s) * sign(t) * gram(base(s), base(t)); };

  SvrDual dual;
  dual.alpha.assign(l, 0.0);
  dual.gradient.resize(l);
  for (std::size_t t = 0; t < l; ++t) dual.gradient[t] = t < n ? epsilon - z[t] : epsilon + z[t - n];

  auto& a = dual.alpha;
  auto& g = dual.gradient;
  auto in_up = [&](std::size_t t) { return sign(t) > 0 ? a[t] < c : a[t] > 0; };
  auto in_low = [&](std::size_t t) { return sign(t) > 0 ? a[t] > 0 : a[t] < c; };

  while (dual.iterations < max_iter) {
    std::size_t i = l, j = l;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l; ++t) {
      const double v = -sign(t) * g[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i == l || j == l || m_up - m_low < tol) {
      dual.converged = true;
      break;
    }
    ++dual.iterations;

    const double old_i = a[i], old_j = a[j];
    const double qii = gram(base(i), base(i)), qjj = gram(base(j), base(j)), qij = q(i, j);
    if (sign(i) != sign(j)) {
      double quad = qii + qjj + 2 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > 0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = qii + qjj - 2 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }
    const double di = a[i] - old_i, dj = a[j] - old_j;
    for (std::size_t t = 0; t < l; ++t) g[t] += q(t, i) * di + q(t, j) * dj;
  }

  // Offset from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = sign(t) * g[t];
    if (a[t] >= c) {
      if (sign(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a[t] <= 0) {
      if (sign(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  dual.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2;
  return dual;
}

// Features are standardized and targets scaled to zero mean / unit
// (population) deviation before solving, so c and epsilon are unit-free.
SvrModel train_svr(const Matrix& x, std::span<const double> y, const SvrParams& p) {
  SvrModel m;
  m.scaler = fit_scaler(x);
  const Matrix train = apply_scaler(x, m.scaler);
  m.gamma = p.gamma.value_or(1.0 / static_cast<double>(std::max<std::size_t>(x.cols(), 1)));

  const std::size_t n = y.size();
  double lo = y[0], hi = y[0], sum = 0.0;
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  if (lo == hi) {
    m.y_mean = lo;
  } else {
    m.y_mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : y) ss += (v - m.y_mean) * (v - m.y_mean);
    m.y_scale = std::sqrt(ss / static_cast<double>(n));
    if (!(m.y_scale > 0)) m.y_scale = 1.0;
  }
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (y[i] - m.y_mean) / m.y_scale;

  const Matrix gram = kernels::rbf_gram(train, train, m.gamma);
  const SvrDual dual = solve_svr_dual(gram, z, p.c, p.epsilon, p.tol, p.max_iter);
  m.rho = dual.rho;
  m.iterations = dual.iterations;

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < n; ++i) {
    const double coef = dual.alpha[i] - dual.alpha[i + n];
    if (coef != 0.0) {
      support.push_back(i);
      m.coef.push_back(coef);
    }
  }
  m.support = train.select_rows(support);
  return m;
}

std::vector<double> predict_svr(const SvrModel& m, const Matrix& x) {
  std::vector<double> out(x.rows(), m.y_mean);
  if (m.support.rows() == 0) {
    for (auto& v : out) v = m.y_mean - m.rho * m.y_scale;
    return out;
  }
  const Matrix k = kernels::rbf_gram(apply_scaler(x, m.scaler), m.support, m.gamma);
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = m.y_mean + (kernels::dot(k.row(i), m.coef) - m.rho) * m.y_scale;
  return out;
}

}  // namespace phosml
