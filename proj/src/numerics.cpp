#include "bcp/numerics.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bcp/error.hpp"

namespace bcp::num {

void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<double> rhs,
                       std::span<double> scratch) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  double denom = diag[0];
  scratch[0] = sup[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * scratch[i - 1];
    scratch[i] = (i + 1 < n) ? sup[i] / denom : 0.0;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order) {
  const int n = static_cast<int>(nodes.size()) - 1;
  if (order < 0 || order > n) throw std::invalid_argument("fd_weights: order exceeds stencil");
  // c[j][k]: weight of node j for derivative k.
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = c[j][order];
  return w;
}

double derivative(const std::function<double(double)>& f, double x, double h, double lo,
                  double hi) {
  if (x - h >= lo && x + h <= hi) return (f(x + h) - f(x - h)) / (2.0 * h);
  if (x - h < lo) return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
  return (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
}

double second_derivative(const std::function<double(double)>& f, double x, double h,
                         double lo, double hi) {
  if (x - h >= lo && x + h <= hi) return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
  const double s = (x - h < lo) ? h : -h;
  return (2.0 * f(x) - 5.0 * f(x + s) + 4.0 * f(x + 2.0 * s) - f(x + 3.0 * s)) / (h * h);
}

namespace {
double pairwise_impl(const double* p, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_impl(p, half) + pairwise_impl(p + half, n - half);
}
}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_impl(values.data(), values.size());
}

std::size_t locate(std::span<const double> xs, double x) {
  if (xs.size() < 2) return 0;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = (it == xs.begin()) ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  return std::min(i, xs.size() - 2);
}

double interp_linear(std::span<const double> xs, std::span<const double> ys, double x) {
  if (xs.size() == 1) return ys[0];
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const std::size_t i = locate(xs, x);
  const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return (1.0 - w) * ys[i] + w * ys[i + 1];
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, tol);
}

const GaussRule& gauss_legendre(int points) {
  static const std::vector<GaussRule> rules = [] {
    std::vector<GaussRule> r(9);
    for (int n = 2; n <= 8; ++n) {
      GaussRule rule;
      rule.nodes.resize(n);
      rule.weights.resize(n);
      // Newton iteration on Legendre polynomials.
      for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
          double p0 = 1.0;
          double p1 = z;
          for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
          }
          dp = n * (z * p1 - p0) / (z * z - 1.0);
          const double dz = p1 / dp;
          z -= dz;
          if (std::abs(dz) < 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
      }
      r[n] = std::move(rule);
    }
    return r;
  }();
  if (points < 2 || points > 8) throw std::invalid_argument("gauss_legendre: 2..8 points");
  return rules[points];
}

double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    s += 0.5 * (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]);
  return s;
}

std::vector<double> cumulative_trapezoid(std::span<const double> xs,
                                         std::span<const double> ys) {
  std::vector<double> out(xs.size(), 0.0);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    out[i + 1] = out[i] + 0.5 * (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]);
  return out;
}

std::vector<double> polyfit(std::span<const double> xs, std::span<const double> ys,
                            int degree) {
  const int m = degree + 1;
  if (xs.size() < static_cast<std::size_t>(m)) throw DomainError("polyfit: too few points");
  // Normal equations on a rescaled abscissa, solved by Gaussian elimination.
  double scale = 0.0;
  for (double x : xs) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) scale = 1.0;
  std::vector<double> a(m * (m + 1), 0.0);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k] / scale;
    std::vector<double> pw(m);
    pw[0] = 1.0;
    for (int i = 1; i < m; ++i) pw[i] = pw[i - 1] * x;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) a[i * (m + 1) + j] += pw[i] * pw[j];
      a[i * (m + 1) + m] += pw[i] * ys[k];
    }
  }
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[r * (m + 1) + col]) > std::abs(a[piv * (m + 1) + col])) piv = r;
    for (int j = 0; j <= m; ++j) std::swap(a[col * (m + 1) + j], a[piv * (m + 1) + j]);
    const double d = a[col * (m + 1) + col];
    if (d == 0.0) throw DomainError("polyfit: singular system");
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[r * (m + 1) + col] / d;
      for (int j = col; j <= m; ++j) a[r * (m + 1) + j] -= f * a[col * (m + 1) + j];
    }
  }
  std::vector<double> coeffs(m);
  double s = 1.0;
  for (int i = 0; i < m; ++i) {
    coeffs[i] = a[i * (m + 1) + m] / a[i * (m + 1) + i] / s;
    s *= scale;
  }
  return coeffs;
}

}  // namespace bcp::num
