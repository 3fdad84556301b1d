#include "lexdiv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lexdiv/error.hpp"
#include "lexdiv/linalg.hpp"

namespace lexdiv::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

double weighted_mean(std::span<const double> x, std::span<const double> w) {
  double sw = 0.0, s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += w[i] * x[i];
    sw += w[i];
  }
  return sw > 0.0 ? s / sw : 0.0;
}

double quantile(std::vector<double> x, double q) {
  require(!x.empty(), "quantile of empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + frac * (x[hi] - x[lo]);
}

std::vector<double> midranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nan("");
  return sab / std::sqrt(saa * sbb);
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "spearman: length mismatch");
  const auto ra = midranks(a);
  const auto rb = midranks(b);
  const double rho = pearson(ra, rb);
  if (std::isnan(rho)) return std::nullopt;
  return std::clamp(rho, -1.0, 1.0);
}

LinearFit least_squares(const std::vector<std::vector<double>>& predictors,
                        std::span<const double> y, std::span<const double> weights) {
  const std::size_t n = y.size();
  const std::size_t p = predictors.size() + 1;
  require(n >= p, "least_squares: not enough observations");
  for (const auto& col : predictors) require(col.size() == n, "least_squares: column length mismatch");
  require(weights.empty() || weights.size() == n, "least_squares: weight length mismatch");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  auto x = [&](std::size_t i, std::size_t j) { return j == 0 ? 1.0 : predictors[j - 1][i]; };

  linalg::Matrix xtx(p, p);
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += w(i) * x(i, a) * y[i];
      for (std::size_t b = 0; b < p; ++b) xtx(a, b) += w(i) * x(i, a) * x(i, b);
    }
  }
  LinearFit fit;
  fit.coefficients = linalg::cholesky_solve(xtx, xty);

  double sw = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    ybar += w(i) * y[i];
  }
  ybar /= sw;
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t a = 0; a < p; ++a) pred += fit.coefficients[a] * x(i, a);
    ss_res += w(i) * (y[i] - pred) * (y[i] - pred);
    ss_tot += w(i) * (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 0.0;
  return fit;
}

double kolmogorov_p(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniform(std::vector<double> sample) {
  require(!sample.empty(), "ks_uniform: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_p(d, sample.size())};
}

}  // namespace lexdiv::stats
