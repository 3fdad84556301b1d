#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lexdiv::stats {

double mean(std::span<const double> x);
// Sample variance (n - 1 denominator); 0 for n < 2.
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);
double weighted_mean(std::span<const double> x, std::span<const double> w);
// Linear-interpolated quantile, q in [0, 1]. x need not be sorted.
double quantile(std::vector<double> x, double q);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> x);
double pearson(std::span<const double> a, std::span<const double> b);

// Spearman's rho as the Pearson correlation of midranks. Empty when either
// side has zero rank variance.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  std::vector<double> coefficients;  // intercept first
  double r_squared = 0.0;
};

// Ordinary (or weighted, when weights are given) least squares with an
// intercept column prepended to the predictors. predictors[j] is column j.
LinearFit least_squares(const std::vector<std::vector<double>>& predictors,
                        std::span<const double> y,
                        std::span<const double> weights = {});

// Two-sided one-sample Kolmogorov-Smirnov test against Uniform(0, 1).
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_uniform(std::vector<double> sample);
// Survival function of the Kolmogorov distribution with small-sample
// correction (Stephens): P(D_n > d).
double kolmogorov_p(double d, std::size_t n);

}  // namespace lexdiv::stats
