#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ontosim {

struct Histogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  std::uint64_t in_range() const;
};

/// Bins are half-open [edge_i, edge_{i+1}); a sample equal to the last edge
/// counts as overflow. Throws BadEdges unless edges are strictly increasing
/// (at least two).
Histogram histogram(std::span<const double> samples, std::span<const double> edges);

struct GofReport {
  std::string test;
  double statistic = 0.0;
  int dof = 1;
  double p_value = 1.0;
  /// For binned tests: the original bin index range [first, last] of each
  /// pooled bin.
  std::vector<std::pair<int, int>> bins;

  nlohmann::json to_json() const;
};

/// Pearson chi-square goodness of fit. Adjacent bins are pooled left to right
/// until each expected count is >= min_expected; dof = pooled bins - 1.
GofReport chi_square_gof(std::span<const std::uint64_t> counts,
                         std::span<const double> expected_probs, double min_expected = 5.0);

/// Tests per-run event counts against Poisson(mu): a z-test on the mean and a
/// two-sided dispersion test (sum (c - mu)^2 / mu ~ chi^2_n), combined with
/// Fisher's method. mu = 0 with all-zero counts passes with p = 1.
GofReport poisson_count_test(std::span<const std::uint64_t> counts, double mu);

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
GofReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);
/// Kolmogorov distribution survival function Q(t) = 2 sum (-1)^(j-1) e^(-2 j^2 t^2).
double kolmogorov_sf(double t);
/// One-sided binomial sign test: P(X >= positives) for X ~ Bin(n, 1/2), where
/// n counts the non-zero differences.
double sign_test_positive(std::span<const double> differences);

}  // namespace ontosim
