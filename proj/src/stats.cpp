#include "ontosim/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ontosim/errors.hpp"

namespace ontosim {

std::uint64_t Histogram::in_range() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

Histogram histogram(std::span<const double> samples, std::span<const double> edges) {
  if (edges.size() < 2) throw BadEdges("need at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw BadEdges("bin edges must be strictly increasing");
  Histogram h;
  h.counts.assign(edges.size() - 1, 0);
  for (double x : samples) {
    if (x < edges.front()) {
      ++h.underflow;
    } else if (x >= edges.back()) {
      ++h.overflow;
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), x);
      ++h.counts[static_cast<std::size_t>(it - edges.begin() - 1)];
    }
  }
  return h;
}

nlohmann::json GofReport::to_json() const {
  nlohmann::json j{{"test", test}, {"statistic", statistic}, {"dof", dof}, {"p_value", p_value}};
  if (!bins.empty()) {
    auto layout = nlohmann::json::array();
    for (auto [a, b] : bins) layout.push_back({a, b});
    j["bins"] = layout;
  }
  return j;
}

double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

GofReport chi_square_gof(std::span<const std::uint64_t> counts,
                         std::span<const double> expected_probs, double min_expected) {
  if (counts.size() != expected_probs.size() || counts.empty())
    throw InvalidArgument("chi_square_gof: counts and probabilities must match in length");
  double psum = 0.0;
  for (double p : expected_probs) {
    if (!(p >= 0.0)) throw InvalidArgument("chi_square_gof: negative probability");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-9)
    throw InvalidArgument("chi_square_gof: probabilities sum to " + std::to_string(psum));
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);

  struct Pooled {
    int first, last;
    double observed, expected;
  };
  std::vector<Pooled> pooled;
  Pooled cur{0, -1, 0.0, 0.0};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (cur.last < cur.first) cur.first = static_cast<int>(i);
    cur.last = static_cast<int>(i);
    cur.observed += static_cast<double>(counts[i]);
    cur.expected += expected_probs[i] * n;
    if (cur.expected >= min_expected) {
      pooled.push_back(cur);
      cur = {static_cast<int>(i) + 1, static_cast<int>(i), 0.0, 0.0};
    }
  }
  if (cur.last >= cur.first) {
    if (pooled.empty())
      throw InsufficientExpected("total expected count below " + std::to_string(min_expected));
    pooled.back().last = cur.last;
    pooled.back().observed += cur.observed;
    pooled.back().expected += cur.expected;
  }
  if (pooled.size() < 2)
    throw InsufficientExpected("pooling left fewer than two bins with expected >= " +
                               std::to_string(min_expected));

  GofReport r;
  r.test = "chi_square";
  for (const auto& b : pooled) {
    const double d = b.observed - b.expected;
    r.statistic += d * d / b.expected;
    r.bins.emplace_back(b.first, b.last);
  }
  r.dof = static_cast<int>(pooled.size()) - 1;
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

GofReport poisson_count_test(std::span<const std::uint64_t> counts, double mu) {
  if (!(mu >= 0.0)) throw InvalidArgument("poisson_count_test: mu must be >= 0");
  if (counts.empty()) throw InvalidArgument("poisson_count_test: no runs");
  GofReport r;
  r.test = "poisson_count";
  r.dof = 4;
  const double n = static_cast<double>(counts.size());
  if (mu == 0.0) {
    const bool all_zero = std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; });
    r.statistic = all_zero ? 0.0 : INFINITY;
    r.p_value = all_zero ? 1.0 : 0.0;
    return r;
  }
  double sum = 0.0, dispersion = 0.0;
  for (auto c : counts) {
    const double x = static_cast<double>(c);
    sum += x;
    dispersion += (x - mu) * (x - mu) / mu;
  }
  const double z = (sum / n - mu) / std::sqrt(mu / n);
  const double p_mean = boost::math::erfc(std::abs(z) / std::sqrt(2.0));
  const double upper = chi_square_sf(dispersion, n);
  const double lower = dispersion <= 0.0 ? 0.0 : boost::math::gamma_p(0.5 * n, 0.5 * dispersion);
  const double p_var = std::min(1.0, 2.0 * std::min(upper, lower));

  if (p_mean <= 0.0 || p_var <= 0.0) {
    r.statistic = INFINITY;
    r.p_value = 0.0;
    return r;
  }
  r.statistic = -2.0 * (std::log(p_mean) + std::log(p_var));
  r.p_value = chi_square_sf(r.statistic, 4);
  return r;
}

double kolmogorov_sf(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.3) {
    // Small-t form: 1 - sqrt(2 pi)/t sum exp(-(2j-1)^2 pi^2 / (8 t^2)).
    const double pi2 = M_PI * M_PI;
    double s = 0.0;
    for (int j = 1; j <= 8; ++j) {
      const double a = 2.0 * j - 1.0;
      s += std::exp(-a * a * pi2 / (8.0 * t * t));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / t * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    s += (j % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

GofReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 10) throw InvalidArgument("ks_test needs at least 10 samples");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  GofReport r;
  r.test = "kolmogorov_smirnov";
  r.statistic = d;
  r.dof = static_cast<int>(xs.size());
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

double sign_test_positive(std::span<const double> differences) {
  unsigned n = 0, pos = 0;
  for (double d : differences) {
    if (d == 0.0) continue;
    ++n;
    if (d > 0.0) ++pos;
  }
  if (n == 0) return 1.0;
  double p = 0.0;
  for (unsigned k = pos; k <= n; ++k)
    p += boost::math::binomial_coefficient<double>(n, k) * std::pow(0.5, n);
  return std::min(1.0, p);
}

}  // namespace ontosim
