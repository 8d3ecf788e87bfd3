#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace homchain::stats {

inline constexpr double kZ95 = 1.959963984540054;

// Welford accumulator.
class RunningStats {
public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double var_sample() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_mean() const { return n_ > 1 ? std::sqrt(var_sample() / static_cast<double>(n_)) : 0.0; }
  double ci95() const { return kZ95 * stderr_mean(); }

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Summary {
  double mean = 0.0;
  double stderr_mean = 0.0;
  double ci95 = 0.0;
  std::size_t samples = 0;
};

// Summation in index order so the result does not depend on how the samples
// were produced.
inline Summary summarize(std::span<const double> xs) {
  RunningStats rs;
  for (double x : xs) rs.add(x);
  return Summary{rs.mean(), rs.stderr_mean(), rs.ci95(), rs.count()};
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Asymptotic critical value of the two-sample KS test at level 1%.
inline double ks_critical_1pct(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return 1.6276 * std::sqrt((nn + mm) / (nn * mm));
}

// Least-squares fit v(N) = v_inf + c / N.
struct InverseFit {
  double v_inf = 0.0;
  double c = 0.0;
};

inline InverseFit fit_inverse(std::span<const double> ns, std::span<const double> vs) {
  if (ns.size() != vs.size() || ns.size() < 2) throw std::invalid_argument("fit_inverse: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ns.size());
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const double x = 1.0 / ns[k];
    sx += x;
    sy += vs[k];
    sxx += x * x;
    sxy += x * vs[k];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fit_inverse: degenerate abscissae");
  InverseFit f;
  f.c = (n * sxy - sx * sy) / den;
  f.v_inf = (sy - f.c * sx) / n;
  return f;
}

} // namespace homchain::stats
