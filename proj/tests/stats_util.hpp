#pragma once

#include <cmath>
#include <map>
#include <vector>

// Small test-side statistics helpers, independent of the library under test.
namespace teststats {

// Regularized lower incomplete gamma P(a,x) via series / continued fraction.
inline double gamma_p(double a, double x) {
  if (x < 0 || a <= 0) return 0;
  if (x == 0) return 0;
  double gln = std::lgamma(a);
  if (x < a + 1) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; i++) {
      ap += 1;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1 - a, c = 1e300, d = 1 / b, h = d;
  for (int i = 1; i < 500; i++) {
    double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < 1e-14) break;
  }
  return 1 - std::exp(-x + a * std::log(x) - gln) * h;
}

// p-value of a chi-square statistic with k degrees of freedom.
inline double chi2_pvalue(double chi2, int dof) { return 1.0 - gamma_p(dof / 2.0, chi2 / 2.0); }

// Two-sample chi-square over binned counts; bins with low expectation merged.
inline double two_sample_chi2_pvalue(std::vector<long>& a, std::vector<long>& b) {
  // Merge sparse bins from the right.
  auto merged = [&](std::vector<long>& v, size_t i) { return (double)v[i]; };
  (void)merged;
  std::vector<std::pair<double, double>> bins;
  double ca = 0, cb = 0;
  for (size_t i = 0; i < a.size(); i++) {
    ca += (double)a[i];
    cb += (double)b[i];
    if (ca + cb >= 10) {
      bins.push_back({ca, cb});
      ca = cb = 0;
    }
  }
  if (ca + cb > 0) {
    if (!bins.empty()) {
      bins.back().first += ca;
      bins.back().second += cb;
    } else {
      bins.push_back({ca, cb});
    }
  }
  double na = 0, nb = 0;
  for (auto& [x, y] : bins) {
    na += x;
    nb += y;
  }
  double k1 = std::sqrt(nb / na), k2 = std::sqrt(na / nb);
  double chi2 = 0;
  int dof = ((int)bins.size()) - 1;
  for (auto& [x, y] : bins) {
    if (x + y <= 0) continue;
    double d = k1 * x - k2 * y;
    chi2 += d * d / (x + y);
  }
  if (dof < 1) return 1.0;
  return chi2_pvalue(chi2, dof);
}

}  // namespace teststats
