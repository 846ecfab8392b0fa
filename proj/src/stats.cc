//
// Copyright 2026 The dpleak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpleak/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "boost/math/distributions/binomial.hpp"
#include "boost/math/distributions/chi_squared.hpp"
#include "boost/math/distributions/normal.hpp"

namespace dpleak {
namespace {

std::vector<double> Ranks(const std::vector<double>& x) {
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double ChiSquareSurvival(double statistic, double dof) {
  if (dof < 1) return 1.0;
  return boost::math::cdf(
      boost::math::complement(boost::math::chi_squared(dof), statistic));
}

}  // namespace

double Mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) /
         static_cast<double>(x.size());
}

double Variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = Mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double SortedQuantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double Pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return Pearson(Ranks(x), Ranks(y));
}

double StandardNormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double KolmogorovPValue(double d, double effective_n) {
  const double sqrt_n = std::sqrt(effective_n);
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult KsTest(std::vector<double> samples,
                  const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f,
                  f - static_cast<double>(i) / n});
  }
  return {d, KolmogorovPValue(d, n)};
}

TestResult KsTest2(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return {d, KolmogorovPValue(d, na * nb / (na + nb))};
}

TestResult ChiSquareGof(const std::vector<uint64_t>& observed,
                        const std::vector<double>& probabilities,
                        double min_expected) {
  double total = 0.0;
  for (uint64_t o : observed) total += static_cast<double>(o);
  std::vector<double> obs(observed.begin(), observed.end());
  std::vector<double> exp;
  double mass = 0.0;
  for (double p : probabilities) {
    exp.push_back(p * total);
    mass += p;
  }
  if (mass < 1.0 - 1e-12) {
    obs.push_back(0.0);
    exp.push_back((1.0 - mass) * total);
  }
  std::vector<double> mo, me;
  double acc_o = 0.0, acc_e = 0.0;
  for (size_t i = 0; i < exp.size(); ++i) {
    acc_o += obs[i];
    acc_e += exp[i];
    if (acc_e >= min_expected) {
      mo.push_back(acc_o);
      me.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (me.empty()) {
      mo.push_back(acc_o);
      me.push_back(acc_e);
    } else {
      mo.back() += acc_o;
      me.back() += acc_e;
    }
  }
  double stat = 0.0;
  for (size_t i = 0; i < me.size(); ++i) {
    stat += (mo[i] - me[i]) * (mo[i] - me[i]) / me[i];
  }
  return {stat, ChiSquareSurvival(stat, static_cast<double>(me.size()) - 1)};
}

TestResult ChiSquareHomogeneity(const std::vector<uint64_t>& a,
                                const std::vector<uint64_t>& b) {
  const size_t cells = std::max(a.size(), b.size());
  std::vector<double> ca(cells, 0.0), cb(cells, 0.0);
  double na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) na += ca[i] = static_cast<double>(a[i]);
  for (size_t i = 0; i < b.size(); ++i) nb += cb[i] = static_cast<double>(b[i]);
  const double n = na + nb;
  std::vector<double> ma, mb;
  double acc_a = 0.0, acc_b = 0.0;
  for (size_t i = 0; i < cells; ++i) {
    acc_a += ca[i];
    acc_b += cb[i];
    const double col = acc_a + acc_b;
    if (col * std::min(na, nb) / n >= 5.0) {
      ma.push_back(acc_a);
      mb.push_back(acc_b);
      acc_a = acc_b = 0.0;
    }
  }
  if (acc_a + acc_b > 0.0 && !ma.empty()) {
    ma.back() += acc_a;
    mb.back() += acc_b;
  }
  double stat = 0.0;
  for (size_t i = 0; i < ma.size(); ++i) {
    const double col = ma[i] + mb[i];
    const double ea = col * na / n;
    const double eb = col * nb / n;
    stat += (ma[i] - ea) * (ma[i] - ea) / ea + (mb[i] - eb) * (mb[i] - eb) / eb;
  }
  return {stat, ChiSquareSurvival(stat, static_cast<double>(ma.size()) - 1)};
}

double BinomialUpperTail(uint64_t k, uint64_t n, double p) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  const boost::math::binomial dist(static_cast<double>(n), p);
  return boost::math::cdf(
      boost::math::complement(dist, static_cast<double>(k - 1)));
}

double BinomialLowerTail(uint64_t k, uint64_t n, double p) {
  if (k >= n) return 1.0;
  const boost::math::binomial dist(static_cast<double>(n), p);
  return boost::math::cdf(dist, static_cast<double>(k));
}

double BinomialTwoSided(uint64_t k, uint64_t n, double p) {
  return std::min(
      1.0, 2.0 * std::min(BinomialUpperTail(k, n, p), BinomialLowerTail(k, n, p)));
}

}  // namespace dpleak
