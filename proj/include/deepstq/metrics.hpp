#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "deepstq/error.hpp"
#include "deepstq/optimize.hpp"

namespace deepstq {

namespace detail {

inline void check_pair(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size())
    throw InvalidArgument(std::string(who) + ": length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  if (a.size() < 3)
    throw InvalidArgument(std::string(who) + ": need at least 3 samples, got " +
                          std::to_string(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
      throw InvalidArgument(std::string(who) + ": non-finite input");
}

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double pearson_unchecked(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelation("correlation of a constant sequence");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace detail

// Fractional ranks starting at 1; tied values share the mean of their ranks.
inline std::vector<double> mid_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i + 1;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

inline double plcc(std::span<const double> pred, std::span<const double> truth) {
  detail::check_pair(pred, truth, "plcc");
  return detail::pearson_unchecked(pred, truth);
}

// Spearman correlation: Pearson correlation of mid-ranks.
inline double srocc(std::span<const double> pred, std::span<const double> truth) {
  detail::check_pair(pred, truth, "srocc");
  const auto rp = mid_ranks(pred);
  const auto rt = mid_ranks(truth);
  return detail::pearson_unchecked(rp, rt);
}

// Q(x) = (b1 - b2) / (1 + exp((x - b3) / b4)) + b2 [+ b5 * x]
struct LogisticParams {
  double beta1 = 1.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double beta4 = 1.0;
  double beta5 = 0.0;  // optional linear term, zero unless fitted
};

inline double apply_logistic(const LogisticParams& p, double x) {
  const double z = (x - p.beta3) / p.beta4;
  double s;  // 1 / (1 + e^z), evaluated without overflow
  if (std::isnan(z)) {
    s = 0.5;
  } else if (z > 0) {
    const double e = std::exp(-z);
    s = e / (1.0 + e);
  } else {
    s = 1.0 / (1.0 + std::exp(z));
  }
  double q = (p.beta1 - p.beta2) * s + p.beta2;
  if (p.beta5 != 0.0) q += p.beta5 * x;
  return q;
}

struct LogisticFitOptions {
  bool linear_term = false;  // fit beta5 as well
  NelderMeadOptions optimizer{};
};

struct LogisticFit {
  LogisticParams params;
  double sse = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

// Least-squares fit of the logistic mapping by Nelder-Mead. The fit runs on
// z-scored x and y; parameters are mapped back afterwards.
inline LogisticFit fit_logistic(std::span<const double> x, std::span<const double> y,
                                const LogisticFitOptions& opt = {}) {
  if (x.size() != y.size()) throw InvalidArgument("fit_logistic: length mismatch");
  if (x.size() < 5)
    throw InvalidArgument("fit_logistic: need at least 5 samples, got " + std::to_string(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw InvalidArgument("fit_logistic: non-finite input");

  const auto n = static_cast<double>(x.size());
  const double mx = detail::mean(x);
  const double my = detail::mean(y);
  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
    cxy += (x[i] - mx) * (y[i] - my);
  }
  if (vy == 0.0) throw InvalidArgument("fit_logistic: y is constant");
  const double sx = vx > 0.0 ? std::sqrt(vx / n) : 1.0;
  const double sy = std::sqrt(vy / n);

  std::vector<double> xs(x.size()), ys(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xs[i] = (x[i] - mx) / sx;
    ys[i] = (y[i] - my) / sy;
  }

  // beta1 = max y, beta2 = min y, beta3 = mean x; with beta1 > beta2 a
  // positive beta4 makes Q decreasing, so its sign follows the data trend.
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  const double b4 = cxy < 0.0 ? 1.0 : -1.0;  // std of z-scored x is 1
  std::vector<double> start = {*ymax, *ymin, 0.0, b4};
  std::vector<double> steps = {0.1 * (*ymax - *ymin), 0.1 * (*ymax - *ymin), 0.1, 0.1};
  if (opt.linear_term) {
    start.push_back(0.0);
    steps.push_back(0.01);
  }

  auto unpack = [&](const std::vector<double>& v) {
    LogisticParams p{v[0], v[1], v[2], v[3], v.size() > 4 ? v[4] : 0.0};
    return p;
  };
  auto sse = [&](const std::vector<double>& v) {
    const LogisticParams p = unpack(v);
    if (p.beta4 == 0.0) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = apply_logistic(p, xs[i]) - ys[i];
      s += r * r;
    }
    return s;
  };

  auto nm = nelder_mead(sse, start, steps, opt.optimizer);
  if (opt.linear_term) {
    // Also start from the least-squares line with the sigmoid fitted to its
    // residuals, in both orientations; keep the best.
    const double r = vx > 0.0 ? cxy / std::sqrt(vx * vy) : 0.0;
    double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      rmin = std::min(rmin, ys[i] - r * xs[i]);
      rmax = std::max(rmax, ys[i] - r * xs[i]);
    }
    const double span = std::max(rmax - rmin, 1e-3);
    for (double sgn : {1.0, -1.0}) {
      const std::vector<double> s2 = {rmax, rmin, 0.0, sgn, r};
      const std::vector<double> st2 = {0.1 * span, 0.1 * span, 0.1, 0.1, 0.01};
      auto alt = nelder_mead(sse, s2, st2, opt.optimizer);
      alt.iterations += nm.iterations;
      if (alt.value < nm.value) nm = std::move(alt);
    }
  }
  const LogisticParams z = unpack(nm.x);

  LogisticFit fit;
  fit.params.beta5 = z.beta5 * sy / sx;
  const double shift = -z.beta5 * sy * mx / sx;
  fit.params.beta1 = my + sy * z.beta1 + shift;
  fit.params.beta2 = my + sy * z.beta2 + shift;
  fit.params.beta3 = mx + sx * z.beta3;
  fit.params.beta4 = sx * z.beta4;
  fit.iterations = nm.iterations;
  fit.converged = nm.converged;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = apply_logistic(fit.params, x[i]) - y[i];
    fit.sse += r * r;
  }
  return fit;
}

struct CorrelationReport {
  double srocc = 0.0;
  double plcc = 0.0;
  LogisticParams logistic{};
  bool logistic_fitted = false;
  std::size_t n = 0;
};

// SROCC on raw predictions; PLCC after fitting the logistic mapping on the
// same pairs. With fewer than 5 pairs the mapping is underdetermined and
// PLCC is reported on raw predictions.
inline CorrelationReport evaluate_predictions(std::span<const double> pred,
                                              std::span<const double> truth,
                                              const LogisticFitOptions& opt = {}) {
  CorrelationReport rep;
  rep.n = pred.size();
  rep.srocc = srocc(pred, truth);
  if (pred.size() >= 5) {
    const auto fit = fit_logistic(pred, truth, opt);
    std::vector<double> mapped(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) mapped[i] = apply_logistic(fit.params, pred[i]);
    rep.logistic = fit.params;
    rep.logistic_fitted = true;
    try {
      rep.plcc = plcc(mapped, truth);
    } catch (const UndefinedCorrelation&) {
      rep.plcc = plcc(pred, truth);  // fit collapsed to a constant
      rep.logistic_fitted = false;
    }
  } else {
    rep.plcc = plcc(pred, truth);
  }
  return rep;
}

}  // namespace deepstq
