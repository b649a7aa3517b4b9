#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "deepstq/error.hpp"

namespace deepstq {

struct NelderMeadOptions {
  double diameter_tol = 1e-8;  // stop when every vertex is this close to the best one
  int max_iterations = 10000;
  int max_restarts = 20;       // fresh simplex around the best point while it still improves
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free minimisation with the standard reflection / expansion /
// contraction / shrink coefficients (1, 2, 0.5, 0.5).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const std::vector<double>& steps,
                                    const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0 || steps.size() != n) throw InvalidArgument("nelder_mead: bad dimensions");

  auto safe = [&](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  NelderMeadResult res;
  res.x = std::move(x0);
  res.value = safe(res.x);

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    std::vector<std::vector<double>> simplex(n + 1, res.x);
    std::vector<double> fv(n + 1);
    fv[0] = res.value;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = steps[i] != 0.0 ? steps[i] : 1e-3;
      simplex[i + 1][i] += restart == 0 ? h : h * std::pow(0.1, std::min(restart, 6));
      fv[i + 1] = safe(simplex[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
      const auto best = order.front();
      const auto worst = order.back();
      const auto second = order[n - 1];

      double diam = 0.0;
      for (std::size_t v = 0; v <= n; ++v)
        for (std::size_t i = 0; i < n; ++i)
          diam = std::max(diam, std::abs(simplex[v][i] - simplex[best][i]));
      if (diam < opt.diameter_tol) {
        converged = true;
        break;
      }

      std::vector<double> centroid(n, 0.0);
      for (std::size_t v = 0; v <= n; ++v)
        if (v != worst)
          for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i] / static_cast<double>(n);

      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (simplex[worst][i] - centroid[i]);
        return p;
      };

      auto xr = along(-1.0);
      const double fr = safe(xr);
      if (fr < fv[best]) {
        auto xe = along(-2.0);
        const double fe = safe(xe);
        if (fe < fr) {
          simplex[worst] = std::move(xe);
          fv[worst] = fe;
        } else {
          simplex[worst] = std::move(xr);
          fv[worst] = fr;
        }
      } else if (fr < fv[second]) {
        simplex[worst] = std::move(xr);
        fv[worst] = fr;
      } else {
        const bool outside = fr < fv[worst];
        auto xc = along(outside ? -0.5 : 0.5);
        const double fc = safe(xc);
        if (fc < (outside ? fr : fv[worst])) {
          simplex[worst] = std::move(xc);
          fv[worst] = fc;
        } else {
          for (std::size_t v = 0; v <= n; ++v) {
            if (v == best) continue;
            for (std::size_t i = 0; i < n; ++i)
              simplex[v][i] = simplex[best][i] + 0.5 * (simplex[v][i] - simplex[best][i]);
            fv[v] = safe(simplex[v]);
          }
        }
      }
    }
    res.iterations += it;
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    const bool improved = fv[best] < res.value;
    if (fv[best] <= res.value) {
      res.value = fv[best];
      res.x = simplex[best];
    }
    res.converged = converged;
    if (!improved && restart > 0) break;
  }
  return res;
}

}  // namespace deepstq
