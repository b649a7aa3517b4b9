#pragma once

// Epsilon-SVR trained with an SMO working-set solver (second-order working
// set selection), z-score feature scaling and a cross-validated grid search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <tuple>
#include <string>
#include <vector>

#include "deepstq/error.hpp"
#include "deepstq/metrics.hpp"
#include "deepstq/parallel.hpp"

namespace deepstq {

using Row = std::vector<double>;

// ---------------------------------------------------------------------------
// Scaler

struct Scaler {
  static constexpr double kStdFloor = 1e-12;

  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dim() const noexcept { return mean.size(); }

  static Scaler identity(std::size_t dim) {
    return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  }

  Row apply(std::span<const double> row) const {
    if (row.size() != dim())
      throw InvalidArgument("scaler: row dimension " + std::to_string(row.size()) +
                            " != " + std::to_string(dim()));
    Row out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = (row[i] - mean[i]) / stddev[i];
    return out;
  }
};

// Population mean and standard deviation per dimension. Dimensions with
// std below the floor get std 1, so they standardise to 0.
inline Scaler fit_scaler(std::span<const Row> rows) {
  if (rows.empty()) throw InvalidArgument("fit_scaler: no rows");
  const std::size_t d = rows.front().size();
  Scaler s{Row(d, 0.0), Row(d, 0.0)};
  for (const auto& r : rows) {
    if (r.size() != d) throw InvalidArgument("fit_scaler: rows differ in dimension");
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += r[i];
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : s.mean) m /= n;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i) s.stddev[i] += (r[i] - s.mean[i]) * (r[i] - s.mean[i]);
  for (auto& v : s.stddev) {
    v = std::sqrt(v / n);
    if (!(v >= Scaler::kStdFloor)) v = 1.0;
  }
  return s;
}

inline std::vector<Row> apply_scaler(const Scaler& s, std::span<const Row> rows) {
  std::vector<Row> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(s.apply(r));
  return out;
}

// ---------------------------------------------------------------------------
// Kernels and hyperparameters

enum class KernelKind { Rbf, Linear };

inline std::string kernel_name(KernelKind k) { return k == KernelKind::Rbf ? "rbf" : "linear"; }

inline KernelKind parse_kernel(const std::string& s) {
  if (s == "rbf") return KernelKind::Rbf;
  if (s == "linear") return KernelKind::Linear;
  throw InvalidArgument("unknown kernel '" + s + "'");
}

struct SvrHyper {
  double C = 1.0;
  double epsilon = 0.1;
  double gamma = 1.0;  // ignored by the linear kernel

  void validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw InvalidArgument("SVR: C must be > 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
      throw InvalidArgument("SVR: epsilon must be >= 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("SVR: gamma must be > 0");
  }

  friend bool operator==(const SvrHyper&, const SvrHyper&) = default;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double kernel_value(KernelKind k, double gamma, std::span<const double> a,
                           std::span<const double> b) {
  return k == KernelKind::Rbf ? std::exp(-gamma * squared_distance(a, b)) : dot(a, b);
}

// Dense symmetric n x n matrix.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> v;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size) : n(size), v(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return v[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * n + j]; }
};

// Pairwise squared distances (RBF) or inner products (linear) of a row set;
// kernel matrices for any gamma and any row subset derive from it.
class KernelBasis {
 public:
  KernelBasis(std::span<const Row> rows, KernelKind kind) : kind_(kind), base_(rows.size()) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = i; j < rows.size(); ++j) {
        const double v = kind == KernelKind::Rbf ? squared_distance(rows[i], rows[j])
                                                 : dot(rows[i], rows[j]);
        base_(i, j) = v;
        base_(j, i) = v;
      }
    }
  }

  KernelKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return base_.n; }

  double value(std::size_t i, std::size_t j, double gamma) const {
    return kind_ == KernelKind::Rbf ? std::exp(-gamma * base_(i, j)) : base_(i, j);
  }

  SquareMatrix gram(std::span<const std::size_t> idx, double gamma) const {
    SquareMatrix k(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a; b < idx.size(); ++b) {
        const double v = value(idx[a], idx[b], gamma);
        k(a, b) = v;
        k(b, a) = v;
      }
    return k;
  }

 private:
  KernelKind kind_;
  SquareMatrix base_;
};

// ---------------------------------------------------------------------------
// Dual solver

struct SolverOptions {
  double tol = 1e-3;                  // maximal KKT violation at termination
  std::int64_t max_iterations = 1'000'000;  // pair updates
  bool record_trace = false;          // dual objective after every update
};

// Solution of
//   max  -1/2 theta' K theta - eps * sum |theta_i| + y' theta
//   s.t. sum theta_i = 0,  -C <= theta_i <= C
// with theta = alpha - alpha*.
struct DualSolution {
  std::vector<double> coef;  // theta
  double bias = 0.0;
  double objective = 0.0;    // dual objective (maximisation form)
  double violation = 0.0;    // final maximal KKT violation
  std::int64_t iterations = 0;
  std::vector<double> trace; // objective per iteration when requested
};

class SvrNonConvergence : public Error {
 public:
  SvrNonConvergence(std::int64_t iterations, double violation, double objective)
      : Error("SVR solver did not converge after " + std::to_string(iterations) +
              " iterations (KKT violation " + std::to_string(violation) + ", objective " +
              std::to_string(objective) + ")"),
        iterations_(iterations), violation_(violation), objective_(objective) {}

  std::int64_t iterations() const noexcept { return iterations_; }
  double violation() const noexcept { return violation_; }
  double objective() const noexcept { return objective_; }

 private:
  std::int64_t iterations_;
  double violation_;
  double objective_;
};

inline double dual_objective(const SquareMatrix& k, std::span<const double> y, double epsilon,
                             std::span<const double> theta) {
  double quad = 0.0, lin = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) row += k(i, j) * theta[j];
    quad += theta[i] * row;
    lin += y[i] * theta[i];
    l1 += std::abs(theta[i]);
  }
  return -0.5 * quad - epsilon * l1 + lin;
}

// SMO on the 2n-variable form: variables t < n are alpha (sign +1), t >= n
// are alpha* (sign -1); minimises f = 1/2 a'Qa + p'a with
// Q_st = s_s s_t K(s mod n, t mod n), p = [eps - y; eps + y].
inline DualSolution solve_svr_dual(const SquareMatrix& k, std::span<const double> y,
                                   const SvrHyper& hyper, const SolverOptions& opt = {}) {
  hyper.validate();
  const std::size_t n = y.size();
  if (n == 0 || k.n != n) throw InvalidArgument("solve_svr_dual: size mismatch");
  for (double v : y)
    if (!std::isfinite(v)) throw InvalidArgument("SVR: non-finite label");
  for (double v : k.v)
    if (!std::isfinite(v)) throw InvalidArgument("SVR: non-finite kernel value");

  constexpr double kTau = 1e-12;
  const double C = hyper.C;
  const std::size_t m = 2 * n;
  std::vector<double> alpha(m, 0.0), grad(m), p(m);
  std::vector<signed char> sign(m);
  for (std::size_t t = 0; t < n; ++t) {
    sign[t] = 1;
    sign[t + n] = -1;
    p[t] = hyper.epsilon - y[t];
    p[t + n] = hyper.epsilon + y[t];
  }
  grad = p;

  auto kq = [&](std::size_t s, std::size_t t) { return sign[s] * sign[t] * k(s % n, t % n); };
  auto at_upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto primal_value = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < m; ++t) f += alpha[t] * (grad[t] + p[t]);
    return 0.5 * f;
  };

  DualSolution sol;
  std::int64_t iter = 0;
  double violation = 0.0;
  for (;;) {
    // Working set: i maximises -s_t G_t over I_up; j minimises the
    // second-order objective decrease over I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1, j = -1;
    for (std::size_t t = 0; t < m; ++t) {
      if (sign[t] == 1) {
        if (!at_upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!at_lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = static_cast<std::ptrdiff_t>(t); }
      }
    }
    double best_decrease = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      const auto ii = static_cast<std::size_t>(i);
      const double qii = k(ii % n, ii % n);
      for (std::size_t t = 0; t < m; ++t) {
        double diff;
        if (sign[t] == 1) {
          if (at_lower(t)) continue;
          gmax2 = std::max(gmax2, grad[t]);
          diff = gmax + grad[t];
        } else {
          if (at_upper(t)) continue;
          gmax2 = std::max(gmax2, -grad[t]);
          diff = gmax - grad[t];
        }
        if (diff > 0.0) {
          double quad = qii + k(t % n, t % n) - 2.0 * sign[ii] * kq(ii, t);
          if (quad <= 0.0) quad = kTau;
          const double dec = -(diff * diff) / quad;
          if (dec <= best_decrease) { best_decrease = dec; j = static_cast<std::ptrdiff_t>(t); }
        }
      }
    }
    violation = (i < 0 || gmax2 == -std::numeric_limits<double>::infinity()) ? 0.0 : gmax + gmax2;
    if (i < 0 || j < 0 || violation < opt.tol) break;
    if (iter >= opt.max_iterations) throw SvrNonConvergence(iter, violation, -primal_value());
    ++iter;

    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(j);
    const double old_a = alpha[a], old_b = alpha[b];
    const double kaa = k(a % n, a % n), kbb = k(b % n, b % n);
    const double qab = kq(a, b);
    if (sign[a] != sign[b]) {
      double quad = kaa + kbb + 2.0 * qab;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[a] - grad[b]) / quad;
      const double diff = alpha[a] - alpha[b];
      alpha[a] += delta;
      alpha[b] += delta;
      if (diff > 0.0) {
        if (alpha[b] < 0.0) { alpha[b] = 0.0; alpha[a] = diff; }
      } else {
        if (alpha[a] < 0.0) { alpha[a] = 0.0; alpha[b] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[a] > C) { alpha[a] = C; alpha[b] = C - diff; }
      } else {
        if (alpha[b] > C) { alpha[b] = C; alpha[a] = C + diff; }
      }
    } else {
      double quad = kaa + kbb - 2.0 * qab;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[a] - grad[b]) / quad;
      const double sum = alpha[a] + alpha[b];
      alpha[a] -= delta;
      alpha[b] += delta;
      if (sum > C) {
        if (alpha[a] > C) { alpha[a] = C; alpha[b] = sum - C; }
      } else {
        if (alpha[b] < 0.0) { alpha[b] = 0.0; alpha[a] = sum; }
      }
      if (sum > C) {
        if (alpha[b] > C) { alpha[b] = C; alpha[a] = sum - C; }
      } else {
        if (alpha[a] < 0.0) { alpha[a] = 0.0; alpha[b] = sum; }
      }
    }

    const double da = alpha[a] - old_a, db = alpha[b] - old_b;
    for (std::size_t t = 0; t < m; ++t) grad[t] += kq(a, t) * da + kq(b, t) * db;
    if (opt.record_trace) sol.trace.push_back(-primal_value());
  }

  // Bias from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = sign[t] * grad[t];
    if (at_upper(t)) {
      if (sign[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (sign[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  sol.coef.resize(n);
  for (std::size_t t = 0; t < n; ++t) sol.coef[t] = alpha[t] - alpha[t + n];
  sol.bias = -rho;
  sol.objective = -primal_value();
  sol.violation = violation;
  sol.iterations = iter;
  return sol;
}

// ---------------------------------------------------------------------------
// Model

struct SvrModel {
  KernelKind kernel = KernelKind::Rbf;
  SvrHyper hyper{};
  Scaler scaler;
  std::vector<Row> support_vectors;  // standardised rows
  std::vector<double> coef;          // alpha - alpha* per support vector
  double bias = 0.0;

  std::size_t dim() const noexcept { return scaler.dim(); }
};

// Decision value on an already standardised row.
inline double predict_standardized(const SvrModel& model, std::span<const double> row) {
  double s = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    s += model.coef[i] * kernel_value(model.kernel, model.hyper.gamma, model.support_vectors[i], row);
  return s;
}

inline double predict(const SvrModel& model, std::span<const double> row) {
  if (row.size() != model.dim())
    throw InvalidArgument("predict: row dimension " + std::to_string(row.size()) +
                          " != model dimension " + std::to_string(model.dim()));
  const Row z = model.scaler.apply(row);
  return predict_standardized(model, z);
}

namespace detail {

inline void check_training_set(std::span<const Row> x, std::span<const double> y) {
  if (x.empty() || x.size() != y.size())
    throw InvalidArgument("train_svr: need |X| == |y| >= 1 (got " + std::to_string(x.size()) +
                          " rows, " + std::to_string(y.size()) + " labels)");
  const std::size_t d = x.front().size();
  for (const auto& r : x) {
    if (r.size() != d) throw InvalidArgument("train_svr: rows differ in dimension");
    for (double v : r)
      if (!std::isfinite(v)) throw InvalidArgument("train_svr: non-finite feature");
  }
  for (double v : y)
    if (!std::isfinite(v)) throw InvalidArgument("train_svr: non-finite label");
}

inline SvrModel assemble_model(std::span<const Row> x, const DualSolution& sol, KernelKind kernel,
                               const SvrHyper& hyper, Scaler scaler) {
  SvrModel model;
  model.kernel = kernel;
  model.hyper = hyper;
  model.scaler = std::move(scaler);
  model.bias = sol.bias;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (sol.coef[i] != 0.0) {
      model.support_vectors.push_back(x[i]);
      model.coef.push_back(sol.coef[i]);
    }
  }
  return model;
}

}  // namespace detail

// Trains on standardised rows. `scaler` is stored in the model so that
// predict() accepts raw rows; it defaults to the identity.
inline SvrModel train_svr(std::span<const Row> x, std::span<const double> y, const SvrHyper& hyper,
                          const SolverOptions& opt = {}, KernelKind kernel = KernelKind::Rbf,
                          const Scaler* scaler = nullptr, DualSolution* solution_out = nullptr) {
  detail::check_training_set(x, y);
  hyper.validate();
  const KernelBasis basis(x, kernel);
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), 0);
  const SquareMatrix k = basis.gram(all, hyper.gamma);
  DualSolution sol = solve_svr_dual(k, y, hyper, opt);
  Scaler s = scaler ? *scaler : Scaler::identity(x.front().size());
  if (s.dim() != x.front().size()) throw InvalidArgument("train_svr: scaler dimension mismatch");
  SvrModel model = detail::assemble_model(x, sol, kernel, hyper, std::move(s));
  if (solution_out) *solution_out = std::move(sol);
  return model;
}

// Scaler fit + training on raw rows.
inline SvrModel fit_svr(std::span<const Row> raw, std::span<const double> y, const SvrHyper& hyper,
                        const SolverOptions& opt = {}, KernelKind kernel = KernelKind::Rbf) {
  detail::check_training_set(raw, y);
  Scaler s = fit_scaler(raw);
  const auto z = apply_scaler(s, raw);
  return train_svr(z, y, hyper, opt, kernel, &s);
}

// Upper bound on |f(u) - f(v)| / |u - v| in standardised space.
inline double lipschitz_bound(const SvrModel& model) {
  double sum_abs = 0.0;
  for (double c : model.coef) sum_abs += std::abs(c);
  if (model.kernel == KernelKind::Rbf)
    return sum_abs * std::sqrt(2.0 * model.hyper.gamma) * std::exp(-0.5);
  Row w(model.dim(), 0.0);
  for (std::size_t i = 0; i < model.coef.size(); ++i)
    for (std::size_t d = 0; d < w.size(); ++d) w[d] += model.coef[i] * model.support_vectors[i][d];
  return std::sqrt(dot(w, w));
}

// ---------------------------------------------------------------------------
// Grid search

// C in {2^-1, 2^1, ..., 2^7}, gamma in {2^-4, 2^-2, ..., 2^4} / dim,
// epsilon = 0.1 * std(y). On standardised rows the mean squared distance
// between two rows is about 2 * dim, so gamma is tied to 1 / dim.
inline std::vector<SvrHyper> default_grid(std::span<const double> y, std::size_t dim) {
  if (dim == 0) throw InvalidArgument("default_grid: dimension must be positive");
  double eps = 0.1;
  if (!y.empty()) {
    const double m = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double v = 0.0;
    for (double t : y) v += (t - m) * (t - m);
    eps = 0.1 * std::sqrt(v / static_cast<double>(y.size()));
  }
  std::vector<SvrHyper> grid;
  for (int ce = -1; ce <= 7; ce += 2)
    for (int ge = -4; ge <= 4; ge += 2)
      grid.push_back({std::ldexp(1.0, ce), eps, std::ldexp(1.0, ge) / static_cast<double>(dim)});
  return grid;
}

struct GridSearchOptions {
  int folds = 5;
  KernelKind kernel = KernelKind::Rbf;
  SolverOptions solver{};
  unsigned threads = 1;
};

struct GridCell {
  SvrHyper hyper;
  double score = 0.0;  // mean held-out SROCC
};

struct GridSearchResult {
  SvrHyper best;
  double best_score = 0.0;
  std::vector<GridCell> cells;  // grid order
};

// Fold index per row. With groups, whole groups are dealt to folds in
// sorted group order; otherwise rows are dealt round-robin.
inline std::vector<int> assign_folds(std::size_t n, int folds, std::span<const std::string> groups) {
  std::vector<int> fold(n);
  if (groups.empty()) {
    for (std::size_t i = 0; i < n; ++i) fold[i] = static_cast<int>(i % static_cast<std::size_t>(folds));
    return fold;
  }
  if (groups.size() != n) throw InvalidArgument("assign_folds: one group per row required");
  std::map<std::string, int> ids;
  for (const auto& g : groups) ids.emplace(g, 0);
  int k = 0;
  for (auto& [g, f] : ids) f = k++ % folds;
  for (std::size_t i = 0; i < n; ++i) fold[i] = ids.at(groups[i]);
  return fold;
}

// Held-out SROCC, or 0 when it is undefined (fewer than 3 rows, constant
// labels or constant predictions in the fold).
inline double fold_srocc(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() < 3) return 0.0;
  try {
    return srocc(pred, truth);
  } catch (const UndefinedCorrelation&) {
    return 0.0;
  }
}

// Returns the grid point with the best mean held-out SROCC; ties go to the
// smaller C, then the smaller gamma, then the smaller epsilon. A cell whose
// solver fails to converge scores -infinity. `groups` (optional) keeps rows
// of one group inside the same fold.
inline GridSearchResult grid_search(std::span<const Row> x, std::span<const double> y,
                                    std::span<const SvrHyper> grid,
                                    const GridSearchOptions& opt = {},
                                    std::span<const std::string> groups = {}) {
  detail::check_training_set(x, y);
  if (grid.empty()) throw InvalidArgument("grid_search: empty grid");
  if (opt.folds < 2) throw InvalidArgument("grid_search: folds must be >= 2");
  for (const auto& h : grid) h.validate();

  GridSearchResult res;
  if (grid.size() == 1) {
    res.best = grid.front();
    res.cells.push_back({grid.front(), 0.0});
    return res;
  }

  std::size_t n_groups = x.size();
  if (!groups.empty()) {
    if (groups.size() != x.size()) throw InvalidArgument("grid_search: one group per row required");
    std::vector<std::string> g(groups.begin(), groups.end());
    std::sort(g.begin(), g.end());
    n_groups = static_cast<std::size_t>(std::unique(g.begin(), g.end()) - g.begin());
    // A single group cannot be held out; fall back to row-level folds.
    if (n_groups < 2) {
      groups = {};
      n_groups = x.size();
    }
  }
  const int folds = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opt.folds), n_groups));
  if (folds < 2) throw InvalidArgument("grid_search: need at least 2 rows for cross-validation");
  const auto fold = assign_folds(x.size(), folds, groups);

  const KernelBasis basis(x, opt.kernel);
  std::vector<std::vector<std::size_t>> train_idx(static_cast<std::size_t>(folds)),
      test_idx(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int f = 0; f < folds; ++f)
      (fold[i] == f ? test_idx : train_idx)[static_cast<std::size_t>(f)].push_back(i);

  res.cells.resize(grid.size());
  parallel_for(grid.size(), opt.threads, [&](std::size_t c) {
    const SvrHyper& h = grid[c];
    double total = 0.0;
    try {
      for (int f = 0; f < folds; ++f) {
        const auto& tr = train_idx[static_cast<std::size_t>(f)];
        const auto& te = test_idx[static_cast<std::size_t>(f)];
        const SquareMatrix k = basis.gram(tr, h.gamma);
        std::vector<double> ytr(tr.size());
        for (std::size_t a = 0; a < tr.size(); ++a) ytr[a] = y[tr[a]];
        const DualSolution sol = solve_svr_dual(k, ytr, h, opt.solver);
        std::vector<double> pred(te.size()), truth(te.size());
        for (std::size_t b = 0; b < te.size(); ++b) {
          double s = sol.bias;
          for (std::size_t a = 0; a < tr.size(); ++a)
            if (sol.coef[a] != 0.0) s += sol.coef[a] * basis.value(tr[a], te[b], h.gamma);
          pred[b] = s;
          truth[b] = y[te[b]];
        }
        total += fold_srocc(pred, truth);
      }
      res.cells[c] = {h, total / folds};
    } catch (const SvrNonConvergence&) {
      res.cells[c] = {h, -std::numeric_limits<double>::infinity()};
    }
  });

  std::size_t best = 0;
  for (std::size_t c = 1; c < res.cells.size(); ++c) {
    const auto& a = res.cells[c];
    const auto& b = res.cells[best];
    if (a.score > b.score) {
      best = c;
    } else if (a.score == b.score) {
      const auto key = [](const SvrHyper& h) { return std::tuple(h.C, h.gamma, h.epsilon); };
      if (key(a.hyper) < key(b.hyper)) best = c;
    }
  }
  res.best = res.cells[best].hyper;
  res.best_score = res.cells[best].score;
  return res;
}

}  // namespace deepstq
