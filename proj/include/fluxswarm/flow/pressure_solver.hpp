#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fluxswarm/core/errors.hpp"

namespace fluxswarm::flow {

/// Five-point pressure operator on an nx × ny cell grid, cell k = i * ny + j.
///
/// The operator is the negated Laplacian scaled by dx², restricted to active
/// cells: diag[k] counts the open faces of cell k (including the Dirichlet
/// outlet face) and every open interior face contributes -1 to the two cells
/// it joins. Inactive cells carry an identity row.
struct PoissonStencil {
  int nx = 0;
  int ny = 0;
  std::vector<unsigned char> active;
  std::vector<double> diag;
  std::vector<unsigned char> east;   // coupling k <-> k + ny
  std::vector<unsigned char> north;  // coupling k <-> k + 1

  std::size_t size() const { return active.size(); }

  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    const std::size_t b = static_cast<std::size_t>(ny);
    for (std::size_t k = 0; k < n; ++k) y[k] = diag[k] * x[k];
    for (std::size_t k = 0; k < n; ++k) {
      if (north[k]) {
        y[k] -= x[k + 1];
        y[k + 1] -= x[k];
      }
      if (east[k]) {
        y[k] -= x[k + b];
        y[k + b] -= x[k];
      }
    }
  }

  // Entry A(k, j) for j in [k - ny, k].
  double lower_entry(std::size_t k, std::size_t j) const {
    if (j == k) return diag[k];
    if (j + 1 == k) return north[j] ? -1.0 : 0.0;
    if (j + static_cast<std::size_t>(ny) == k) return east[j] ? -1.0 : 0.0;
    return 0.0;
  }
};

enum class Preconditioner { kJacobi, kBandedCholesky };

/// Dense-band Cholesky factor L (A = L Lᵀ) with half-bandwidth ny.
class BandedCholesky {
 public:
  /// Recomputes rows [first_row, n). Rows of L depend only on rows of A at or
  /// above them, so a partial refactor equals a full one when the leading rows
  /// of A are unchanged.
  void factor(const PoissonStencil& a, std::size_t first_row = 0) {
    const std::size_t n = a.size();
    const std::size_t b = static_cast<std::size_t>(a.ny);
    if (n != n_ || b != b_) {
      n_ = n;
      b_ = b;
      l_.assign(n * (b + 1), 0.0);
      first_row = 0;
    }
    const std::size_t w = b_ + 1;
    for (std::size_t k = first_row; k < n_; ++k) {
      const std::size_t jlo = k >= b_ ? k - b_ : 0;
      double* lk = &l_[k * w];
      for (std::size_t j = jlo; j <= k; ++j) {
        const double* lj = &l_[j * w];
        const std::size_t llo = std::max(jlo, j >= b_ ? j - b_ : 0);
        double s = a.lower_entry(k, j);
        for (std::size_t l = llo; l < j; ++l) s -= lk[l + b_ - k] * lj[l + b_ - j];
        if (j < k) {
          lk[j + b_ - k] = s / lj[b_];
        } else {
          if (!(s > 0.0)) throw SolverDivergence("pressure operator is not positive definite");
          lk[b_] = std::sqrt(s);
        }
      }
    }
  }

  void solve(std::span<const double> rhs, std::span<double> x) const {
    const std::size_t w = b_ + 1;
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t lo = k >= b_ ? k - b_ : 0;
      const double* lk = &l_[k * w];
      double s = rhs[k];
      for (std::size_t l = lo; l < k; ++l) s -= lk[l + b_ - k] * x[l];
      x[k] = s / lk[b_];
    }
    for (std::size_t k = n_; k-- > 0;) {
      const std::size_t hi = std::min(n_ - 1, k + b_);
      double s = x[k];
      for (std::size_t m = k + 1; m <= hi; ++m) s -= l_[m * w + (k + b_ - m)] * x[m];
      x[k] = s / l_[k * w + b_];
    }
  }

 private:
  std::size_t n_ = 0;
  std::size_t b_ = 0;
  std::vector<double> l_;
};

struct PoissonSettings {
  double rel_tol = 1e-8;        // failure threshold on ‖r‖/‖b‖
  int max_iter = 0;             // 0 selects 10 · nx · ny
  Preconditioner preconditioner = Preconditioner::kBandedCholesky;
};

struct PoissonResult {
  int iterations = 0;
  double rel_residual = 0.0;
  double max_residual = 0.0;
};

/// Preconditioned conjugate gradient for A p = rhs.
///
/// Iterates until ‖r‖/‖b‖ ≤ rel_tol and max|r| ≤ abs_tol. Running out of
/// iterations is an error only when the relative criterion was never met.
class PressureSolver {
 public:
  explicit PressureSolver(PoissonSettings settings = {}) : settings_(settings) {}

  const PoissonSettings& settings() const { return settings_; }

  PoissonResult solve(const PoissonStencil& a, std::span<const double> rhs, std::span<double> x,
                      double abs_tol) {
    const std::size_t n = a.size();
    std::fill(x.begin(), x.end(), 0.0);
    double bnorm = 0.0;
    for (double v : rhs) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return {};

    prepare(a);
    r_.assign(rhs.begin(), rhs.end());
    z_.resize(n);
    p_.resize(n);
    ap_.resize(n);

    const int cap = settings_.max_iter > 0 ? settings_.max_iter : 10 * a.nx * a.ny;
    precondition(a, r_, z_);
    p_ = z_;
    double rz = dot(r_, z_);
    PoissonResult result;
    for (int it = 1; it <= cap; ++it) {
      a.apply(p_, ap_);
      const double pap = dot(p_, ap_);
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += alpha * p_[k];
        r_[k] -= alpha * ap_[k];
      }
      result.iterations = it;
      if (converged(r_, bnorm, abs_tol, result)) {
        // Confirm against the true residual; recurrence drift can fool us.
        a.apply(x, ap_);
        for (std::size_t k = 0; k < n; ++k) r_[k] = rhs[k] - ap_[k];
        if (converged(r_, bnorm, abs_tol, result)) return result;
      }
      precondition(a, r_, z_);
      const double rz_next = dot(r_, z_);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t k = 0; k < n; ++k) p_[k] = z_[k] + beta * p_[k];
    }
    a.apply(x, ap_);
    for (std::size_t k = 0; k < n; ++k) r_[k] = rhs[k] - ap_[k];
    converged(r_, bnorm, abs_tol, result);
    if (!(result.rel_residual <= settings_.rel_tol)) {
      throw SolverDivergence("pressure solve stalled at relative residual " +
                             std::to_string(result.rel_residual) + " after " +
                             std::to_string(result.iterations) + " iterations");
    }
    return result;
  }

 private:
  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }

  bool converged(const std::vector<double>& r, double bnorm, double abs_tol, PoissonResult& out) const {
    double sq = 0.0;
    double mx = 0.0;
    for (double v : r) {
      sq += v * v;
      mx = std::max(mx, std::abs(v));
    }
    out.rel_residual = std::sqrt(sq) / bnorm;
    out.max_residual = mx;
    return out.rel_residual <= settings_.rel_tol && mx <= abs_tol;
  }

  void prepare(const PoissonStencil& a) {
    if (settings_.preconditioner != Preconditioner::kBandedCholesky) return;
    if (cached_active_.size() != a.active.size() || cached_ny_ != a.ny) {
      factor_.factor(a, 0);
    } else {
      const auto diff = std::mismatch(cached_active_.begin(), cached_active_.end(), a.active.begin());
      if (diff.first == cached_active_.end()) return;
      const auto c = static_cast<std::size_t>(diff.first - cached_active_.begin());
      const auto b = static_cast<std::size_t>(a.ny);
      factor_.factor(a, c >= b ? c - b : 0);
    }
    cached_active_ = a.active;
    cached_ny_ = a.ny;
  }

  void precondition(const PoissonStencil& a, const std::vector<double>& r, std::vector<double>& z) const {
    if (settings_.preconditioner == Preconditioner::kBandedCholesky) {
      factor_.solve(r, z);
    } else {
      for (std::size_t k = 0; k < r.size(); ++k) z[k] = r[k] / a.diag[k];
    }
  }

  PoissonSettings settings_;
  BandedCholesky factor_;
  std::vector<unsigned char> cached_active_;
  int cached_ny_ = 0;
  std::vector<double> r_, z_, p_, ap_;
};

}  // namespace fluxswarm::flow
