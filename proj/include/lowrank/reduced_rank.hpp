#pragma once

// Rank-constrained least squares for Y = XA + σE.
//
// With P the orthogonal projector onto range(X), the rank-r least-squares
// fit is XÂ_r = (PY)_r, the best rank-r approximation of PY. One SVD of PY
// therefore yields the whole path r = 0..min(q, n), and the residuals split
// as ‖Y - XÂ_r‖² = ‖Y - PY‖² + Σ_{k>r} σ_k(PY)².

#include <optional>
#include <span>
#include <vector>

#include "lowrank/matrix.hpp"

namespace lowrank {

struct Projector {
  Matrix matrix;  // m×m, P = X (XᵀX)⁺ Xᵀ
  Matrix basis;   // m×q orthonormal basis of range(X)
  int q = 0;      // numerical rank of X
  double tol = 0.0;
};

// tol defaults to max(m, p) · σ₁(X) · ε. An all-zero X yields q = 0, P = 0.
Projector projector(const Matrix& x, std::optional<double> tol = std::nullopt);

class FitPath {
 public:
  FitPath(const Matrix& x, const Matrix& y, std::optional<double> tol = std::nullopt);

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index predictors() const noexcept { return predictors_; }
  Eigen::Index responses() const noexcept { return responses_; }

  const Projector& projector() const noexcept { return projector_; }
  int design_rank() const noexcept { return projector_.q; }
  // Numerical rank of PY.
  int effective_rank() const noexcept { return effective_rank_; }
  // min(q, n): the largest rank any criterion may select.
  int max_rank() const noexcept { return static_cast<int>(sigma_.size()); }

  // SVD of PY restricted to its leading min(q, n) triplets.
  const Matrix& left() const noexcept { return left_; }    // m×k
  const Vector& singular_values() const noexcept { return sigma_; }
  const Matrix& right() const noexcept { return right_; }  // n×k

  double y_squared_norm() const noexcept { return y_squared_norm_; }
  double rss_base() const noexcept { return rss_.back(); }
  // rss(r) for r = 0..max_rank(); constant at rss_base for r >= effective_rank().
  std::span<const double> rss_path() const noexcept { return rss_; }
  double rss(int r) const;

  // XÂ_r = (PY)_r, m×n.
  Matrix fitted(int r) const;
  // Â_r = (XᵀX)⁺Xᵀ(PY)_r, p×n, rank at most r. r = 0 gives zero.
  Matrix coefficients(int r) const;

 private:
  void check_rank(int r) const;

  Eigen::Index rows_;
  Eigen::Index predictors_;
  Eigen::Index responses_;
  Projector projector_;
  Matrix left_;
  Vector sigma_;
  Matrix right_;
  Matrix coef_left_;  // p×k, X⁺ applied to left_
  int effective_rank_ = 0;
  double y_squared_norm_ = 0.0;
  std::vector<double> rss_;
};

inline FitPath fit_path(const Matrix& x, const Matrix& y, std::optional<double> tol = std::nullopt) {
  return FitPath(x, y, tol);
}

inline Matrix coefficients(const FitPath& path, int r) { return path.coefficients(r); }
inline double rss_at(const FitPath& path, int r) { return path.rss(r); }

}  // namespace lowrank
