#include "lowrank/reduced_rank.hpp"

#include <string>

#include <Eigen/SVD>

#include "lowrank/error.hpp"

namespace lowrank {
namespace {

struct DesignFactor {
  Matrix u;      // m×q
  Vector sigma;  // q
  Matrix v;      // p×q
  double tol;
};

DesignFactor factor_design(const Matrix& x, std::optional<double> tol) {
  if (x.rows() < 1 || x.cols() < 1) throw_argument("design matrix must be non-empty");
  if (!x.allFinite()) throw_argument("design matrix contains non-finite values");
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double threshold = tol.value_or(default_rank_tolerance(x.rows(), x.cols(), s.size() ? s(0) : 0.0));
  Eigen::Index q = 0;
  while (q < s.size() && s(q) > threshold) ++q;
  return {svd.matrixU().leftCols(q), s.head(q), svd.matrixV().leftCols(q), threshold};
}

Projector make_projector(const DesignFactor& f, Eigen::Index m) {
  Projector p;
  p.basis = f.u;
  p.q = static_cast<int>(f.u.cols());
  p.tol = f.tol;
  p.matrix = p.q > 0 ? Matrix(f.u * f.u.transpose()) : Matrix::Zero(m, m);
  return p;
}

}  // namespace

Projector projector(const Matrix& x, std::optional<double> tol) {
  return make_projector(factor_design(x, tol), x.rows());
}

FitPath::FitPath(const Matrix& x, const Matrix& y, std::optional<double> tol)
    : rows_(x.rows()), predictors_(x.cols()), responses_(y.cols()) {
  if (x.rows() != y.rows()) {
    throw_argument("X has " + std::to_string(x.rows()) + " rows but Y has " + std::to_string(y.rows()));
  }
  if (y.cols() < 1) throw_argument("response matrix must have at least one column");
  if (!y.allFinite()) throw_argument("response matrix contains non-finite values");

  const DesignFactor design = factor_design(x, tol);
  projector_ = make_projector(design, rows_);
  const Eigen::Index q = design.u.cols();
  const Eigen::Index k = std::min(q, responses_);

  y_squared_norm_ = squared_norm(y);

  // PY = U_q W with W = U_qᵀY, so the SVD of the q×n matrix W carries the
  // SVD of PY: left factors U_q U_W, same singular values and right factors.
  Matrix projected = Matrix::Zero(rows_, responses_);
  if (q > 0) {
    const Matrix w = design.u.transpose() * y;
    Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    sigma_ = svd.singularValues().head(k);
    left_ = design.u * svd.matrixU().leftCols(k);
    right_ = svd.matrixV().leftCols(k);
    coef_left_ = design.v * design.sigma.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(k);
    projected = design.u * w;

    const double threshold =
        default_rank_tolerance(rows_, responses_, sigma_.size() ? sigma_(0) : 0.0);
    while (effective_rank_ < k && sigma_(effective_rank_) > threshold) ++effective_rank_;
  } else {
    sigma_.resize(0);
    left_.resize(rows_, 0);
    right_.resize(responses_, 0);
    coef_left_.resize(predictors_, 0);
  }

  const double base = squared_distance(y, projected);
  rss_.assign(static_cast<std::size_t>(k) + 1, base);
  // Accumulate from the smallest singular value up for accuracy.
  double tail = 0.0;
  for (Eigen::Index r = k - 1; r >= 0; --r) {
    tail += sigma_(r) * sigma_(r);
    rss_[static_cast<std::size_t>(r)] = base + tail;
  }
}

void FitPath::check_rank(int r) const {
  if (r < 0 || r > max_rank()) {
    throw_argument("rank " + std::to_string(r) + " outside 0.." + std::to_string(max_rank()));
  }
}

double FitPath::rss(int r) const {
  check_rank(r);
  return rss_[static_cast<std::size_t>(r)];
}

Matrix FitPath::fitted(int r) const {
  check_rank(r);
  if (r == 0) return Matrix::Zero(rows_, responses_);
  return left_.leftCols(r) * sigma_.head(r).asDiagonal() * right_.leftCols(r).transpose();
}

Matrix FitPath::coefficients(int r) const {
  check_rank(r);
  if (r == 0) return Matrix::Zero(predictors_, responses_);
  return coef_left_.leftCols(r) * sigma_.head(r).asDiagonal() * right_.leftCols(r).transpose();
}

}  // namespace lowrank
