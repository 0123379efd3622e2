#include "lowrank/matrix.hpp"

#include <limits>

#include <Eigen/SVD>

#include "lowrank/error.hpp"
#include "lowrank/simd.hpp"

namespace lowrank {

double squared_norm(const Matrix& a) {
  return simd::active().sum_squares(a.data(), static_cast<std::size_t>(a.size()));
}

double squared_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw_argument("matrix shapes differ");
  return simd::active().squared_distance(a.data(), b.data(), static_cast<std::size_t>(a.size()));
}

double default_rank_tolerance(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * sigma_max * std::numeric_limits<double>::epsilon();
}

int numerical_rank(const Matrix& a, std::optional<double> tol) {
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double threshold = tol.value_or(default_rank_tolerance(a.rows(), a.cols(), s(0)));
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
  }
  return rank;
}

}  // namespace lowrank
