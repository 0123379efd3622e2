#pragma once

#include <optional>

#include <Eigen/Core>

namespace lowrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Squared Hilbert-Schmidt norm through the dispatched SIMD kernel.
double squared_norm(const Matrix& a);
// ‖a - b‖² for equally shaped matrices.
double squared_distance(const Matrix& a, const Matrix& b);

// Default numerical-rank threshold max(rows, cols) · σ₁ · ε.
double default_rank_tolerance(Eigen::Index rows, Eigen::Index cols, double sigma_max);

// Number of singular values above tol (auto tolerance when absent).
int numerical_rank(const Matrix& a, std::optional<double> tol = std::nullopt);

}  // namespace lowrank
