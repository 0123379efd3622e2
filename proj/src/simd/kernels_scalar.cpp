#include "lowrank/simd.hpp"

namespace lowrank::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gram_upper_scalar(const double* c, std::size_t rows, std::size_t cols,
                       std::size_t ld, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* cj = c + j * ld;
    for (std::size_t i = 0; i <= j; ++i) {
      out[i + j * cols] = dot_scalar(c + i * ld, cj, rows);
    }
  }
}

}  // namespace

const Kernels& scalar_kernels() noexcept {
  static const Kernels k{Isa::kScalar, dot_scalar, sum_squares_scalar,
                         squared_distance_scalar, axpy_scalar, gram_upper_scalar};
  return k;
}

}  // namespace lowrank::simd
