#pragma once

// Dense inner-loop kernels with a scalar reference implementation and
// vectorized variants (AVX2+FMA on x86-64, NEON on AArch64). The variant is
// chosen once at first use from the running CPU; LOWRANK_SIMD=scalar forces
// the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace lowrank::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa) noexcept;

// Function table for one instruction set. All kernels accept arbitrary
// lengths; vector variants handle the tail with scalar code.
struct Kernels {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // Upper triangle (including diagonal) of CᵀC for a column-major rows×cols
  // matrix with leading dimension ld; out is cols×cols column-major.
  void (*gram_upper)(const double* c, std::size_t rows, std::size_t cols,
                     std::size_t ld, double* out);
};

const Kernels& scalar_kernels() noexcept;
// nullptr when the variant was not compiled in or the CPU lacks support.
const Kernels* avx2_kernels() noexcept;
const Kernels* neon_kernels() noexcept;

// Best available table for this process (honours LOWRANK_SIMD).
const Kernels& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline double sum_squares(std::span<const double> a) {
  return active().sum_squares(a.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

}  // namespace lowrank::simd
