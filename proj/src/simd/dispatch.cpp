#include <cstdlib>
#include <string>

#include "lowrank/simd.hpp"

namespace lowrank::simd {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

namespace {

const Kernels& select() noexcept {
  if (const char* env = std::getenv("LOWRANK_SIMD")) {
    if (std::string_view(env) == "scalar") return scalar_kernels();
  }
  if (const Kernels* k = avx2_kernels()) return *k;
  if (const Kernels* k = neon_kernels()) return *k;
  return scalar_kernels();
}

}  // namespace

const Kernels& active() noexcept {
  static const Kernels& k = select();
  return k;
}

}  // namespace lowrank::simd
