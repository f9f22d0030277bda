#include <cstdlib>
#include <stdexcept>
#include <string>

#include "splitting/simd/kernels.hpp"
#include "variants.hpp"

namespace splitting::simd {

namespace {

constexpr KernelTable kScalar{Isa::scalar, detail::binomial_step_scalar, detail::dot_scalar};
#if defined(SPLITTING_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, detail::binomial_step_avx2, detail::dot_avx2};
#endif
#if defined(SPLITTING_HAVE_NEON)
constexpr KernelTable kNeon{Isa::neon, detail::binomial_step_neon, detail::dot_neon};
#endif

const KernelTable& select() {
  if (const char* forced = std::getenv("SPLITTING_SIMD")) {
    const std::string f(forced);
    if (f == "scalar") return kScalar;
    if (f == "avx2") return table(Isa::avx2);
    if (f == "neon") return table(Isa::neon);
  }
  if (available(Isa::avx2)) return table(Isa::avx2);
  if (available(Isa::neon)) return table(Isa::neon);
  return kScalar;
}

}  // namespace

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(SPLITTING_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(SPLITTING_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) throw std::runtime_error("kernel variant not available: " + std::string(name(isa)));
  switch (isa) {
#if defined(SPLITTING_HAVE_AVX2)
    case Isa::avx2:
      return kAvx2;
#endif
#if defined(SPLITTING_HAVE_NEON)
    case Isa::neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

double dot_reference(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace splitting::simd
