#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hps/simd/kernels.hpp"

namespace hps::simd {
namespace {

bool cpu_has_avx2() {
#if defined(HPS_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{kernels_for(detect_backend())};
  return slot;
}

}  // namespace

const KernelTable* kernels_for(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return &detail::scalar_table;
    case Backend::Avx2:
#if defined(HPS_WITH_AVX2)
      if (cpu_has_avx2()) return &detail::avx2_table;
#endif
      return nullptr;
    case Backend::Neon:
#if defined(HPS_WITH_NEON)
      return &detail::neon_table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool backend_available(Backend backend) {
  return kernels_for(backend) != nullptr;
}

Backend detect_backend() {
  if (const char* env = std::getenv("HPS_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::Scalar;
    if (want == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
    if (want == "neon" && backend_available(Backend::Neon)) return Backend::Neon;
  }
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

const KernelTable& kernels() {
  return *active_slot().load(std::memory_order_acquire);
}

Backend active_backend() { return kernels().backend; }

void set_backend(Backend backend) {
  const KernelTable* table = kernels_for(backend);
  if (table == nullptr)
    throw std::invalid_argument("SIMD backend not available: " +
                                std::string(backend_name(backend)));
  active_slot().store(table, std::memory_order_release);
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace hps::simd
