#include "tsl/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace tsl::kernels {

#if defined(TSL_HAVE_AVX2)
KernelTable const &avx2_table_impl();
#endif

namespace {

bool cpu_has_avx2()
{
#if defined(TSL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

KernelTable const *choose()
{
  if (char const *env = std::getenv("TSL_KERNELS"); env && std::string_view(env) == "scalar") {
    return &scalar_table();
  }
  if (auto const *t = avx2_table()) {
    return t;
  }
  return &scalar_table();
}

std::atomic<KernelTable const *> &slot()
{
  static std::atomic<KernelTable const *> current{choose()};
  return current;
}

} // namespace

KernelTable const *avx2_table()
{
#if defined(TSL_HAVE_AVX2)
  static bool const ok = cpu_has_avx2();
  return ok ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

KernelTable const &active() { return *slot().load(std::memory_order_relaxed); }

void select(Isa isa)
{
  KernelTable const *t = &scalar_table();
  if (isa == Isa::Avx2 && avx2_table()) {
    t = avx2_table();
  }
  slot().store(t, std::memory_order_relaxed);
}

} // namespace tsl::kernels
