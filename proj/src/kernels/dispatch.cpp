#include <atomic>
#include <cstdlib>
#include <string>

#include "dfpc/error.hpp"
#include "dfpc/kernels.hpp"

namespace dfpc::kernels {

#if defined(DFPC_BUILD_AVX2)
const KernelSet& avx2_set();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(DFPC_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelSet* best() {
  if (const KernelSet* k = avx2()) return k;
  return &scalar();
}

const KernelSet* resolve(std::string_view name) {
  if (name == "auto" || name.empty()) return best();
  if (name == "scalar") return &scalar();
  if (name == "avx2") {
    if (const KernelSet* k = avx2()) return k;
    throw InvalidArgument("avx2 kernels unavailable on this build or CPU");
  }
  throw InvalidArgument("unknown kernel variant '" + std::string(name) + "'");
}

std::atomic<const KernelSet*>& slot() {
  static std::atomic<const KernelSet*> current{nullptr};
  return current;
}

}  // namespace

const KernelSet* avx2() {
#if defined(DFPC_BUILD_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &avx2_set() : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& active() {
  const KernelSet* k = slot().load(std::memory_order_acquire);
  if (k == nullptr) {
    const char* env = std::getenv("DFPC_KERNELS");
    k = resolve(env ? std::string_view(env) : std::string_view("auto"));
    slot().store(k, std::memory_order_release);
  }
  return *k;
}

void select(std::string_view name) { slot().store(resolve(name), std::memory_order_release); }

}  // namespace dfpc::kernels
