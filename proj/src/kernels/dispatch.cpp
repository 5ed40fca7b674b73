#include "xct/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace xct::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* select() {
  const char* req = std::getenv("XCT_KERNEL_ISA");
  if (req && std::strcmp(req, "scalar") == 0) return &scalar_table();
  if (req && std::strcmp(req, "avx2") == 0) {
    const Table* t = avx2_table();
    if (t && cpu_has_avx2_fma()) return t;
    return &scalar_table();
  }
  if (cpu_has_avx2_fma()) {
    const Table* t = avx2_table();
    if (t) return t;
  }
  return &scalar_table();
}

}  // namespace

const Table& active() {
  static const Table* t = select();
  return *t;
}

}  // namespace xct::kernels
