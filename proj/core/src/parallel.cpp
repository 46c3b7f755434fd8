#include "esn2/parallel.hpp"

#include <cstdlib>
#include <string>

namespace esn2 {

std::size_t thread_limit() {
  const std::size_t hardware = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("ESN2_THREADS");
  if (env == nullptr || *env == '\0') return hardware;
  try {
    const long requested = std::stol(env);
    if (requested <= 0) return hardware;
    return static_cast<std::size_t>(requested);
  } catch (const std::exception&) {
    return hardware;
  }
}

}  // namespace esn2
