// Backend selection and the public span-based kernel entry points.

#include "un/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>

#include "kernels_common.hpp"

namespace un::kernels {
namespace {

using lane::KernelTable;

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return lane::scalar_table();
    case Backend::avx2:
      return lane::avx2_table();
    case Backend::neon:
      return lane::neon_table();
  }
  return nullptr;
}

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

bool usable(Backend b) { return table_for(b) != nullptr && cpu_supports(b); }

// Lazy init so library users need no explicit setup call.
const KernelTable* active() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    set_backend_auto();
    t = g_table.load(std::memory_order_acquire);
  }
  return t;
}

}  // namespace

std::string to_string(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
    if (usable(b)) out.push_back(b);
  return out;
}

void set_backend(Backend b) {
  if (!usable(b))
    throw std::invalid_argument("kernel backend not available: " + to_string(b));
  g_backend.store(b, std::memory_order_relaxed);
  g_table.store(table_for(b), std::memory_order_release);
}

void set_backend_auto() {
  const char* env = std::getenv("UN_KERNEL");
  const std::string req = (env != nullptr && *env != '\0') ? env : "auto";
  if (req == "auto") {
    Backend pick = Backend::scalar;
    if (usable(Backend::avx2))
      pick = Backend::avx2;
    else if (usable(Backend::neon))
      pick = Backend::neon;
    set_backend(pick);
    return;
  }
  if (req == "scalar") return set_backend(Backend::scalar);
  if (req == "avx2") return set_backend(Backend::avx2);
  if (req == "neon") return set_backend(Backend::neon);
  throw std::invalid_argument("UN_KERNEL must be auto, scalar, avx2, or neon; got \"" +
                              req + "\"");
}

Backend active_backend() {
  active();
  return g_backend.load(std::memory_order_relaxed);
}

double sum(std::span<const double> x) { return active()->sum(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return active()->dot(x.data(), y.data(), x.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) {
  assert(w.size() == x.size() && x.size() == y.size());
  return active()->weighted_dot(w.data(), x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active()->axpy(a, x.data(), y.data(), x.size());
}

void inv_logit(std::span<const double> eta, std::span<double> out) {
  assert(eta.size() == out.size());
  active()->inv_logit(eta.data(), out.data(), eta.size());
}

double bernoulli_loglik(std::span<const double> eta, std::span<const double> z) {
  assert(eta.size() == z.size());
  return active()->bernoulli_loglik(eta.data(), z.data(), eta.size());
}

}  // namespace un::kernels
