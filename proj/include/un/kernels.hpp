#pragma once

// Vectorized numeric kernels with runtime backend dispatch.
//
// Every backend (scalar reference, AVX2, NEON) is required to produce
// bit-identical doubles for identical inputs. That holds because all
// backends share one accumulation order (four partial sums in lane order,
// reduced pairwise, scalar tail last) and one polynomial implementation of
// exp/log1p, and because the kernel translation units are compiled without
// floating-point contraction. Backend choice therefore affects speed only.
//
// Dispatch: set_backend_auto() picks the best backend the CPU supports,
// honoring the UN_KERNEL environment variable (auto|scalar|avx2|neon) as an
// override. It runs once automatically before the first kernel call.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace un::kernels {

enum class Backend { scalar, avx2, neon };

std::string to_string(Backend b);

// Backends compiled into this binary and runnable on this CPU.
std::vector<Backend> available_backends();

// Throws std::invalid_argument if the backend is unavailable.
void set_backend(Backend b);

// CPU detection plus UN_KERNEL override.
void set_backend_auto();

Backend active_backend();

// sum of x
double sum(std::span<const double> x);

// dot(x, y)
double dot(std::span<const double> x, std::span<const double> y);

// sum of w[i] * x[i] * y[i]
double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y);

// y[i] += a * x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);

// out[i] = 1 / (1 + exp(-eta[i]))
void inv_logit(std::span<const double> eta, std::span<double> out);

// sum of z[i] * eta[i] - log(1 + exp(eta[i])), computed stably for large |eta|
double bernoulli_loglik(std::span<const double> eta, std::span<const double> z);

}  // namespace un::kernels
