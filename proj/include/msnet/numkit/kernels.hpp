/* Copyright 2026 The MSnet Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MSNET_NUMKIT_KERNELS_HPP_
#define MSNET_NUMKIT_KERNELS_HPP_

#include <cstddef>
#include <span>

// Dense inner loops behind the affine layers. Each kernel exists twice: a
// serial reference and an OpenMP version that splits the outer loop across
// threads. Every output element is produced by a single thread with the same
// summation order as the reference, so both versions are bit-identical.
//
// Matrices are row-major spans with explicit dimensions.
namespace msnet::numkit::kernels {

namespace serial {

// y[batch x out] = x[batch x in] * w[in x out] + b[out]
void affine(std::span<const double> x, std::span<const double> w,
            std::span<const double> b, std::span<double> y, std::size_t batch,
            std::size_t in, std::size_t out);

// dw[in x out] += x^T[in x batch] * dy[batch x out]
void accumulate_xt_dy(std::span<const double> x, std::span<const double> dy,
                      std::span<double> dw, std::size_t batch, std::size_t in,
                      std::size_t out);

// dx[batch x in] = dy[batch x out] * w^T[out x in]
void dy_wt(std::span<const double> dy, std::span<const double> w,
           std::span<double> dx, std::size_t batch, std::size_t in,
           std::size_t out);

}  // namespace serial

namespace omp {

void affine(std::span<const double> x, std::span<const double> w,
            std::span<const double> b, std::span<double> y, std::size_t batch,
            std::size_t in, std::size_t out);

void accumulate_xt_dy(std::span<const double> x, std::span<const double> dy,
                      std::span<double> dw, std::size_t batch, std::size_t in,
                      std::size_t out);

void dy_wt(std::span<const double> dy, std::span<const double> w,
           std::span<double> dx, std::size_t batch, std::size_t in,
           std::size_t out);

}  // namespace omp

// True when the library was compiled with OpenMP.
bool openmp_available();

// Process-wide switch between the two implementations; defaults to parallel
// when OpenMP is available. Callers that want the reference path (tests,
// benchmarks) flip it explicitly.
void set_parallel(bool enabled);
bool parallel_enabled();

// Below this many multiply-adds the dispatchers stay serial.
inline constexpr std::size_t kParallelWorkThreshold = 1 << 15;

void affine(std::span<const double> x, std::span<const double> w,
            std::span<const double> b, std::span<double> y, std::size_t batch,
            std::size_t in, std::size_t out);
void accumulate_xt_dy(std::span<const double> x, std::span<const double> dy,
                      std::span<double> dw, std::size_t batch, std::size_t in,
                      std::size_t out);
void dy_wt(std::span<const double> dy, std::span<const double> w,
           std::span<double> dx, std::size_t batch, std::size_t in,
           std::size_t out);

}  // namespace msnet::numkit::kernels

#endif  // MSNET_NUMKIT_KERNELS_HPP_
