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

#include "msnet/numkit/kernels.hpp"

#include <atomic>
#include <cstdint>

#include "kernel_rows.hpp"

namespace msnet::numkit::kernels {

namespace serial {

void affine(std::span<const double> x, std::span<const double> w,
            std::span<const double> b, std::span<double> y, std::size_t batch,
            std::size_t in, std::size_t out) {
  for (std::size_t i = 0; i < batch; ++i) {
    detail::affine_row(x.data() + i * in, w.data(), b.data(),
                       y.data() + i * out, in, out);
  }
}

void accumulate_xt_dy(std::span<const double> x, std::span<const double> dy,
                      std::span<double> dw, std::size_t batch, std::size_t in,
                      std::size_t out) {
  for (std::size_t k = 0; k < in; ++k) {
    detail::xt_dy_row(x.data(), dy.data(), dw.data() + k * out, k, batch, in,
                      out);
  }
}

void dy_wt(std::span<const double> dy, std::span<const double> w,
           std::span<double> dx, std::size_t batch, std::size_t in,
           std::size_t out) {
  for (std::size_t i = 0; i < batch; ++i) {
    detail::dy_wt_row(dy.data() + i * out, w.data(), dx.data() + i * in, in,
                      out);
  }
}

}  // namespace serial

namespace omp {

void affine(std::span<const double> x, std::span<const double> w,
            std::span<const double> b, std::span<double> y, std::size_t batch,
            std::size_t in, std::size_t out) {
  const auto n = static_cast<std::int64_t>(batch);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    detail::affine_row(x.data() + i * in, w.data(), b.data(),
                       y.data() + i * out, in, out);
  }
}

void accumulate_xt_dy(std::span<const double> x, std::span<const double> dy,
                      std::span<double> dw, std::size_t batch, std::size_t in,
                      std::size_t out) {
  const auto n = static_cast<std::int64_t>(in);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    detail::xt_dy_row(x.data(), dy.data(), dw.data() + k * out,
                      static_cast<std::size_t>(k), batch, in, out);
  }
}

void dy_wt(std::span<const double> dy, std::span<const double> w,
           std::span<double> dx, std::size_t batch, std::size_t in,
           std::size_t out) {
  const auto n = static_cast<std::int64_t>(batch);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    detail::dy_wt_row(dy.data() + i * out, w.data(), dx.data() + i * in, in,
                      out);
  }
}

}  // namespace omp

namespace {

#ifdef _OPENMP
std::atomic<bool> g_parallel{true};
#else
std::atomic<bool> g_parallel{false};
#endif

bool use_parallel(std::size_t work) {
  return g_parallel.load(std::memory_order_relaxed) &&
         work >= kParallelWorkThreshold;
}

}  // namespace

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

void set_parallel(bool enabled) {
  g_parallel.store(enabled && openmp_available(), std::memory_order_relaxed);
}

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void affine(std::span<const double> x, std::span<const double> w,
            std::span<const double> b, std::span<double> y, std::size_t batch,
            std::size_t in, std::size_t out) {
  if (use_parallel(batch * in * out)) {
    omp::affine(x, w, b, y, batch, in, out);
  } else {
    serial::affine(x, w, b, y, batch, in, out);
  }
}

void accumulate_xt_dy(std::span<const double> x, std::span<const double> dy,
                      std::span<double> dw, std::size_t batch, std::size_t in,
                      std::size_t out) {
  if (use_parallel(batch * in * out)) {
    omp::accumulate_xt_dy(x, dy, dw, batch, in, out);
  } else {
    serial::accumulate_xt_dy(x, dy, dw, batch, in, out);
  }
}

void dy_wt(std::span<const double> dy, std::span<const double> w,
           std::span<double> dx, std::size_t batch, std::size_t in,
           std::size_t out) {
  if (use_parallel(batch * in * out)) {
    omp::dy_wt(dy, w, dx, batch, in, out);
  } else {
    serial::dy_wt(dy, w, dx, batch, in, out);
  }
}

}  // namespace msnet::numkit::kernels
