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

#ifndef MSNET_SRC_NUMKIT_KERNEL_ROWS_HPP_
#define MSNET_SRC_NUMKIT_KERNEL_ROWS_HPP_

#include <cstddef>

// Per-row bodies shared by the serial and OpenMP kernels. Keeping one copy is
// what makes the two paths agree bit for bit.
namespace msnet::numkit::kernels::detail {

inline void affine_row(const double* x, const double* w, const double* b,
                       double* y, std::size_t in, std::size_t out) {
  for (std::size_t j = 0; j < out; ++j) y[j] = 0.0;
  for (std::size_t k = 0; k < in; ++k) {
    const double xk = x[k];
    const double* wk = w + k * out;
    for (std::size_t j = 0; j < out; ++j) y[j] += xk * wk[j];
  }
  for (std::size_t j = 0; j < out; ++j) y[j] += b[j];
}

// One row k of dw += x^T dy.
inline void xt_dy_row(const double* x, const double* dy, double* dw_row,
                      std::size_t k, std::size_t batch, std::size_t in,
                      std::size_t out) {
  for (std::size_t i = 0; i < batch; ++i) {
    const double xik = x[i * in + k];
    const double* dyi = dy + i * out;
    for (std::size_t j = 0; j < out; ++j) dw_row[j] += xik * dyi[j];
  }
}

inline void dy_wt_row(const double* dy_row, const double* w, double* dx_row,
                      std::size_t in, std::size_t out) {
  for (std::size_t k = 0; k < in; ++k) {
    const double* wk = w + k * out;
    double acc = 0.0;
    for (std::size_t j = 0; j < out; ++j) acc += dy_row[j] * wk[j];
    dx_row[k] = acc;
  }
}

}  // namespace msnet::numkit::kernels::detail

#endif  // MSNET_SRC_NUMKIT_KERNEL_ROWS_HPP_
