#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace aoisched::detail {

// Solves A x = b in place (A row-major n x n, answer left in b) by Gaussian
// elimination with partial pivoting. Throws on a numerically singular pivot.
inline void solve_linear_inplace(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(a[static_cast<std::size_t>(r) * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-13)
      throw std::runtime_error("singular linear system (no unique stationary distribution)");
    if (pivot != col) {
      for (int c = col; c < n; ++c)
        std::swap(a[static_cast<std::size_t>(pivot) * n + c],
                  a[static_cast<std::size_t>(col) * n + c]);
      std::swap(b[pivot], b[col]);
    }
    double inv = 1.0 / a[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      double f = a[static_cast<std::size_t>(r) * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[static_cast<std::size_t>(r) * n + c] * b[c];
    b[r] = s / a[static_cast<std::size_t>(r) * n + r];
  }
}

// Stationary row vector of a dense row-stochastic matrix P (row-major):
// theta^T P = theta^T with sum(theta) = 1, via (I - P^T) with the last
// equation replaced by the normalization. work_a/work_b are scratch buffers
// reused across calls.
inline void stationary_dense(const std::vector<double>& p, int n, std::vector<double>& theta,
                             std::vector<double>& work_a, std::vector<double>& work_b) {
  work_a.assign(static_cast<std::size_t>(n) * n, 0.0);
  work_b.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      work_a[static_cast<std::size_t>(i) * n + j] =
          (i == j ? 1.0 : 0.0) - p[static_cast<std::size_t>(j) * n + i];
  for (int j = 0; j < n; ++j) work_a[static_cast<std::size_t>(n - 1) * n + j] = 1.0;
  work_b[n - 1] = 1.0;
  solve_linear_inplace(work_a, work_b, n);
  theta = work_b;
}

}  // namespace aoisched::detail
