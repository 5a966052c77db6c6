#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace siatext {

// Row-major dense matrix; the only tensor shape the encoder needs.
template <typename T>
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, T(0)) {}

  T* row(size_t r) { return data.data() + r * cols; }
  const T* row(size_t r) const { return data.data() + r * cols; }
  T& at(size_t r, size_t c) { return data[r * cols + c]; }
  T at(size_t r, size_t c) const { return data[r * cols + c]; }
};

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) {
    T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  T e = std::exp(x);
  return e / (T(1) + e);
}

// y += M x
template <typename T>
void gemv_add(const Matrix<T>& m, const T* x, T* y) {
  for (size_t r = 0; r < m.rows; ++r) {
    const T* row = m.row(r);
    T acc = T(0);
    for (size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// y += M^T x  (x has m.rows entries, y has m.cols entries)
template <typename T>
void gemv_transpose_add(const Matrix<T>& m, const T* x, T* y) {
  for (size_t r = 0; r < m.rows; ++r) {
    const T* row = m.row(r);
    const T xr = x[r];
    for (size_t c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
  }
}

// M += a b^T  (a has m.rows entries, b has m.cols entries)
template <typename T>
void outer_add(Matrix<T>& m, const T* a, const T* b) {
  for (size_t r = 0; r < m.rows; ++r) {
    T* row = m.row(r);
    const T ar = a[r];
    for (size_t c = 0; c < m.cols; ++c) row[c] += ar * b[c];
  }
}

template <typename T>
T dot(const T* a, const T* b, size_t n) {
  T acc = T(0);
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
T norm(const T* a, size_t n) {
  return std::sqrt(dot(a, a, n));
}

}  // namespace siatext
