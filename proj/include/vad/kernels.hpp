// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_KERNELS_HPP
#define VAD_KERNELS_HPP

#include <cstddef>

namespace vad::kern {

// Scalar reference kernels. These are the ground truth the SIMD
// variants are equivalence-tested against.
float dot_f32_scalar(const float* a, const float* b, std::size_t n);
void axpy_f32_scalar(float alpha, const float* x, float* y, std::size_t n);
void scale_f32_scalar(float alpha, float* x, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
float dot_f32_avx2(const float* a, const float* b, std::size_t n);
void axpy_f32_avx2(float alpha, const float* x, float* y, std::size_t n);
void scale_f32_avx2(float alpha, float* x, std::size_t n);
#endif

// Dispatched entry points; the implementation is selected once at
// startup based on CPU features.
float dot_f32(const float* a, const float* b, std::size_t n);
void axpy_f32(float alpha, const float* x, float* y, std::size_t n);
void scale_f32(float alpha, float* x, std::size_t n);

// True when the AVX2 path is the active dispatch target.
bool simd_active();
const char* simd_name();

// Generic wrappers so templated numeric code picks up the fast float
// path and a plain scalar loop for double.
template <typename T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <>
inline float dot<float>(const float* a, const float* b, std::size_t n) {
  return dot_f32(a, b, n);
}

template <typename T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <>
inline void axpy<float>(float alpha, const float* x, float* y, std::size_t n) {
  axpy_f32(alpha, x, y, n);
}

template <typename T>
inline void scale(T alpha, T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <>
inline void scale<float>(float alpha, float* x, std::size_t n) {
  scale_f32(alpha, x, n);
}

// y = M x, M row-major (rows x cols).
template <typename T>
inline void matvec(const T* m, std::size_t rows, std::size_t cols, const T* x,
                   T* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(m + r * cols, x, cols);
}

// dx += M^T dy.
template <typename T>
inline void matvec_t_acc(const T* m, std::size_t rows, std::size_t cols,
                         const T* dy, T* dx) {
  for (std::size_t r = 0; r < rows; ++r) axpy(dy[r], m + r * cols, dx, cols);
}

// M += dy x^T (rank-1 gradient accumulation).
template <typename T>
inline void ger_acc(T* m, std::size_t rows, std::size_t cols, const T* dy,
                    const T* x) {
  for (std::size_t r = 0; r < rows; ++r) axpy(dy[r], x, m + r * cols, cols);
}

}  // namespace vad::kern

#endif  // VAD_KERNELS_HPP
