// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/kernels.hpp"

namespace vad::kern {

float dot_f32_scalar(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_f32_scalar(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_f32_scalar(float alpha, float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

namespace {

using DotFn = float (*)(const float*, const float*, std::size_t);
using AxpyFn = void (*)(float, const float*, float*, std::size_t);
using ScaleFn = void (*)(float, float*, std::size_t);

struct Dispatch {
  DotFn dot = dot_f32_scalar;
  AxpyFn axpy = axpy_f32_scalar;
  ScaleFn scale = scale_f32_scalar;
  bool avx2 = false;

  Dispatch() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
      dot = dot_f32_avx2;
      axpy = axpy_f32_avx2;
      scale = scale_f32_avx2;
      avx2 = true;
    }
#endif
  }
};

const Dispatch& dispatch() {
  static const Dispatch d;
  return d;
}

}  // namespace

float dot_f32(const float* a, const float* b, std::size_t n) {
  return dispatch().dot(a, b, n);
}

void axpy_f32(float alpha, const float* x, float* y, std::size_t n) {
  dispatch().axpy(alpha, x, y, n);
}

void scale_f32(float alpha, float* x, std::size_t n) {
  dispatch().scale(alpha, x, n);
}

bool simd_active() { return dispatch().avx2; }

const char* simd_name() { return dispatch().avx2 ? "avx2" : "scalar"; }

}  // namespace vad::kern
