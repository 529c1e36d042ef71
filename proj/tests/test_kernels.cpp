#include <cmath>
#include <vector>

#include "doctest.h"
#include "vad/kernels.hpp"
#include "vad/rng.hpp"

using namespace vad;

namespace {

std::vector<float> random_vec(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

}  // namespace

TEST_CASE("dot: scalar reference basics") {
  const std::vector<float> a = {1.0f, 2.0f, 3.0f};
  const std::vector<float> b = {4.0f, -5.0f, 6.0f};
  CHECK(kern::dot_f32_scalar(a.data(), b.data(), 3) == doctest::Approx(12.0f));
  CHECK(kern::dot_f32_scalar(a.data(), b.data(), 0) == 0.0f);
}

TEST_CASE("simd variants match scalar reference") {
  Rng rng(42);
  // lengths straddling the vector width, remainders included
  for (std::size_t n : {1u, 7u, 8u, 9u, 15u, 16u, 17u, 63u, 64u, 512u, 1000u}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);

    const float d_scalar = kern::dot_f32_scalar(a.data(), b.data(), n);
    const float d_dispatch = kern::dot_f32(a.data(), b.data(), n);
    CHECK(std::fabs(d_scalar - d_dispatch) <=
          1e-4f * std::max(1.0f, std::fabs(d_scalar)));

    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    kern::axpy_f32_scalar(0.37f, a.data(), y1.data(), n);
    kern::axpy_f32(0.37f, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::fabs(y1[i] - y2[i]) <= 1e-5f);

    auto s1 = a;
    auto s2 = a;
    kern::scale_f32_scalar(-1.25f, s1.data(), n);
    kern::scale_f32(-1.25f, s2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s1[i] == s2[i]);
  }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 variants agree with scalar when supported") {
  if (!kern::simd_active()) return;
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + rng.below(600);
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    const float ds = kern::dot_f32_scalar(a.data(), b.data(), n);
    const float dv = kern::dot_f32_avx2(a.data(), b.data(), n);
    CHECK(std::fabs(ds - dv) <= 1e-4f * std::max(1.0f, std::fabs(ds)));
  }
}
#endif

TEST_CASE("matvec and transpose accumulate match naive loops") {
  Rng rng(3);
  const std::size_t rows = 13, cols = 29;
  std::vector<float> m = random_vec(rng, rows * cols);
  std::vector<float> x = random_vec(rng, cols);
  std::vector<float> y(rows, 0.0f);
  kern::matvec(m.data(), rows, cols, x.data(), y.data());
  for (std::size_t r = 0; r < rows; ++r) {
    float acc = 0.0f;
    for (std::size_t c = 0; c < cols; ++c) acc += m[r * cols + c] * x[c];
    CHECK(y[r] == doctest::Approx(acc).epsilon(1e-4));
  }

  std::vector<float> dy = random_vec(rng, rows);
  std::vector<float> dx(cols, 0.0f);
  kern::matvec_t_acc(m.data(), rows, cols, dy.data(), dx.data());
  for (std::size_t c = 0; c < cols; ++c) {
    float acc = 0.0f;
    for (std::size_t r = 0; r < rows; ++r) acc += m[r * cols + c] * dy[r];
    CHECK(dx[c] == doctest::Approx(acc).epsilon(1e-4));
  }

  std::vector<float> g(rows * cols, 0.0f);
  kern::ger_acc(g.data(), rows, cols, dy.data(), x.data());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      CHECK(g[r * cols + c] == doctest::Approx(dy[r] * x[c]).epsilon(1e-5));
}

TEST_CASE("double wrappers are plain scalar loops") {
  const std::vector<double> a = {0.5, -1.5, 2.5};
  const std::vector<double> b = {2.0, 2.0, 2.0};
  CHECK(kern::dot(a.data(), b.data(), 3) == doctest::Approx(3.0));
}
