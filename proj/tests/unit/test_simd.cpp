#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "splitting/exact.hpp"
#include "splitting/simd/kernels.hpp"

using namespace splitting;
using simd::Isa;

namespace {

std::vector<Isa> variants() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (simd::available(isa)) out.push_back(isa);
  }
  return out;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar is always available and active honours the table") {
  CHECK(simd::available(Isa::scalar));
  CHECK(simd::available(simd::active().isa));
  CHECK(simd::name(Isa::scalar) == "scalar");
}

TEST_CASE("dot: every variant is bit-identical to scalar at every length") {
  std::mt19937_64 gen(7);
  const auto& ref = simd::table(Isa::scalar);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto a = random_vector(n, gen), b = random_vector(n, gen);
    const double expect = ref.dot(a.data(), b.data(), n);
    for (Isa isa : variants()) {
      CAPTURE(simd::name(isa));
      CAPTURE(n);
      const double got = simd::table(isa).dot(a.data(), b.data(), n);
      CHECK(std::memcmp(&got, &expect, sizeof got) == 0);
    }
  }
}

TEST_CASE("dot: close to the plain left-to-right sum") {
  std::mt19937_64 gen(11);
  for (std::size_t n : {1u, 3u, 17u, 1000u, 4099u}) {
    const auto a = random_vector(n, gen), b = random_vector(n, gen);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    const double ref = simd::dot_reference(a, b);
    for (Isa isa : variants()) {
      CHECK(std::abs(simd::table(isa).dot(a.data(), b.data(), n) - ref) <= 1e-14 * mag);
    }
  }
}

TEST_CASE("binomial_step: bit-identical and equal to the binomial law") {
  for (double v : {0.5, 1.0 / 3.0, 0.1, 0.9}) {
    std::vector<std::vector<double>> rows;
    for (Isa isa : variants()) {
      std::vector<double> cur(66, 0.0), next(66, 0.0);
      cur[0] = 1.0;
      for (std::size_t m = 1; m <= 64; ++m) {
        std::fill(next.begin(), next.end(), 0.0);
        simd::table(isa).binomial_step(cur.data(), next.data(), m, v);
        std::swap(cur, next);
      }
      rows.push_back(cur);
    }
    for (const auto& r : rows) CHECK(same_bits(r, rows.front()));
    // Row 64 holds P(Bin(64, v) = k).
    const auto& row = rows.front();
    for (int k : {0, 1, 20, 32, 63, 64}) {
      const double expect =
          std::exp(std::lgamma(65.0) - std::lgamma(k + 1.0) - std::lgamma(65.0 - k) + k * std::log(v) +
                   (64 - k) * std::log1p(-v));
      CHECK(row[k] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("binomial_step: zero-length row") {
  for (Isa isa : variants()) {
    double prev = 1.0, next = 42.0;
    simd::table(isa).binomial_step(&prev, &next, 0, 0.5);
    CHECK(next == 0.0);
  }
}

TEST_CASE("float cost table is identical under every kernel variant") {
  const auto spec = SplittingSpec::qary({Rational(1, 3), Rational(2, 3)}, 2);
  const auto ref = float_cost_table(spec, 3000, simd::table(Isa::scalar)).values;
  for (Isa isa : variants()) {
    CAPTURE(simd::name(isa));
    CHECK(same_bits(float_cost_table(spec, 3000, simd::table(isa)).values, ref));
  }
  CHECK(same_bits(expected_cost_table(spec, 3000, CostMode::float64).values, ref));
}
