#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <vector>

#include "starnoma/linalg.hpp"
#include "starnoma/rng.hpp"

using namespace starnoma;

namespace {

CMat random_cmat(Rng& rng, int rows, int cols) {
  CMat m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m[i] = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return m;
}

// Independent product oracle over raw arrays.
CMat naive_matmul(const CMat& a, const CMat& b) {
  CMat out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      std::complex<double> acc{0, 0};
      for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

double max_abs_diff(const CMat& a, const CMat& b) {
  REQUIRE(a.same_shape(b));
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("matmul identity and scalar cases") {
  Rng rng(11);
  const CMat a = random_cmat(rng, 2, 3);
  CHECK(max_abs_diff(matmul(CMat::identity(2), a), a) == 0.0);

  const CMat j(1, 1, {cplx{0, 1}});
  const CMat jj = matmul(j, j);
  CHECK(jj(0, 0).real() == Catch::Approx(-1.0).margin(1e-15));
  CHECK(jj(0, 0).imag() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("matmul matches naive triple-loop oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat a = random_cmat(rng, 3, 3);
    const CMat b = random_cmat(rng, 3, 3);
    CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) < 1e-12);
  }
}

TEST_CASE("matmul rejects shape mismatch") {
  CHECK_THROWS_AS(matmul(CMat(2, 3), CMat(2, 3)), std::invalid_argument);
}

TEST_CASE("matmul associativity on random conformable triples") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat a = random_cmat(rng, 2, 4);
    const CMat b = random_cmat(rng, 4, 3);
    const CMat c = random_cmat(rng, 3, 5);
    const CMat lhs = matmul(matmul(a, b), c);
    const CMat rhs = matmul(a, matmul(b, c));
    for (size_t i = 0; i < lhs.size(); ++i)
      CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-10 * std::max(1.0, std::abs(rhs[i])));
  }
}

TEST_CASE("hermitian basics") {
  const CMat s(1, 1, {cplx{1, 2}});
  CHECK(hermitian(s)(0, 0) == cplx{1, -2});

  const CMat sym(2, 2, {cplx{1, 0}, cplx{2, 0}, cplx{2, 0}, cplx{3, 0}});
  CHECK(max_abs_diff(hermitian(sym), sym) == 0.0);

  Rng rng(14);
  const CMat a = random_cmat(rng, 3, 4);
  CHECK(max_abs_diff(hermitian(hermitian(a)), a) == 0.0);
}

TEST_CASE("hermitian reverses matmul") {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat a = random_cmat(rng, 2, 3);
    const CMat b = random_cmat(rng, 3, 4);
    CHECK(max_abs_diff(hermitian(matmul(a, b)), matmul(hermitian(b), hermitian(a))) < 1e-12);
  }
}

TEST_CASE("frobenius norm") {
  CHECK(frobenius_norm(CMat(3, 2)) == 0.0);

  const CMat v(2, 1, {cplx{3, 0}, cplx{0, 4}});
  CHECK(frobenius_norm(v) == Catch::Approx(5.0).margin(1e-15));

  Rng rng(16);
  const CMat a = random_cmat(rng, 5, 1);
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) sum += std::norm(a[i]);
  CHECK(frobenius_norm(a) == Catch::Approx(std::sqrt(sum)).epsilon(1e-12));
}

TEST_CASE("diag_from_vector") {
  const std::vector<cplx> ones{cplx{1, 0}, cplx{1, 0}};
  CHECK(max_abs_diff(diag_from_vector(ones), CMat::identity(2)) == 0.0);

  const std::vector<cplx> j{cplx{0, 1}};
  CHECK(diag_from_vector(j)(0, 0) == cplx{0, 1});

  Rng rng(17);
  const CMat x = random_cmat(rng, 4, 1);
  std::vector<cplx> v;
  for (int i = 0; i < 4; ++i) v.push_back(cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)});
  const CMat dx = matmul(diag_from_vector(v), x);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(dx(i, 0) - v[i] * x(i, 0)) < 1e-15);

  CHECK_THROWS_AS(diag_from_vector(std::span<const cplx>{}), std::invalid_argument);
}

TEST_CASE("rng determinism and stream separation") {
  Rng a(123), b(123), c(124);
  bool identical = true, distinct = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    identical &= x == b.next_u64();
    distinct |= x != c.next_u64();
  }
  CHECK(identical);
  CHECK(distinct);

  Rng parent(55);
  parent.next_u64();
  const Rng child_after = parent.derive(7);
  CHECK(Rng(55).derive(7).next_u64() == Rng(child_after).next_u64());
  CHECK(Rng(55).derive(7).next_u64() != Rng(55).derive(8).next_u64());
}

TEST_CASE("sample_cn01 determinism and moments") {
  Rng a(99), b(99);
  const CMat m1 = sample_cn01(a, 4, 3);
  const CMat m2 = sample_cn01(b, 4, 3);
  CHECK(max_abs_diff(m1, m2) == 0.0);

  Rng rng(1234);
  const int n = 100000;
  const CMat big = sample_cn01(rng, n, 1);
  double mag2 = 0, re_mean = 0, re_sq = 0;
  for (size_t i = 0; i < big.size(); ++i) {
    mag2 += std::norm(big[i]);
    re_mean += big[i].real();
    re_sq += big[i].real() * big[i].real();
  }
  mag2 /= n;
  re_mean /= n;
  const double re_var = re_sq / n - re_mean * re_mean;
  CHECK(mag2 == Catch::Approx(1.0).epsilon(0.02));
  CHECK(re_var == Catch::Approx(0.5).epsilon(0.03));
}

TEST_CASE("cmat rejects non-finite entries") {
  CHECK_THROWS_AS(CMat(1, 1, {cplx{std::nan(""), 0}}), std::invalid_argument);
  CHECK_THROWS_AS(CMat(1, 2, {cplx{1, 0}}), std::invalid_argument);
}
