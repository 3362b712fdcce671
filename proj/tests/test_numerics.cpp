#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qkd/numerics.hpp>

#include <random>

using namespace qkd;

namespace {

struct ErfCase {
  cplx z;
  cplx want;
};

// Frozen arbitrary-precision values (tools/oracle_cerf.py, mpmath dps=40).
const ErfCase kErfTable[] = {
    {{1.0, 0.0}, {0.8427007929497149, 0.0}},
    {{0.0, 1.0}, {0.0, 1.6504257587975428}},
    {{2.0, 3.0}, {-20.829461427614568, 8.687318271470163}},
    {{0.5, 9.0}, {3.417756544764552e+33, -6.549219815287548e+33}},
    {{5.0, 5.0}, {0.9303796037430951, 0.03893619089512138}},
    {{9.9, 0.1}, {1.0, 1.4289024244732137e-44}},
    {{0.1, 9.9}, {1.920184889944134e+41, -8.095724267670392e+40}},
    {{2.9, 0.1}, {0.9999660204858614, 2.3811811058063842e-05}},
    {{3.1, 0.0}, {0.9999883513426328, 0.0}},
    {{0.0, 3.1}, {0.0, 2887.6410977063692}},
    {{7.0, 7.2}, {0.5328407872879105, 0.8406106534977307}},
    {{1e-08, 5.0}, {812.4882834111556, 8298273880.676763}},
    {{4.0, 0.0}, {0.9999999845827421, 0.0}},
    {{0.0, 6.0}, {0.0, 411275145582823.9}},
    {{-2.0, 3.0}, {20.829461427614568, 8.687318271470163}},
    {{2.0, -3.0}, {-20.829461427614568, -8.687318271470163}},
    {{-2.0, -3.0}, {20.829461427614568, -8.687318271470163}},
    {{-1.0, 0.0}, {-0.8427007929497149, 0.0}},
    {{-0.0, -4.0}, {0.0, -1296959.7307176392}},
    {{0.25, 0.75}, {0.47386755965954536, 0.9468077130877502}},
    {{30.0, 31.0}, {-2.2659551962661205e+24, 3.368755649936102e+24}},
};

double rel_err(cplx got, cplx want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

}  // namespace

TEST_CASE("cerf at origin and trivial points") {
  CHECK(cerf(cplx(0, 0)) == cplx(0, 0));
  CHECK(rel_err(cerf(cplx(1, 0)), cplx(0.8427007929497149, 0)) < 1e-13);
  CHECK(rel_err(cerf(cplx(0, 1)), cplx(0, 1.6504257587975429)) < 1e-13);
}

TEST_CASE("cerf against frozen oracle table") {
  for (const auto& c : kErfTable) {
    CAPTURE(c.z.real());
    CAPTURE(c.z.imag());
    CHECK(rel_err(cerf(c.z), c.want) < 1e-12);
  }
}

TEST_CASE("cerf conjugate and odd symmetry, random sweep") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    cplx z(u(rng), u(rng));
    if (std::norm(z) > 100.0) continue;
    const cplx w = cerf(z);
    CHECK(rel_err(cerf(std::conj(z)), std::conj(w)) < 1e-12);
    CHECK(rel_err(cerf(-z), -w) < 1e-12);
  }
}

TEST_CASE("cerf domain errors") {
  CHECK_THROWS_AS(cerf(cplx(0.0, 30.0)), std::range_error);
  CHECK_THROWS_AS(cerf(cplx(2e6, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(cerf(cplx(std::nan(""), 0.0)), std::invalid_argument);
}

TEST_CASE("integrate_1d: Gaussian density normalizes") {
  auto f = [](double x) { return cplx(std::exp(-x * x / 2.0) / std::sqrt(2.0 * pi), 0.0); };
  auto r = integrate_1d(f, {-40.0, 0.0, 40.0}, 1e-12);
  CHECK(std::abs(r.value - 1.0) < 1e-10);
  CHECK(r.abs_error_estimate >= 0.0);
}

TEST_CASE("integrate_1d: infinite tails via rational map") {
  auto f = [](double x) { return cplx(std::exp(-x * x), 0.0); };
  const double inf = std::numeric_limits<double>::infinity();
  auto r = integrate_1d(f, {-inf, -1.0, 1.0, inf}, 1e-12);
  CHECK(std::abs(r.value - std::sqrt(pi)) < 1e-10);
}

TEST_CASE("integrate_1d: oscillatory complex integrand") {
  // int exp(-x^2 + i k x) dx = sqrt(pi) exp(-k^2/4)
  const double k = 3.0;
  auto f = [k](double x) { return std::exp(cplx(-x * x, k * x)); };
  auto r = integrate_1d(f, {-30.0, 0.0, 30.0}, 1e-12);
  const cplx want = std::sqrt(pi) * std::exp(-k * k / 4.0);
  CHECK(std::abs(r.value - want) < 1e-10);
}

TEST_CASE("integrate_1d: breakpoint-aligned discontinuity") {
  auto f = [](double x) { return cplx(x < 1.0 ? 1.0 : 0.5, 0.0); };
  auto r = integrate_1d(f, {0.0, 1.0, 3.0}, 1e-12);
  CHECK(std::abs(r.value - 2.0) < 1e-12);
}

TEST_CASE("integrate_1d: budget exhaustion reported") {
  auto f = [](double x) { return std::exp(cplx(0.0, 5e4 * x)); };
  CHECK_THROWS_AS(integrate_1d(f, {-1.0, 1.0}, 1e-14, 900), std::runtime_error);
}

TEST_CASE("eig_hermitian basics") {
  Mat id = Mat::Identity(3, 3);
  auto e = eig_hermitian(id);
  for (int i = 0; i < 3; ++i) CHECK(e.values[i] == doctest::Approx(1.0));

  Mat d(2, 2);
  d << 2.0, 0.0, 0.0, -1.0;
  auto ed = eig_hermitian(d);
  CHECK(ed.values[0] == doctest::Approx(-1.0));
  CHECK(ed.values[1] == doctest::Approx(2.0));

  Mat x(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  auto ex = eig_hermitian(x);
  CHECK(ex.values[0] == doctest::Approx(-1.0));
  CHECK(ex.values[1] == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian reconstruction and symmetry check") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    Mat a(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) a(i, j) = cplx(g(rng), g(rng));
    Mat h = 0.5 * (a + a.adjoint());
    auto e = eig_hermitian(h);
    Mat rec = e.vectors * e.values.asDiagonal().toDenseMatrix().cast<cplx>() * e.vectors.adjoint();
    CHECK((h - rec).norm() <= 1e-10 * std::max(1.0, h.norm()));
  }
  Mat bad(2, 2);
  bad << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(eig_hermitian(bad), std::invalid_argument);
}

TEST_CASE("matrix_log_regularized") {
  Mat id = Mat::Identity(3, 3);
  CHECK(matrix_log_regularized(id).norm() < 1e-12);

  Mat d(2, 2);
  d << std::exp(1.0), 0.0, 0.0, std::exp(2.0);
  Mat l = matrix_log_regularized(d);
  CHECK(std::abs(l(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(l(1, 1) - 2.0) < 1e-12);

  Mat s(2, 2);
  s << 0.0, 0.0, 0.0, 1.0;
  Mat ls = matrix_log_regularized(s, 1e-12);
  CHECK(ls(0, 0).real() == doctest::Approx(std::log(1e-12)));
  CHECK(std::abs(ls(1, 1)) < 1e-12);
}

TEST_CASE("matrix_log_regularized inverts exp on bounded spectra") {
  std::mt19937 rng(13);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    Mat a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = cplx(g(rng), g(rng));
    Mat h = 0.5 * (a + a.adjoint());
    auto e = eig_hermitian(h);
    // rescale spectrum into [-5, 5]
    const double m = std::max(std::abs(e.values[0]), std::abs(e.values[3]));
    h *= 5.0 / std::max(m, 1e-12);
    e = eig_hermitian(h);
    Eigen::VectorXd ex = e.values.array().exp();
    Mat expm = e.vectors * ex.asDiagonal().toDenseMatrix().cast<cplx>() * e.vectors.adjoint();
    CHECK((matrix_log_regularized(expm) - h).norm() < 1e-9 * std::max(1.0, h.norm()));
  }
}

TEST_CASE("binary entropy endpoints") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
}
