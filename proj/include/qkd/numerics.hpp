#pragma once

// Numerical kernels shared by every other header: the complex error
// function, complex-valued adaptive quadrature, and small Hermitian
// matrix utilities built on Eigen's SelfAdjointEigenSolver.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace qkd {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Complex error function.
//
// Two regimes: a Maclaurin series for |z| <= 3 and the trapezoidal-sum
// expansion (Abramowitz & Stegun 7.1.29) beyond. The series terms in the
// latter are evaluated with the exp(-x^2) prefactor folded into the
// exponent so that arguments with large imaginary part never overflow
// as long as the result itself is representable (|Im z|^2 - |Re z|^2
// bounded by the exp range).
// ---------------------------------------------------------------------------

namespace detail {

inline cplx cerf_upper_right(double x, double y) {
  // Requires x >= 0, y >= 0.
  if (x * x + y * y <= 9.0) {
    const cplx z(x, y);
    const cplx zz = z * z;
    cplx term = z;
    cplx sum = 0.0;
    for (int n = 1; n < 200; ++n) {
      sum += term / double(2 * n - 1);
      term *= -zz / double(n);
      if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
    }
    return (2.0 / std::sqrt(pi)) * sum;
  }

  const double ex2 = -x * x;
  const double c2 = std::cos(2.0 * x * y);
  const double s2 = std::sin(2.0 * x * y);
  double re = std::erf(x);
  double im = 0.0;
  if (x == 0.0) {
    im += y / pi;
  } else {
    const double pref = (ex2 > -745.0) ? std::exp(ex2) / (2.0 * pi * x) : 0.0;
    re += pref * (1.0 - c2);
    im += pref * s2;
  }
  const double ex_only = (ex2 > -745.0) ? std::exp(ex2) : 0.0;
  const int kmax = int(2.0 * y) + 44;
  for (int k = 1; k <= kmax; ++k) {
    const double eu = ex2 + k * y - 0.25 * k * k;
    const double ev = ex2 - k * y - 0.25 * k * k;
    const double u = (eu > -745.0) ? std::exp(eu) : 0.0;
    const double v = (ev > -745.0) ? std::exp(ev) : 0.0;
    const double ch = 0.5 * (u + v);
    const double sh = 0.5 * (u - v);
    const double gk = (-0.25 * k * k > -745.0) ? std::exp(-0.25 * k * k) : 0.0;
    const double den = k * double(k) + 4.0 * x * x;
    re += (2.0 / pi) * (2.0 * x * ex_only * gk - 2.0 * x * ch * c2 + k * sh * s2) / den;
    im += (2.0 / pi) * (2.0 * x * ch * s2 + k * sh * c2) / den;
  }
  return cplx(re, im);
}

}  // namespace detail

inline cplx cerf(cplx z) {
  if (!(std::isfinite(z.real()) && std::isfinite(z.imag())))
    throw std::invalid_argument("cerf: non-finite argument");
  if (std::abs(z) >= 1e6)
    throw std::invalid_argument("cerf: |z| out of supported range (< 1e6)");
  if (z.real() < 0.0) return -cerf(-z);
  if (z.imag() < 0.0) return std::conj(cerf(std::conj(z)));
  const double x = z.real(), y = z.imag();
  if (y * y - x * x > 708.0)
    throw std::range_error("cerf: result overflows double range");
  return detail::cerf_upper_right(x, y);
}

// erfc(z) = 1 - erf(z); used by interval overlap integrals.
inline cplx cerfc(cplx z) { return 1.0 - cerf(z); }

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7-15) quadrature for complex integrands of a
// real variable. Panels are seeded from the caller's breakpoint list so
// that discontinuities (e.g. scatterer bin edges) never sit inside a
// panel, then refined by largest estimated error first. Infinite end
// breakpoints are handled with a rational map onto a finite panel.
// ---------------------------------------------------------------------------

struct QuadratureResult {
  cplx value{0.0, 0.0};
  double abs_error_estimate = 0.0;
  int evaluations = 0;
};

namespace detail {

// 15-point Kronrod nodes/weights on [-1,1], 7-point Gauss weights embedded.
inline constexpr double gk_nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double gk_wk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double gk_wg[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

struct Panel {
  double a, b;
  cplx value;
  double err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

template <typename F>
Panel gk15(const F& f, double a, double b) {
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  cplx kr = 0.0, gs = 0.0;
  for (int i = 0; i < 15; ++i) {
    const cplx fv = f(c + h * gk_nodes[i]);
    kr += gk_wk[i] * fv;
    if (i % 2 == 1) gs += gk_wg[i / 2] * fv;
  }
  kr *= h;
  gs *= h;
  const double diff = std::abs(kr - gs);
  // Standard QUADPACK-style sharpened estimate.
  const double err = std::pow(200.0 * diff, 1.5) < diff ? std::pow(200.0 * diff, 1.5) : diff;
  return Panel{a, b, kr, err};
}

}  // namespace detail

inline QuadratureResult integrate_1d(const std::function<cplx(double)>& f,
                                     std::vector<double> breakpoints,
                                     double tol = 1e-10,
                                     int max_evaluations = 400000) {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("integrate_1d: need at least two breakpoints");
  std::sort(breakpoints.begin(), breakpoints.end());

  // Map [-inf, b0] and [a_last, inf] tails through t -> a +- t/(1-t).
  auto make_tail = [&](double edge, int sign) {
    return [&f, edge, sign](double t) -> cplx {
      const double u = 1.0 - t;
      const double x = edge + sign * t / u;
      return f(x) / (u * u);
    };
  };

  std::priority_queue<detail::Panel> heap;
  int evals = 0;
  std::vector<std::pair<std::function<cplx(double)>, std::pair<double, double>>> segments;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    double a = breakpoints[i], b = breakpoints[i + 1];
    if (a == b) continue;
    if (std::isinf(a) && std::isinf(b))
      throw std::invalid_argument("integrate_1d: doubly infinite panel; add a finite breakpoint");
    if (std::isinf(a)) {
      segments.push_back({make_tail(b, -1), {0.0, 1.0}});
    } else if (std::isinf(b)) {
      segments.push_back({make_tail(a, +1), {0.0, 1.0}});
    } else {
      segments.push_back({f, {a, b}});
    }
  }

  struct Work {
    detail::Panel panel;
    size_t seg;
    bool operator<(const Work& o) const { return panel.err < o.panel.err; }
  };
  std::priority_queue<Work> work;
  cplx total = 0.0;
  double toterr = 0.0;
  for (size_t s = 0; s < segments.size(); ++s) {
    auto p = detail::gk15(segments[s].first, segments[s].second.first, segments[s].second.second);
    evals += 15;
    total += p.value;
    toterr += p.err;
    work.push({p, s});
  }

  while (toterr > tol && !work.empty()) {
    if (evals >= max_evaluations)
      throw std::runtime_error("integrate_1d: tolerance not met within evaluation budget");
    Work w = work.top();
    work.pop();
    const double mid = 0.5 * (w.panel.a + w.panel.b);
    if (mid == w.panel.a || mid == w.panel.b) continue;  // panel exhausted
    auto left = detail::gk15(segments[w.seg].first, w.panel.a, mid);
    auto right = detail::gk15(segments[w.seg].first, mid, w.panel.b);
    evals += 30;
    total += left.value + right.value - w.panel.value;
    toterr += left.err + right.err - w.panel.err;
    work.push({left, w.seg});
    work.push({right, w.seg});
  }
  return QuadratureResult{total, toterr, evals};
}

// ---------------------------------------------------------------------------
// Hermitian utilities.
// ---------------------------------------------------------------------------

inline void require_hermitian(const Mat& m, double tol = 1e-12) {
  const double scale = std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() > tol * scale)
    throw std::invalid_argument("matrix is not Hermitian within tolerance");
}

struct EigH {
  Eigen::VectorXd values;  // ascending
  Mat vectors;             // columns
};

inline EigH eig_hermitian(const Mat& m) {
  require_hermitian(m);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eig_hermitian: solver failed");
  return EigH{es.eigenvalues(), es.eigenvectors()};
}

// Matrix logarithm with eigenvalues clamped below at `floor`, so that
// rank-deficient density operators stay finite inside entropy terms.
inline Mat matrix_log_regularized(const Mat& m, double floor_ = 1e-12) {
  EigH e = eig_hermitian(m);
  Eigen::VectorXd lg(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    lg[i] = std::log(std::max(e.values[i], floor_));
  return e.vectors * lg.asDiagonal() * e.vectors.adjoint();
}

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace qkd
