#pragma once

// The four-dimensional single-photon picture: an orthonormal basis built
// over the non-orthogonal frame {|0_f>, |1_f>, |0_t>, |1_t>}, the 4x4
// effective channel matrix assembled from transformed 1D overlaps, the
// two-photon (ququart x ququart + inconclusive) state space, and the
// embedding of the logical Bell-type qubit into it.

#include <qkd/channels.hpp>

namespace qkd {

using Matrix4cd = Eigen::Matrix4cd;

// Frame Gram matrix in the order 0f, 1f, 0t, 1t.
inline Matrix4cd frame_gram(const OverlapSet& ov) {
  Matrix4cd g = Matrix4cd::Identity();
  g(0, 1) = ov.beta_f;
  g(1, 0) = std::conj(ov.beta_f);
  g(2, 3) = ov.beta_t;
  g(3, 2) = std::conj(ov.beta_t);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      g(i, 2 + j) = ov.alpha(i, j);
      g(2 + j, i) = std::conj(ov.alpha(i, j));
    }
  return g;
}

// Row i of C holds the frame coefficients of the orthonormal state |i>;
// inner products are <i|j> = conj(C.row(i)) G C.row(j)^T.
struct QuquartBasis {
  Matrix4cd G;
  Matrix4cd C;
};

// |0>,|1> are the symmetric/antisymmetric frequency combinations; |2>,|3>
// come from Gram-Schmidt on |0_t>, |1_t> (identical to the closed forms,
// whose normalizations appear as the GS residual norms).
inline QuquartBasis build_basis(const OverlapSet& ov) {
  QuquartBasis b;
  b.G = frame_gram(ov);
  const double bf = ov.beta_f.real();
  if (1.0 - bf * bf < 1e-10)
    throw std::invalid_argument("build_basis: degenerate frequency bins (|beta_f| ~ 1)");
  b.C.setZero();
  b.C.row(0) << 1, 1, 0, 0;
  b.C.row(0) /= std::sqrt(2.0 * (1.0 + bf));
  b.C.row(1) << 1, -1, 0, 0;
  b.C.row(1) /= std::sqrt(2.0 * (1.0 - bf));
  for (int k = 2; k < 4; ++k) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Unit(k);
    for (int i = 0; i < k; ++i) {
      const cplx ip = b.C.row(i).conjugate() * b.G * v;  // <i | raw>
      v -= ip * b.C.row(i).transpose();
    }
    const double n2 = (v.adjoint() * b.G * v)(0).real();
    if (n2 < 1e-10)
      throw std::invalid_argument("build_basis: vanishing normalization (frames degenerate)");
    b.C.row(k) = v.transpose() / std::sqrt(n2);
  }
  return b;
}

inline QuquartBasis build_basis(const EncodingParams& e) { return build_basis(overlap_set(e)); }

// Column k: coordinates of frame state k in the orthonormal basis.
inline Matrix4cd frame_coords(const QuquartBasis& b) {
  return b.C.conjugate() * b.G;  // (i,k) = conj(C.row(i)) G e_k = <i|frame_k>
}

// 4x4 transformed frame Gram T(l,k) = <frame_l | chan(frame_k)> from the
// per-type overlap blocks.
inline Matrix4cd transformed_frame_gram(const TransformedOverlapSet& tov) {
  Matrix4cd t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      t(i, j) = tov.kappa(i, j);
      t(i, 2 + j) = tov.gamma(i, j);
      t(2 + i, j) = tov.delta(i, j);
      t(2 + i, 2 + j) = tov.lambda(i, j);
    }
  return t;
}

struct QuquartChannel {
  // Coordinate map: F(j,i) = <j|chan(i)>, so basis coordinates transform
  // as x -> F x and the two-photon signal block as (F (x) F) rho (.)^dag.
  Matrix4cd F;
};

inline QuquartChannel channel_matrix(const QuquartBasis& b, const Matrix4cd& T) {
  QuquartChannel ch;
  // F(j,i) = conj(C.row(j)) T C.row(i)^T
  ch.F = b.C.conjugate() * T * b.C.transpose();
  // The compression of a physical (contractive) channel must itself be a
  // contraction; violation signals an inconsistent overlap set.
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(Matrix4cd::Identity() -
                                              ch.F.adjoint() * ch.F);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("channel_matrix: transformed overlaps violate contraction");
  return ch;
}

inline QuquartChannel channel_matrix(const OverlapSet& /*ov*/, const TransformedOverlapSet& tov,
                                     const QuquartBasis& b) {
  return channel_matrix(b, transformed_frame_gram(tov));
}

// ---------------------------------------------------------------------------
// Two-photon states: 17 = 4*4 signal dimensions + 1 inconclusive.
// ---------------------------------------------------------------------------

inline constexpr int kTwoPhotonDim = 17;

inline Vec embed_two_photon(const Vec& v16) {
  if (v16.size() != 16) throw std::invalid_argument("embed_two_photon: need a 16-dim vector");
  Vec w = Vec::Zero(kTwoPhotonDim);
  w.head(16) = v16;
  return w;
}

// Kraus set of the two-photon channel: signal block F_M (x) F_N completed
// with leakage into the inconclusive dimension.
inline std::vector<Mat> two_photon_kraus(const QuquartChannel& chanM,
                                         const QuquartChannel& chanN) {
  Mat ff(16, 16);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) ff.block(r * 4, c * 4, 4, 4) = chanM.F(r, c) * chanN.F;
  return contraction_kraus(ff);
}

inline Mat two_photon_apply(const Mat& rho, const QuquartChannel& chanM,
                            const QuquartChannel& chanN) {
  if (rho.rows() != kTwoPhotonDim || rho.cols() != kTwoPhotonDim)
    throw std::invalid_argument("two_photon_apply: dimension mismatch");
  return apply_kraus(rho, two_photon_kraus(chanM, chanN));
}

// ---------------------------------------------------------------------------
// Logical embedding.
// ---------------------------------------------------------------------------

struct LogicalEmbedding {
  Vec ket0L, ket1L, ketPlusL, ketMinusL;  // 17-dim two-photon vectors
  cplx a;                                 // <Psi-_f|Psi-_t>
};

inline LogicalEmbedding embed_logical(const EncodingParams& e, const QuquartBasis& b) {
  const Matrix4cd V = frame_coords(b);
  const double Af = normalization_A(e.omega0, e.omega1, e.sigma_w, e.shape);
  const double At = normalization_A(e.tau0, e.tau1, e.sigma_t, e.shape);
  auto kron2 = [](const Eigen::Vector4cd& x, const Eigen::Vector4cd& y) {
    Vec out(16);
    for (int i = 0; i < 4; ++i) out.segment(i * 4, 4) = x(i) * y;
    return out;
  };
  const Vec psif = Af * (kron2(V.col(0), V.col(1)) - kron2(V.col(1), V.col(0)));
  const Vec psit = At * (kron2(V.col(2), V.col(3)) - kron2(V.col(3), V.col(2)));
  const cplx a = psif.dot(psit);  // Eigen dot conjugates the left argument
  if (std::abs(a) >= 1.0 - 1e-12)
    throw std::invalid_argument("embed_logical: logical states degenerate (|a| ~ 1)");
  LogicalEmbedding le;
  le.a = a;
  le.ket0L = embed_two_photon(psif);
  le.ket1L = embed_two_photon(Vec((psit - a * psif) / std::sqrt(1.0 - std::norm(a))));
  le.ketPlusL = (le.ket0L + le.ket1L) / std::sqrt(2.0);
  le.ketMinusL = (le.ket0L - le.ket1L) / std::sqrt(2.0);
  return le;
}

}  // namespace qkd
