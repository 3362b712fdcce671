#pragma once

// Asymptotic secure-key-rate engine: statistics simulation, the
// block-compressed G map with its key-register pinching Z, the divergence
// objective, per-announcement-block error-correction leakage, and two
// evaluation modes: direct evaluation at the simulated state (full
// tomography) and Frank-Wolfe minimization over all states compatible
// with the observed statistics, with a certified dual lower bound from a
// dense primal-dual interior-point subsolver.

#include <qkd/protocols.hpp>

namespace qkd {

// ---------------------------------------------------------------------------
// Statistics.
// ---------------------------------------------------------------------------

struct Constraint {
  Mat observable;  // Hermitian on the AB space
  double value = 0.0;
};

struct BlockStat {
  int atil = 0, btil = 0;
  double p = 0.0;     // probability of landing in this accepted block
  double qber = 0.0;  // conditional bit-error rate within it
};

struct Statistics {
  int dim_a = 0, dim_b = 0;
  Mat rho_ab;
  std::vector<Constraint> constraints;  // joint table + A-marginal + trace (last)
  std::vector<BlockStat> blocks;
  double p_concl = 0.0;
  double qber = 0.0;  // aggregate, for reporting
};

using KrausEnsemble = std::vector<std::pair<double, std::vector<Mat>>>;

// rho_AB = (id_A (x) channel) |psi><psi| for a (possibly mixed) Kraus set
// acting on Bob's space.
inline Mat propagate_source(const ProtocolSpec& spec, const KrausEnsemble& sets) {
  auto pur = purify_source(spec);
  const int d = spec.dim_a * spec.dim_b;
  Mat rho = Mat::Zero(d, d);
  for (const auto& [w, ks] : sets)
    for (const auto& k : ks) {
      if (k.rows() != spec.dim_b) throw std::invalid_argument("propagate_source: dim mismatch");
      Vec out = Vec::Zero(d);
      for (int i = 0; i < spec.dim_a; ++i)
        out.segment(i * spec.dim_b, spec.dim_b) =
            k * pur.psi_aa.segment(i * spec.dim_b, spec.dim_b);
      rho += w * (out * out.adjoint());
    }
  return rho;
}

namespace detail {

inline Mat alice_projector(const ProtocolSpec& spec, const AliceGroup& g) {
  Mat p = Mat::Zero(spec.dim_a, spec.dim_a);
  for (int i : g.indices) p(i, i) = 1.0;
  return p;
}

inline Mat kron_ab(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

}  // namespace detail

inline Statistics simulate_statistics(const ProtocolSpec& spec, const KrausEnsemble& sets) {
  Statistics st;
  st.dim_a = spec.dim_a;
  st.dim_b = spec.dim_b;
  st.rho_ab = propagate_source(spec, sets);

  // Joint outcome probabilities over every (Alice group, POVM element).
  for (const auto& g : spec.alice) {
    const Mat pa = detail::alice_projector(spec, g);
    for (const auto& p : spec.povm) {
      Constraint c;
      c.observable = detail::kron_ab(pa, p.op);
      c.value = (c.observable * st.rho_ab).trace().real();
      st.constraints.push_back(std::move(c));
    }
  }
  // Alice-marginal constraints over a Hermitian operator basis, then trace.
  const Mat ib = Mat::Identity(spec.dim_b, spec.dim_b);
  for (int i = 0; i < spec.dim_a; ++i)
    for (int j = i; j < spec.dim_a; ++j) {
      Mat e = Mat::Zero(spec.dim_a, spec.dim_a);
      if (i == j)
        e(i, i) = 1.0;
      else
        e(i, j) = e(j, i) = 0.5;
      Constraint c;
      c.observable = detail::kron_ab(e, ib);
      c.value = (c.observable * st.rho_ab).trace().real();
      st.constraints.push_back(std::move(c));
      if (i != j) {
        e.setZero();
        e(i, j) = cplx(0.0, -0.5);
        e(j, i) = cplx(0.0, 0.5);
        Constraint ci;
        ci.observable = detail::kron_ab(e, ib);
        ci.value = (ci.observable * st.rho_ab).trace().real();
        st.constraints.push_back(std::move(ci));
      }
    }
  Constraint tr;
  tr.observable = Mat::Identity(spec.dim_a * spec.dim_b, spec.dim_a * spec.dim_b);
  tr.value = 1.0;
  st.constraints.push_back(std::move(tr));

  // Accepted-block probabilities and conditional error rates.
  double p_err_tot = 0.0;
  std::map<std::pair<int, int>, std::pair<double, double>> acc;  // (p, p_err)
  for (const auto& g : spec.alice) {
    const Mat pa = detail::alice_projector(spec, g);
    for (const auto& p : spec.povm) {
      auto it = spec.keymap.find({g.announcement, p.announcement, p.secret});
      if (it == spec.keymap.end()) continue;
      const double pr = (detail::kron_ab(pa, p.op) * st.rho_ab).trace().real();
      auto& slot = acc[{g.announcement, p.announcement}];
      slot.first += pr;
      if (it->second != g.secret) slot.second += pr;
    }
  }
  for (const auto& [key, pp] : acc) {
    BlockStat b;
    b.atil = key.first;
    b.btil = key.second;
    b.p = pp.first;
    b.qber = pp.first > 1e-15 ? pp.second / pp.first : 0.0;
    st.blocks.push_back(b);
    st.p_concl += pp.first;
    p_err_tot += pp.second;
  }
  st.qber = st.p_concl > 1e-15 ? p_err_tot / st.p_concl : 0.0;
  return st;
}

// ---------------------------------------------------------------------------
// G and Z maps in block-compressed form. Each accepted announcement pair
// (atil, btil) contributes one block V_b with G(rho) = (+)_b V_b rho V_b^dag
// and the pinching Z acting as the r = 0/1 half split of every block.
// ---------------------------------------------------------------------------

struct GBlock {
  int atil = 0, btil = 0;
  Mat V;  // (2 * slots * entries * dB) x (dA * dB)
};

struct GZMaps {
  std::vector<GBlock> blocks;
  std::vector<Mat> kraus_a;  // announcement projectors on A (sum to I_A)
  std::vector<Mat> kraus_b;  // sqrt-POVM elements on B (squares sum to I_B)
};

inline Mat psd_sqrt(const Mat& m) {
  EigH e = eig_hermitian(Mat(0.5 * (m + m.adjoint())));
  Eigen::VectorXd w = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * w.asDiagonal().toDenseMatrix().cast<cplx>() * e.vectors.adjoint();
}

inline GZMaps build_gz(const ProtocolSpec& spec) {
  GZMaps gz;
  const int dA = spec.dim_a, dB = spec.dim_b;
  for (const auto& g : spec.alice) gz.kraus_a.push_back(detail::alice_projector(spec, g));
  std::vector<Mat> sq;
  for (const auto& p : spec.povm) {
    sq.push_back(psd_sqrt(p.op));
    gz.kraus_b.push_back(sq.back());
  }
  for (const auto& [key, r] : spec.keymap) {
    bool found = false;
    for (const auto& p : spec.povm)
      found |= (p.announcement == std::get<1>(key) && p.secret == std::get<2>(key));
    if (!found) throw std::invalid_argument("build_gz: key map references absent announcement");
  }

  std::vector<int> atils, btils;
  for (const auto& g : spec.alice)
    if (std::find(atils.begin(), atils.end(), g.announcement) == atils.end())
      atils.push_back(g.announcement);
  for (const auto& p : spec.povm)
    if (std::find(btils.begin(), btils.end(), p.announcement) == btils.end())
      btils.push_back(p.announcement);
  std::sort(atils.begin(), atils.end());
  std::sort(btils.begin(), btils.end());

  for (int at : atils) {
    std::vector<std::pair<int, int>> slots;  // (secret, A index)
    for (const auto& g : spec.alice)
      if (g.announcement == at)
        for (int i : g.indices) slots.emplace_back(g.secret, i);
    for (int bt : btils) {
      std::vector<std::pair<int, const Mat*>> entries;  // (r, sqrt povm)
      for (size_t k = 0; k < spec.povm.size(); ++k) {
        const auto& p = spec.povm[k];
        if (p.announcement != bt) continue;
        auto it = spec.keymap.find({at, bt, p.secret});
        if (it == spec.keymap.end()) continue;
        entries.emplace_back(it->second, &sq[k]);
      }
      if (entries.empty()) continue;
      const int ns = int(slots.size()), ne = int(entries.size());
      GBlock blk;
      blk.atil = at;
      blk.btil = bt;
      blk.V = Mat::Zero(2 * ns * ne * dB, dA * dB);
      for (int y = 0; y < ne; ++y) {
        const int r = entries[y].first;
        for (int x = 0; x < ns; ++x) {
          const int off = ((r * ns + x) * ne + y) * dB;
          blk.V.block(off, slots[x].second * dB, dB, dB) = *entries[y].second;
        }
      }
      gz.blocks.push_back(std::move(blk));
    }
  }
  return gz;
}

// tr sigma log2 sigma over the positive part of the spectrum.
inline double entropy_trace(const Mat& sigma) {
  EigH e = eig_hermitian(Mat(0.5 * (sigma + sigma.adjoint())));
  double s = 0.0;
  for (int i = 0; i < e.values.size(); ++i)
    if (e.values[i] > 1e-15) s += e.values[i] * std::log2(e.values[i]);
  return s;
}

// D(G(rho) || Z(G(rho))) in bits, with the standard perturbation toward
// the maximally mixed state to keep the logs finite.
inline double objective(const Mat& rho_ab, const GZMaps& gz, double pert = 1e-10) {
  const int d = int(rho_ab.rows());
  Mat rho = (1.0 - pert) * rho_ab + pert / d * Mat::Identity(d, d);
  double f = 0.0;
  for (const auto& blk : gz.blocks) {
    Mat sig = blk.V * rho * blk.V.adjoint();
    const int h = int(sig.rows()) / 2;
    f += entropy_trace(sig) - entropy_trace(sig.topLeftCorner(h, h)) -
         entropy_trace(sig.bottomRightCorner(h, h));
  }
  return f;
}

// Gradient of the objective (used by Frank-Wolfe).
inline std::pair<double, Mat> objective_with_grad(const Mat& rho_ab, const GZMaps& gz,
                                                  double pert = 1e-10) {
  const int d = int(rho_ab.rows());
  Mat rho = (1.0 - pert) * rho_ab + pert / d * Mat::Identity(d, d);
  double f = 0.0;
  Mat grad = Mat::Zero(d, d);
  const double ln2 = std::log(2.0);
  for (const auto& blk : gz.blocks) {
    Mat sig = blk.V * rho * blk.V.adjoint();
    const int h = int(sig.rows()) / 2;
    Mat L = matrix_log_regularized(Mat(0.5 * (sig + sig.adjoint())), 1e-14) / ln2;
    Mat LZ = Mat::Zero(sig.rows(), sig.cols());
    LZ.topLeftCorner(h, h) =
        matrix_log_regularized(Mat(0.5 * (sig.topLeftCorner(h, h) +
                                          sig.topLeftCorner(h, h).adjoint())), 1e-14) / ln2;
    LZ.bottomRightCorner(h, h) =
        matrix_log_regularized(Mat(0.5 * (sig.bottomRightCorner(h, h) +
                                          sig.bottomRightCorner(h, h).adjoint())), 1e-14) / ln2;
    f += ((sig * (L - LZ)).trace()).real();
    grad += blk.V.adjoint() * (L - LZ) * blk.V;
  }
  return {f, Mat(0.5 * (grad + grad.adjoint()))};
}

// Error-correction leakage at the Shannon limit, summed per accepted
// announcement block: sum_b p_b h2(qber_b).
inline double leak_ec(const Statistics& st) {
  double leak = 0.0;
  for (const auto& b : st.blocks) leak += b.p * binary_entropy(b.qber);
  return leak;
}

// ---------------------------------------------------------------------------
// Dense primal-dual interior-point solver for min <C,X> s.t. <A_i,X> = b_i,
// X >= 0, with a certified dual bound (the trace constraint must be last).
// ---------------------------------------------------------------------------

struct SdpResult {
  Mat X;
  Eigen::VectorXd y;
  double certified_bound = 0.0;
};

inline SdpResult sdp_solve(const Mat& C, const std::vector<Constraint>& cons, double tol = 1e-9,
                           int iters = 80) {
  const int n = int(C.rows());
  const int m = int(cons.size());
  Mat X = Mat::Identity(n, n) / n;
  Mat S = Mat::Identity(n, n) * std::max(1.0, C.norm());
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) b[i] = cons[i].value;

  auto Aop = [&](const Mat& M) {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = (cons[i].observable * M).trace().real();
    return v;
  };
  auto Aadj = [&](const Eigen::VectorXd& w) {
    Mat M = Mat::Zero(n, n);
    for (int i = 0; i < m; ++i) M += w[i] * cons[i].observable;
    return M;
  };

  for (int it = 0; it < iters; ++it) {
    const double mu = (X * S).trace().real() / n;
    Eigen::VectorXd rp = b - Aop(X);
    Mat Rd = C - S - Aadj(y);
    if (mu < tol && rp.norm() < tol && Rd.norm() < tol) break;
    const double sigma = 0.3;
    Mat Sinv = S.inverse();
    // Schur complement M(i,j) = Re tr(A_i X A_j Sinv); assembled from the
    // flattened stacks of A_i X and (A_j Sinv)^T.
    Eigen::MatrixXcd AX(m, n * n), AS(m, n * n);
    for (int i = 0; i < m; ++i) {
      Mat ax = cons[i].observable * X;
      Mat as = (cons[i].observable * Sinv).transpose();
      AX.row(i) = Eigen::Map<Eigen::VectorXcd>(ax.data(), n * n).transpose();
      AS.row(i) = Eigen::Map<Eigen::VectorXcd>(as.data(), n * n).transpose();
    }
    Eigen::MatrixXd M = (AX * AS.transpose()).real();
    M = 0.5 * (M + M.transpose()).eval();
    Mat XRS = X * Rd * Sinv;
    XRS = 0.5 * (XRS + XRS.adjoint()).eval();
    Eigen::VectorXd rhs = rp - Aop(sigma * mu * Sinv - X) + Aop(XRS);
    M.diagonal().array() += 1e-12;
    Eigen::VectorXd dy = M.ldlt().solve(rhs);
    Mat dS = Rd - Aadj(dy);
    Mat dX = sigma * mu * Sinv - X - X * dS * Sinv;
    dX = 0.5 * (dX + dX.adjoint()).eval();

    auto maxstep = [&](const Mat& P, const Mat& dP) {
      EigH e = eig_hermitian(Mat(0.5 * (P + P.adjoint())));
      const double floor = 1e-14 * std::max(1.0, e.values.maxCoeff());
      Eigen::VectorXd w = e.values.cwiseMax(floor).cwiseSqrt().cwiseInverse();
      Mat Pi = e.vectors * w.asDiagonal().toDenseMatrix().cast<cplx>() * e.vectors.adjoint();
      Mat W = Pi * dP * Pi.adjoint();
      const double lam = eig_hermitian(Mat(0.5 * (W + W.adjoint()))).values.minCoeff();
      return lam >= 0.0 ? 1.0 : std::min(1.0, -0.98 / lam);
    };
    const double ap = maxstep(X, dX), ad = maxstep(S, dS);
    X = 0.5 * ((X + ap * dX) + (X + ap * dX).adjoint()).eval();
    S = 0.5 * ((S + ad * dS) + (S + ad * dS).adjoint()).eval();
    y += ad * dy;
  }
  // Certify: shift the trace-constraint multiplier until C - A*(y) >= 0,
  // making b . y a valid lower bound on the primal optimum.
  Mat Sd = C - Aadj(y);
  const double lam = eig_hermitian(Mat(0.5 * (Sd + Sd.adjoint()))).values.minCoeff();
  Eigen::VectorXd yc = y;
  if (lam < 0.0) yc[m - 1] += lam;
  SdpResult r;
  r.X = X;
  r.y = y;
  r.certified_bound = b.dot(yc);
  return r;
}

// ---------------------------------------------------------------------------
// Key rate.
// ---------------------------------------------------------------------------

enum class KeyRateMode { full_tomography, frank_wolfe };

struct KeyRateOptions {
  int fw_max_iters = 300;
  double fw_gap_tol = 1e-6;
  double rate_floor = 1e-7;  // below this the rate is reported as 0, flagged
};

struct KeyRateResult {
  KeyRateMode mode = KeyRateMode::full_tomography;
  double rate = 0.0;         // max(0, lower_bound), floored
  double lower_bound = 0.0;  // certified objective-minus-leak bound
  double primal = 0.0;       // objective at the best primal iterate minus leak
  double gap = 0.0;
  double p_concl = 0.0;
  double qber = 0.0;
  double leak = 0.0;
  bool floored = false;      // true when a tiny positive rate was zeroed
  bool converged = true;     // false when Frank-Wolfe stopped above its gap tolerance
};

inline KeyRateResult key_rate(const ProtocolSpec& spec, const Statistics& st, KeyRateMode mode,
                              const KeyRateOptions& opts = {}) {
  GZMaps gz = build_gz(spec);
  KeyRateResult res;
  res.mode = mode;
  res.p_concl = st.p_concl;
  res.qber = st.qber;
  res.leak = leak_ec(st);

  double f = 0.0, lower = 0.0, gap = 0.0;
  if (mode == KeyRateMode::full_tomography) {
    f = objective(st.rho_ab, gz);
    lower = f;
  } else {
    Mat rho = 0.5 * (st.rho_ab + st.rho_ab.adjoint());
    double best_lower = -std::numeric_limits<double>::infinity();
    res.converged = false;
    for (int it = 0; it < opts.fw_max_iters; ++it) {
      auto [fv, grad] = objective_with_grad(rho, gz);
      f = fv;
      SdpResult sub = sdp_solve(grad, st.constraints);
      gap = std::max(0.0, (grad * rho).trace().real() - sub.certified_bound);
      best_lower = std::max(best_lower, f - gap);
      if (gap < opts.fw_gap_tol) {
        res.converged = true;
        break;
      }
      // Exact line search toward the linear minimizer.
      Mat dir = sub.X - rho;
      double lo = 0.0, hi = 1.0;
      for (int k = 0; k < 40; ++k) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (objective(Mat(rho + m1 * dir), gz) < objective(Mat(rho + m2 * dir), gz))
          hi = m2;
        else
          lo = m1;
      }
      const double t = 0.5 * (lo + hi);
      if (t < 1e-12) break;
      rho = 0.5 * ((rho + t * dir) + (rho + t * dir).adjoint()).eval();
    }
    // The primal value is itself an upper bound on the optimum, so a
    // certified bound above it only reflects subproblem round-off.
    lower = std::min(best_lower, f);
  }
  res.primal = f - res.leak;
  res.lower_bound = lower - res.leak;
  res.gap = gap;
  double rate = std::max(0.0, res.lower_bound);
  if (rate > 0.0 && rate < opts.rate_floor) {
    rate = 0.0;
    res.floored = true;
  }
  res.rate = rate;
  return res;
}

// ---------------------------------------------------------------------------
// Channel interpretation: turn a ChannelSpec into Kraus ensembles on the
// protocol's Bob space.
// ---------------------------------------------------------------------------

inline KrausEnsemble channel_kraus(const ProtocolSpec& spec, const ChannelSpec& chan,
                                   const EncodingParams* enc = nullptr) {
  const int ds = spec.dim_b - 1;
  const double pN = std::pow(chan.loss.p, spec.photons);

  if (std::holds_alternative<MixedChannel>(chan.kind)) {
    const auto& mix = std::get<MixedChannel>(chan.kind);
    validate(mix);
    if (chan.loss.mode != LossSpec::Mode::uniform)
      throw std::invalid_argument("channel_kraus: mixtures compose with uniform loss only");
    KrausEnsemble out;
    for (size_t i = 0; i < mix.components.size(); ++i) {
      ChannelSpec part = mix.components[i];
      if (part.loss.mode == LossSpec::Mode::uniform) part.loss.p *= chan.loss.p;
      for (auto& [w, ks] : channel_kraus(spec, part, enc))
        out.emplace_back(mix.weights[i] * w, std::move(ks));
    }
    return out;
  }

  if (std::holds_alternative<std::monostate>(chan.kind)) {
    if (chan.loss.mode == LossSpec::Mode::frequency_dependent) {
      if (spec.dim_b != 3)
        throw std::invalid_argument("channel_kraus: frequency-dependent loss needs dim_b = 3");
      Mat a = Mat::Zero(2, 2);
      a(0, 0) = std::pow(chan.loss.survival_freq(), 0.5 * spec.photons);
      a(1, 1) = std::pow(chan.loss.survival_time(), 0.5 * spec.photons);
      return {{1.0, contraction_kraus(a)}};
    }
    return {{1.0, contraction_kraus(Mat(std::sqrt(pN) * Mat::Identity(ds, ds)))}};
  }

  if (std::holds_alternative<QubitUnitary>(chan.kind)) {
    const auto& u = std::get<QubitUnitary>(chan.kind);
    if (ds != (1 << spec.photons))
      throw std::invalid_argument("channel_kraus: collective unitary needs a 2^N signal space");
    return {{1.0, contraction_kraus(Mat(std::sqrt(pN) * kron_pow(u.matrix(), spec.photons)))}};
  }

  if (std::holds_alternative<LogicalAmpDamp>(chan.kind)) {
    if (spec.dim_b != 3)
      throw std::invalid_argument("channel_kraus: logical damping needs dim_b = 3");
    auto [e0, e1] = amp_damp_kraus(std::get<LogicalAmpDamp>(chan.kind));
    std::vector<Mat> ks;
    for (const auto& l : contraction_kraus(Mat(std::sqrt(pN) * Mat::Identity(2, 2)))) {
      ks.push_back(l * e0);
      ks.push_back(l * e1);
    }
    return {{1.0, ks}};
  }

  // Continuous-channel kinds need the ququart pipeline.
  if (!enc) throw std::invalid_argument("channel_kraus: encoding required for this channel");
  if (spec.dim_b != kTwoPhotonDim)
    throw std::invalid_argument("channel_kraus: two-photon channel needs the ququart space");
  auto ov = overlap_set(*enc);
  auto basis = build_basis(ov);
  QuquartChannel f1, f2;
  if (std::holds_alternative<FbsChannel>(chan.kind)) {
    const auto& fbs = std::get<FbsChannel>(chan.kind);
    validate(fbs);
    f1 = channel_matrix(basis, transformed_frame_gram(fbs_overlaps(*enc, fbs.pairs_first())));
    f2 = channel_matrix(basis, transformed_frame_gram(fbs_overlaps(*enc, fbs.pairs_second())));
  } else {
    const auto& disp = std::get<DispersionChannel>(chan.kind);
    f1 = f2 = channel_matrix(basis, transformed_frame_gram(dispersion_overlaps(*enc, disp)));
  }
  std::vector<Mat> ks = two_photon_kraus(f1, f2);
  if (pN < 1.0) {
    std::vector<Mat> lossy;
    for (const auto& l : contraction_kraus(Mat(std::sqrt(pN) * Mat::Identity(16, 16))))
      for (const auto& k : ks) lossy.push_back(l * k);
    ks = std::move(lossy);
  }
  return {{1.0, ks}};
}

inline KeyRateResult key_rate(const ProtocolSpec& spec, const ChannelSpec& chan, KeyRateMode mode,
                              const EncodingParams* enc = nullptr,
                              const KeyRateOptions& opts = {}) {
  return key_rate(spec, simulate_statistics(spec, channel_kraus(spec, chan, enc)), mode, opts);
}

}  // namespace qkd
