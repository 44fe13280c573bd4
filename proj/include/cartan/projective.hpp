#ifndef CARTAN_PROJECTIVE_HPP
#define CARTAN_PROJECTIVE_HPP

// Projective relatedness of two Cartan metrics through the projective
// change N~_k = N_k + B_k + Q zeta_k, with
//   N_k = N_{jk} zeta^j,   B_k = h~_{jk} Theta~*^j - h_{jk} Theta*^j.
// Q is fitted per sample by least-squares collinearity of
// D_k := N~_k - N_k - B_k against zeta_k; its smoothness/homogeneity is
// then probed by finite differences along complex rays in zeta.

#include <tuple>
#include <functional>

#include "cartan/connection.hpp"
#include "cartan/randers.hpp"

namespace cartan {

struct QSample {
  EvalContext point;
  cd Q;
};

struct ProjectiveReport {
  double residual{0.0};             // max scaled |D_k - Q zeta_k|
  double homogeneity_residual{0.0}; // |Q(mu zeta) - mu Q| / (|Q|+eps), mu in {1/2, 2}
  double conj_homogeneity_residual{0.0};  // |Q(i zeta) - conj(i) Q| / (|Q|+eps)
  double B_decomposition_residual{0.0};   // Cor.-level split of the change
  double B_norm{0.0};               // max |B_k|
  std::vector<QSample> q_samples;
  bool verdict{false};
  double tolerance{1e-6};
  int samples_used{0};
};

namespace detail {

struct ChangeData {
  Vec Ntil, Nvec, B, D;
  cd Q;
  double scale;
};

inline ChangeData projective_change(const CartanMetric& m1,
                                    const CartanMetric& m2,
                                    const EvalContext& ctx) {
  TensorWorkspace w1(m1, ctx, TensorWorkspace::Level::Connection);
  TensorWorkspace w2(m2, ctx, TensorWorkspace::Level::Connection);
  const int n = m1.n();
  ChangeData d;
  d.Nvec = Vec::Zero(n);
  d.Ntil = Vec::Zero(n);
  d.B = Vec::Zero(n);
  const Vec th1 = w1.theta_star();
  const Vec th2 = w2.theta_star();
  const Mat A1 = w1.A();
  const Mat A2 = w2.A();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      d.Nvec[k] += w1.N()(j, k) * w1.zup()[j];
      d.Ntil[k] += w2.N()(j, k) * w2.zup()[j];
      d.B[k] += A2(j, k) * th2[j] - A1(j, k) * th1[j];
    }
  d.D = d.Ntil - d.Nvec - d.B;
  cd num(0, 0);
  double den = 0.0;
  for (int k = 0; k < n; ++k) {
    num += d.D[k] * std::conj(ctx.zeta[k]);
    den += std::norm(ctx.zeta[k]);
  }
  d.Q = num / den;
  d.scale = std::max({max_abs(d.Ntil), max_abs(d.Nvec), 1.0});
  return d;
}

}  // namespace detail

inline ProjectiveReport projective_residual(const CartanMetric& m1,
                                            const CartanMetric& m2,
                                            const std::vector<EvalContext>& samples,
                                            double tol = 1e-6) {
  ProjectiveReport rep;
  rep.tolerance = tol;
  rep.samples_used = static_cast<int>(samples.size());

  const double fd_step = 1e-4;
  for (const EvalContext& ctx : samples) {
    detail::ChangeData d = detail::projective_change(m1, m2, ctx);
    rep.q_samples.push_back({ctx, d.Q});
    rep.B_norm = std::max(rep.B_norm, max_abs(d.B));

    double r = 0.0;
    for (int k = 0; k < m1.n(); ++k)
      r = std::max(r, std::abs(d.D[k] - d.Q * ctx.zeta[k]));
    rep.residual = std::max(rep.residual, r / d.scale);

    // Q along the complex ray lambda |-> Q(z, lambda zeta)
    auto q_at = [&](cd lambda) {
      EvalContext scaled = ctx;
      for (auto& q : scaled.zeta) q *= lambda;
      return detail::projective_change(m1, m2, scaled).Q;
    };
    const double eps = std::abs(d.Q) + 1e-12;
    for (double mu : {0.5, 2.0}) {
      const cd qmu = q_at(cd(mu, 0.0));
      rep.homogeneity_residual =
          std::max(rep.homogeneity_residual, std::abs(qmu - mu * d.Q) / eps);
    }
    rep.conj_homogeneity_residual =
        std::max(rep.conj_homogeneity_residual,
                 std::abs(q_at(cd(0, 1)) - std::conj(cd(0, 1)) * d.Q) / eps);

    // Wirtinger derivatives of Q along the ray at lambda = 1:
    // dQ/dlambda = (dot-p^r Q) zeta_r, dQ/dlambda-bar = (dot-pb^r Q) zeta_rbar
    const cd qxp = q_at(cd(1 + fd_step, 0)), qxm = q_at(cd(1 - fd_step, 0));
    const cd qyp = q_at(cd(1, fd_step)), qym = q_at(cd(1, -fd_step));
    const cd dx = (qxp - qxm) / (2 * fd_step), dy = (qyp - qym) / (2 * fd_step);
    const cd q_hol = 0.5 * (dx - cd(0, 1) * dy);   // (dot-p^r Q) zeta_r
    const cd q_anti = 0.5 * (dx + cd(0, 1) * dy);  // (dot-pb^r Q) zeta_rbar

    double bres = 0.0;
    for (int k = 0; k < m1.n(); ++k) {
      bres = std::max(bres, std::abs(d.B[k] + q_hol * ctx.zeta[k]));
      bres = std::max(
          bres, std::abs(d.Ntil[k] - d.Nvec[k] - q_anti * ctx.zeta[k]));
    }
    rep.B_decomposition_residual =
        std::max(rep.B_decomposition_residual, bres / d.scale);
  }
  rep.verdict = rep.residual <= tol;
  return rep;
}

// Projective relatedness to the flat metric |zeta|^2 on a domain:
// N~_k = Q zeta_k with Q = -(1/H~)(d*H~/dz^i) zeta~^i and h~_{sk}Theta~*^s = 0.
inline std::pair<bool, double> euclidean_projective_test(
    const CartanMetric& m2, const std::vector<EvalContext>& samples,
    double tol = 1e-6) {
  double worst_q = 0.0;
  bool verdict = true;
  for (const EvalContext& ctx : samples) {
    TensorWorkspace w(m2, ctx, TensorWorkspace::Level::Connection);
    const int n = m2.n();
    const double H = w.H();
    cd Q(0, 0);
    for (int i = 0; i < n; ++i) Q += w.grad_z()[i] * w.zup()[i];
    Q = -Q / H;
    const Vec th = w.theta_star();
    const Mat A = w.A();
    double scale = 1.0;
    Vec Ntil = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) Ntil[k] += w.N()(j, k) * w.zup()[j];
      scale = std::max(scale, std::abs(Ntil[k]));
    }
    double rq = 0.0, rb = 0.0;
    for (int k = 0; k < n; ++k) {
      rq = std::max(rq, std::abs(Ntil[k] - Q * ctx.zeta[k]));
      cd acc(0, 0);
      for (int s = 0; s < n; ++s) acc += A(s, k) * th[s];
      rb = std::max(rb, std::abs(acc));
    }
    worst_q = std::max(worst_q, rq / scale);
    if (rq / scale > tol || rb / scale > tol) verdict = false;
  }
  return {verdict, worst_q};
}

// Purely Hermitian Randers family C~ = (1 + ||b||) alpha: projectively
// related to alpha iff N^a_i is collinear with zeta_i.  The fitted factor
// is P = N^a_i zeta^i / alpha^2; the associated projective factor between
// C~ and alpha is Q = (2 + ||b||) ||b|| P.
struct RandersProjectiveReport {
  bool verdict{false};
  double residual{0.0};         // max scaled |N^a_i - P zeta_i|
  cd P{}, Q{};                  // from the last sample
  double hermitian_residual{0.0};
};

// `enforce_gate = false` skips the purely-Hermitian rejection and runs the
// collinearity diagnostic on the Hermitian part alone (the conformal
// family (1 + ||b||) alpha); pointwise alignment of b with every zeta is
// impossible for n >= 2, so the gated path only admits n = 1 data.
inline RandersProjectiveReport randers_projective_test(
    const RandersGeometry& g, const std::vector<EvalContext>& samples,
    double tol = 1e-6, bool enforce_gate = true) {
  RandersProjectiveReport rep;
  for (const EvalContext& ctx : samples) {
    RandersPoint p = g.at(ctx);
    rep.hermitian_residual =
        std::max(rep.hermitian_residual, g.purely_hermitian_residual(p));
  }
  if (enforce_gate && rep.hermitian_residual > tol)
    throw NotPurelyHermitian(rep.hermitian_residual);

  bool verdict = true;
  for (const EvalContext& ctx : samples) {
    RandersPoint p = g.at(ctx);
    Mat Nt, Na;
    g.nonlinear_connection(p, ctx, Nt, Na);
    const int n = g.n();
    Vec Navec = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Navec[i] += Na(j, i) * p.zeta_up_a[j];
    cd P(0, 0);
    for (int i = 0; i < n; ++i) P += Navec[i] * p.zeta_up_a[i];
    P /= p.alpha2;
    const double nb = std::sqrt(p.b_norm2);
    rep.P = P;
    rep.Q = (2.0 + nb) * nb * P;
    double scale = std::max(1.0, max_abs(Navec));
    double r = 0.0;
    for (int i = 0; i < n; ++i)
      r = std::max(r, std::abs(Navec[i] - P * ctx.zeta[i]));
    rep.residual = std::max(rep.residual, r / scale);
    if (r / scale > tol) verdict = false;
  }
  rep.verdict = verdict;
  return rep;
}

// Locally projectively flat: h_{sk} Theta*^s = 0 and N_k = -Q zeta_k with
// Q = (1/H)(d*H/dz^i) zeta^i.
inline std::tuple<bool, double, double> flatness_test(
    const CartanMetric& m, const std::vector<EvalContext>& samples,
    double tol = 1e-6) {
  double r_theta = 0.0, r_q = 0.0;
  for (const EvalContext& ctx : samples) {
    TensorWorkspace w(m, ctx, TensorWorkspace::Level::Connection);
    const int n = m.n();
    const double H = w.H();
    cd Q(0, 0);
    for (int i = 0; i < n; ++i) Q += w.grad_z()[i] * w.zup()[i];
    Q /= H;
    const Vec th = w.theta_star();
    const Mat A = w.A();
    double scale = 1.0;
    Vec Nvec = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) Nvec[k] += w.N()(j, k) * w.zup()[j];
      scale = std::max(scale, std::abs(Nvec[k]));
    }
    for (int k = 0; k < n; ++k) {
      cd acc(0, 0);
      for (int s = 0; s < n; ++s) acc += A(s, k) * th[s];
      r_theta = std::max(r_theta, std::abs(acc) / scale);
      r_q = std::max(r_q, std::abs(Nvec[k] + Q * ctx.zeta[k]) / scale);
    }
  }
  return {r_theta <= tol && r_q <= tol, r_theta, r_q};
}

}  // namespace cartan

#endif
