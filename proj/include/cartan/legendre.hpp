#ifndef CARTAN_LEGENDRE_HPP
#define CARTAN_LEGENDRE_HPP

// Complex Legendre transformation between a Finsler metric L(z, eta) and a
// Cartan metric H(z, zeta):
//
//   forward:  zeta_k = dL/d eta^k          inverse:  eta^k = dH/d zeta_k
//
// The duality is governed by the 2n x 2n Wirtinger Hessians
//   G  = [[ g_{kj},  g_{k rbar} ], [ conj, conj ]]   at (z, eta)
//   H1 = [[ h^{ks},  h^{pbar k} ], [ ., . ]]         at (z, zeta)
//   H2 = [[ h_{kj},  h_{k rbar} ], [ ., . ]]         with h_{kj} = A_{kj}
// and holds iff G H1 = H1 G = I; H2 is the candidate inverse built from
// the nonholonomic-frame conditions A_{kr} h^{jr} = 0,
// A_{kr} = -h_{r jbar} h_{k mbar} h^{jbar mbar}.
//
// Finsler-side conventions: GL(i,j) = g_{i jbar} = d^2 L / dp_i dpb_j
// (unbarred row), SF(i,j) = g_{ij} = d^2 L / dp_i dp_j, and the fibre
// symbols p[k] stand for eta^k.

#include <limits>

#include "cartan/connection.hpp"

namespace cartan {

class FinslerMetric {
 public:
  static FinslerMetric compile(Expr L, int n) {
    return FinslerMetric(std::make_shared<MetricTables>(std::move(L), n));
  }
  static FinslerMetric compile(const std::string& text, int n) {
    return compile(parse(text, n), n);
  }

  int n() const { return tables_->n(); }
  const Expr& lagrangian() const { return tables_->function(); }
  const MetricTables& tables() const { return *tables_; }

  double value(const EvalContext& ctx) const {
    std::vector<cd> v;
    tables_->eval_tier1(ctx, v);
    return CartanMetric::check_real(v[tables_->s_value()]);
  }

 private:
  explicit FinslerMetric(std::shared_ptr<const MetricTables> t)
      : tables_(std::move(t)) {}
  std::shared_ptr<const MetricTables> tables_;
};

inline FinslerMetric validate_finsler(const Expr& L, int n,
                                      const std::vector<EvalContext>& samples,
                                      const ValidationOptions& opt = {}) {
  if (samples.empty()) throw Error("validate_finsler: no samples supplied");
  FinslerMetric f = FinslerMetric::compile(L, n);
  for (std::size_t s = 0; s < samples.size(); ++s)
    validate_at_sample(f.tables(), samples[s], static_cast<int>(s), opt);
  return f;
}

// ---------------------------------------------------------------------------
// Finsler-side tensor workspace (mirror of TensorWorkspace, Chern-Finsler
// conventions: N^i_k = g^{mbar i} (d g_{l mbar}/dz^k) eta^l and the adapted
// frame delta_k = d/dz^k - N^i_k d/d eta^i).

class FinslerWorkspace {
 public:
  FinslerWorkspace(const FinslerMetric& f, const EvalContext& ctx)
      : n_(f.n()), ctx_(ctx) {
    const MetricTables& t = f.tables();
    t.eval_tier2(ctx, v_);
    GL_ = Mat(n_, n_);
    SF_ = Mat(n_, n_);
    gz_ = Vec(n_);
    grad_ = Vec(n_);
    for (int i = 0; i < n_; ++i) {
      gz_[i] = v_[t.s_d1(sym_z(i))];
      grad_[i] = v_[t.s_d1(sym_p(i))];
      for (int j = 0; j < n_; ++j) {
        GL_(i, j) = v_[t.s_mixed(i, j)];
        SF_(i, j) = v_[t.s_sym2(i, j)];
      }
    }
    GUP_ = guarded_inverse(GL_);
    GLz_.resize(n_);
    GLp_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      GLz_[k] = Mat(n_, n_);
      GLp_[k] = Mat(n_, n_);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          GLz_[k](i, j) = v_[t.s_mixed_z(k, i, j)];
          GLp_[k](i, j) = v_[t.s_mixed_p(k, i, j)];
        }
    }

    value_ = v_[t.s_value()];
    Vec eta(n_);
    for (int l = 0; l < n_; ++l) eta[l] = ctx.zeta[l];
    NF_ = Mat(n_, n_);
    for (int k = 0; k < n_; ++k)
      NF_.col(k) = GUP_.transpose() * (GLz_[k].transpose() * eta);

    LF_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      Mat deltaGL = GLz_[k];
      for (int s = 0; s < n_; ++s) deltaGL -= NF_(s, k) * GLp_[s];
      LF_[k] = deltaGL * GUP_;
    }
  }

  int n() const { return n_; }
  double L() const { return CartanMetric::check_real(v_value()); }
  const Mat& G_low() const { return GL_; }    // g_{i jbar}
  const Mat& G_up() const { return GUP_; }
  const Mat& S_F() const { return SF_; }      // g_{ij}
  const Vec& grad_eta() const { return grad_; }
  const Vec& grad_z() const { return gz_; }
  const Mat& N_F() const { return NF_; }      // NF(i,k) = N^i_k
  const Tensor3& L_coef() const { return LF_; }  // LF[k](j,i) = L^i_{jk}

  // g_{i lbar} (L^i_{jk} - L^i_{kj}) eta^j conj(eta)^l, max over k
  double weakly_kahler_residual() const {
    double r = 0.0;
    for (int k = 0; k < n_; ++k) {
      cd acc(0, 0);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          for (int l = 0; l < n_; ++l)
            acc += GL_(i, l) * (LF_[k](j, i) - LF_[j](k, i)) * ctx_.zeta[j] *
                   std::conj(ctx_.zeta[l]);
      r = std::max(r, std::abs(acc));
    }
    return r;
  }

 private:
  cd v_value() const { return value_; }
  int n_;
  EvalContext ctx_;
  std::vector<cd> v_;
  cd value_{};
  Mat GL_, GUP_, SF_, NF_;
  Vec gz_, grad_;
  Tensor3 GLz_, GLp_, LF_;
};

// ---------------------------------------------------------------------------
// Hessian pairs and the nonholonomic vertical frame

struct HessianPair {
  Mat G_mat;   // 2n x 2n, at (z, eta); empty when built from H alone
  Mat H1_mat;  // 2n x 2n, natural-frame Hessian of H
  Mat H2_mat;  // 2n x 2n, built from A and h_down
  Mat A_mat;   // n x n
  double frame_residual{0.0};     // max(|H1 H2 - I|, |H2 H1 - I|)
  double condition_residual{0.0}; // max |A_{kr} h^{jr}|
};

namespace detail {
inline Mat block2(const Mat& tl, const Mat& tr, const Mat& bl, const Mat& br) {
  const int n = static_cast<int>(tl.rows());
  Mat m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = tl;
  m.topRightCorner(n, n) = tr;
  m.bottomLeftCorner(n, n) = bl;
  m.bottomRightCorner(n, n) = br;
  return m;
}
}  // namespace detail

inline Mat hessian_h1(const TensorWorkspace& w) {
  return detail::block2(w.S(), w.U().conjugate(), w.U(), w.S().conjugate());
}

inline Mat hessian_g(const FinslerWorkspace& w) {
  return detail::block2(w.S_F(), w.G_low(), w.G_low().conjugate(),
                        w.S_F().conjugate());
}

// Assembles A, H1, H2 and checks the frame conditions; throws
// FrameConditionFailed when H1 H2 = H2 H1 = I fails beyond tolerance.
inline HessianPair nonholonomic_frame(const CartanMetric& m,
                                      const EvalContext& ctx,
                                      double tol = 1e-8) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Connection);
  HessianPair hp;
  hp.A_mat = w.A();
  hp.H1_mat = hessian_h1(w);
  hp.H2_mat = detail::block2(hp.A_mat, w.D(), w.D().conjugate(),
                             hp.A_mat.conjugate());
  const int two_n = 2 * m.n();
  const Mat id = Mat::Identity(two_n, two_n);
  hp.frame_residual = std::max(max_abs(Mat(hp.H1_mat * hp.H2_mat - id)),
                               max_abs(Mat(hp.H2_mat * hp.H1_mat - id)));
  hp.condition_residual = max_abs(Mat(hp.A_mat * w.S().transpose()));
  const double scale = 1.0 + max_abs(hp.H1_mat) * max_abs(hp.H2_mat);
  if (hp.frame_residual > tol * scale)
    throw FrameConditionFailed(hp.frame_residual);
  return hp;
}

// ---------------------------------------------------------------------------
// the transformation itself

inline Vec forward_legendre(const FinslerMetric& f, const EvalContext& ctx) {
  std::vector<cd> v;
  f.tables().eval_tier1(ctx, v);
  Vec zeta(f.n());
  for (int k = 0; k < f.n(); ++k) zeta[k] = v[f.tables().s_d1(sym_p(k))];
  return zeta;
}

// eta^k = dH/dzeta_k, with an optional dualizability check through the
// nonholonomic frame: the candidate inverse Hessian is H2, and duality
// requires H1 H2 = I, which fails for non-purely-Hermitian Randers
// metrics.
inline Vec inverse_legendre(const CartanMetric& m, const EvalContext& ctx,
                            bool check_dualizable = false, double tol = 1e-8) {
  if (check_dualizable) {
    try {
      (void)nonholonomic_frame(m, ctx, tol);
    } catch (const FrameConditionFailed& e) {
      throw DegenerateHessian(e.residual);
    }
  }
  return m.grad_zeta(ctx);
}

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-12;  // relative residual target
  int max_damping = 30;
  double det_floor = 1e-14;
};

// Solves dL/d eta = zeta_target by a damped Newton iteration on the full
// 2n-real-dimensional system (L is not holomorphic, so the mixed Wirtinger
// blocks enter).  Seeded from the purely Hermitian linearization.
inline Vec invert_forward(const FinslerMetric& f, const std::vector<cd>& z,
                          const Vec& zeta_target,
                          const NewtonOptions& opt = {}) {
  const int n = f.n();
  auto context = [&](const Vec& eta) {
    EvalContext c;
    c.z = z;
    c.zeta.assign(eta.data(), eta.data() + n);
    return c;
  };

  // purely Hermitian seed: g_{k rbar}(z, eta_guess) conj(eta) = zeta
  Vec eta = zeta_target.conjugate();
  {
    FinslerWorkspace w(f, context(eta));
    Eigen::PartialPivLU<Mat> lu(w.G_low());
    Vec etabar = lu.solve(zeta_target);
    Vec seed = etabar.conjugate();
    if (seed.allFinite() && seed.norm() > 0) eta = seed;
  }

  const double target = opt.tolerance * (1.0 + zeta_target.norm());
  double resid_norm = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    FinslerWorkspace w(f, context(eta));
    Vec r = forward_legendre(f, context(eta)) - zeta_target;
    resid_norm = r.norm();
    if (resid_norm <= target) return eta;

    Mat J = detail::block2(w.S_F().transpose(), w.G_low(),
                           w.G_low().conjugate(), w.S_F().adjoint());
    Eigen::PartialPivLU<Mat> lu(J);
    const cd det = lu.determinant();
    if (!(std::abs(det) > opt.det_floor)) throw DegenerateHessian(std::abs(det));
    Vec rhs(2 * n);
    rhs.head(n) = -r;
    rhs.tail(n) = -r.conjugate();
    Vec step = lu.solve(rhs);
    if (!step.allFinite()) throw DegenerateHessian(0.0);
    Vec deta = step.head(n);

    double scale = 1.0;
    for (int d = 0; d <= opt.max_damping; ++d) {
      Vec trial = eta + scale * deta;
      double trial_norm;
      try {
        trial_norm = (forward_legendre(f, context(trial)) - zeta_target).norm();
      } catch (const Error&) {
        trial_norm = std::numeric_limits<double>::infinity();
      }
      if (trial_norm < resid_norm || d == opt.max_damping) {
        eta = trial;
        break;
      }
      scale *= 0.5;
    }
  }
  throw NewtonDiverged(resid_norm, opt.max_iterations);
}

// H(z, zeta) := L(z, eta(z, zeta)) through the Newton inversion.
inline double dual_metric_value(const FinslerMetric& f, const std::vector<cd>& z,
                                const Vec& zeta, const NewtonOptions& opt = {}) {
  Vec eta = invert_forward(f, z, zeta, opt);
  EvalContext c;
  c.z = z;
  c.zeta.assign(eta.data(), eta.data() + f.n());
  return f.value(c);
}

// ---------------------------------------------------------------------------
// duality verification

struct DualityReport {
  double gh1_residual;       // max |G H1 - I|, |H1 G - I|
  double sym_transfer;       // |g_{kj}(eta) - h_{kj}(zeta)|
  double mixed_transfer;     // |g_{j rbar}(eta) - h_{j rbar}(zeta)|
  double z_gradient_sign;    // |dL/dz + d*H/dz| (the Legendre sign identity)
  Vec zeta;                  // forward image used for the H side
};

inline DualityReport duality_condition(const FinslerMetric& f,
                                       const CartanMetric& m,
                                       const EvalContext& finsler_point) {
  FinslerWorkspace wf(f, finsler_point);
  Vec zeta = forward_legendre(f, finsler_point);
  EvalContext cartan_point;
  cartan_point.z = finsler_point.z;
  cartan_point.zeta.assign(zeta.data(), zeta.data() + f.n());
  TensorWorkspace wc(m, cartan_point, TensorWorkspace::Level::Connection);

  const int two_n = 2 * f.n();
  const Mat id = Mat::Identity(two_n, two_n);
  const Mat G = hessian_g(wf);
  const Mat H1 = hessian_h1(wc);

  DualityReport r;
  r.zeta = zeta;
  r.gh1_residual =
      std::max(max_abs(Mat(G * H1 - id)), max_abs(Mat(H1 * G - id)));
  r.sym_transfer = max_abs(Mat(wf.S_F() - wc.A()));
  r.mixed_transfer = max_abs(Mat(wf.G_low() - wc.D()));
  r.z_gradient_sign = (wf.grad_z() + wc.grad_z()).cwiseAbs().maxCoeff();
  return r;
}

// L-dual of the Chern-Finsler connection (upper-index V blocks).
struct DualConnection {
  Tensor3 H_star;    // equals the Chern-Cartan H^i_{jk}
  Tensor3 V_up;      // V*_j^{ik} = -h^{kr} h_{r mbar} h_{j sbar} (dpb^m h^{sbar i})
  Tensor3 V_mixed;   // V*_j^{i kbar}
};

inline DualConnection dual_connection(const CartanMetric& m,
                                      const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Connection);
  const int n = m.n();
  DualConnection dc;
  dc.H_star = w.Hk();
  dc.V_up.assign(n, Mat::Zero(n, n));
  dc.V_mixed.assign(n, Mat::Zero(n, n));

  const Mat P = w.S() * w.D();  // P(k,m) = h^{kr} h_{r mbar}
  Tensor3 DUpb(n);
  for (int mth = 0; mth < n; ++mth) DUpb[mth] = w.D() * w.Upb()[mth];
  const Mat A = w.A();

  for (int k = 0; k < n; ++k) {
    for (int mth = 0; mth < n; ++mth) dc.V_up[k] -= P(k, mth) * DUpb[mth];
    // V*_j^{i kbar} = h^{kbar r} h_{rl} V_j^{il} - h_{j sbar}(dpb^k h^{sbar i})
    Mat acc = Mat::Zero(n, n);
    for (int r = 0; r < n; ++r)
      for (int l = 0; l < n; ++l) acc += w.U()(k, r) * A(r, l) * w.Vk()[l];
    dc.V_mixed[k] = acc - DUpb[k];
  }
  return dc;
}

// (Finsler weakly-Kahler residual, Cartan weakly-Kahler residual) at the
// L-dual pair of points.
inline std::pair<double, double> weakly_kahler_transfer(
    const FinslerMetric& f, const CartanMetric& m,
    const EvalContext& finsler_point) {
  FinslerWorkspace wf(f, finsler_point);
  Vec zeta = forward_legendre(f, finsler_point);
  EvalContext cp;
  cp.z = finsler_point.z;
  cp.zeta.assign(zeta.data(), zeta.data() + f.n());
  TensorWorkspace wc(m, cp, TensorWorkspace::Level::Connection);
  double cartan = 0.0;
  for (int k = 0; k < m.n(); ++k) {
    cd acc(0, 0);
    for (int j = 0; j < m.n(); ++j)
      acc += (wc.N()(j, k) - wc.N()(k, j)) * wc.zup()[j];
    cartan = std::max(cartan, std::abs(acc));
  }
  return {wf.weakly_kahler_residual(), cartan};
}

}  // namespace cartan

#endif
