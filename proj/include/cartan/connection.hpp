#ifndef CARTAN_CONNECTION_HPP
#define CARTAN_CONNECTION_HPP

// Chern-Cartan nonlinear connection, Chern-Cartan linear connection and
// the Berwald-type connection at a chart point, plus the residuals the
// classifier consumes.
//
// Matrix/tensor conventions (0-based):
//   U(j,i)      h^{jbar i}              D = U^{-1}, D(j,k) = h_{j kbar}
//   N(j,i)      N_{ji} = -h_{j kbar} (d* h^{kbar l} / dz^i) zeta_l
//   Hk[k](j,i)  H^i_{jk}   (upper i, first lower j, second lower k)
//   Vk[k](j,i)  V_j^{ik}
//   W(i,k)      (dot-pb^i N_{ks}) zeta^s;  B^{ibar}_{jbar k} = W(i,k) conj(zeta_j)
//
// Derivatives of the inverse tensor use dD = -D (dU) D throughout.

#include "cartan/metric.hpp"

namespace cartan {

struct ConnectionFrame {
  Mat N;
  Tensor3 H_coef;
  Tensor3 V_coef;
  Tensor3 B_hol;
  Mat B_antihol_core;  // W(i,k); multiply by conj(zeta_j) for the full block
  Tensor3 torsion;     // torsion[k](j,i) = H^i_{jk} - H^i_{kj}
};

class TensorWorkspace {
 public:
  enum class Level { Connection, Deep };

  TensorWorkspace(const CartanMetric& m, const EvalContext& ctx,
                  Level level = Level::Connection)
      : n_(m.n()), ctx_(ctx), deep_(level == Level::Deep) {
    const MetricTables& t = m.tables();
    if (deep_)
      t.eval_tier3(ctx, v_);
    else
      t.eval_tier2(ctx, v_);
    load_frame(t);
    build_connection();
    if (deep_) build_deep(t);
  }

  int n() const { return n_; }
  const EvalContext& point() const { return ctx_; }

  double H() const { return CartanMetric::check_real(v_value_); }
  const Mat& U() const { return U_; }
  const Mat& D() const { return D_; }
  const Mat& S() const { return S_; }
  const Vec& zup() const { return zup_; }
  const Mat& N() const { return N_; }
  const Vec& grad_z() const { return gz_; }
  const Tensor3& Hk() const { return Hk_; }
  const Tensor3& Vk() const { return Vk_; }
  const Tensor3& Up() const { return Up_; }
  const Tensor3& Upb() const { return Upb_; }
  const Tensor3& deltaU() const { return deltaU_; }  // delta*_k h_up
  const Tensor3& torsion() const { return torsion_; }
  const Tensor3& Bhol() const { return need_deep(Bhol_); }
  const Tensor3& dN_dpb() const { return need_deep(dN_dpb_); }
  const Mat& W() const { return need_deep(W_); }

  // A-tensor h_{kr} = d^2 H / dzeta^k dzeta^r = -(D conj(S) D^T)
  Mat A() const { return -(D_ * S_.conjugate() * D_.transpose()); }

  // weak-Kahler defect Theta*^k
  Vec theta_star() const {
    Vec th = Vec::Zero(n_);
    for (int k = 0; k < n_; ++k)
      for (int m = 0; m < n_; ++m)
        for (int r = 0; r < n_; ++r)
          th[k] += U_(m, k) * (std::conj(N_(r, m)) - std::conj(N_(m, r))) *
                   std::conj(zup_[r]);
    return th;
  }

  double compat_residual() const {
    double r = 0.0;
    for (int k = 0; k < n_; ++k)
      r = std::max(r, max_abs(Mat(deltaU_[k] + U_ * Hk_[k])));
    return r;
  }

  double berwald_residual() const { return max_abs(need_deep(dN_dpb_)); }

  double landsberg_residual() const {
    double zmax = 0.0;
    for (int j = 0; j < n_; ++j) zmax = std::max(zmax, std::abs(ctx_.zeta[j]));
    return max_abs(need_deep(W_)) * zmax;
  }

  // (t0, t1, t2): torsion, torsion contracted with zeta_i, then with zeta^j
  void kahler_residuals(double& t0, double& t1, double& t2) const {
    t0 = t1 = t2 = 0.0;
    for (int k = 0; k < n_; ++k) {
      cd tw(0, 0);
      for (int j = 0; j < n_; ++j) {
        cd tc(0, 0);
        for (int i = 0; i < n_; ++i) {
          t0 = std::max(t0, std::abs(torsion_[k](j, i)));
          tc += torsion_[k](j, i) * ctx_.zeta[i];
        }
        t1 = std::max(t1, std::abs(tc));
        tw += tc * zup_[j];
      }
      t2 = std::max(t2, std::abs(tw));
    }
  }

  // max |dH^i_{jk}/dp_m| and |dH^i_{jk}/dpb_m| (zero iff H^i_{jk} = H^i_{jk}(z))
  void hcoef_fibre_residuals(double& holo, double& anti) const {
    need_deep(W_);
    holo = max_abs_4(dHk_dp_);
    anti = max_abs_4(dHk_dpb_);
  }

  // residuals of (dot-p^m H^i_{jk}) p_m = 0 and the conjugate contraction
  void hcoef_homogeneity_residuals(double& holo, double& anti) const {
    need_deep(W_);
    holo = anti = 0.0;
    for (int k = 0; k < n_; ++k) {
      Mat ch = Mat::Zero(n_, n_), ca = Mat::Zero(n_, n_);
      for (int m = 0; m < n_; ++m) {
        ch += dHk_dp_[m][k] * ctx_.zeta[m];
        ca += dHk_dpb_[m][k] * std::conj(ctx_.zeta[m]);
      }
      holo = std::max(holo, max_abs(ch));
      anti = std::max(anti, max_abs(ca));
    }
  }

  // residual of (dot-pb^i N_{ks}) zeta^k = 0
  double bgamma_contraction_residual() const {
    need_deep(W_);
    double r = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int s = 0; s < n_; ++s) {
        cd c(0, 0);
        for (int k = 0; k < n_; ++k) c += dN_dpb_[i](k, s) * zup_[k];
        r = std::max(r, std::abs(c));
      }
    return r;
  }

  ConnectionFrame connection_frame() const {
    ConnectionFrame f;
    f.N = N_;
    f.H_coef = Hk_;
    f.V_coef = Vk_;
    f.torsion = torsion_;
    if (deep_) {
      f.B_hol = Bhol_;
      f.B_antihol_core = W_;
    }
    return f;
  }

 private:
  template <class T>
  const T& need_deep(const T& field) const {
    if (!deep_)
      throw Error("TensorWorkspace: fourth-order tables need Level::Deep");
    return field;
  }

  static double max_abs_4(const std::vector<Tensor3>& t) {
    double r = 0.0;
    for (const auto& t3 : t) r = std::max(r, max_abs(t3));
    return r;
  }

  void load_frame(const MetricTables& t) {
    v_value_ = v_[t.s_value()];
    U_ = Mat(n_, n_);
    S_ = Mat(n_, n_);
    gz_ = Vec(n_);
    for (int j = 0; j < n_; ++j) {
      gz_[j] = v_[t.s_d1(sym_z(j))];
      for (int i = 0; i < n_; ++i) {
        U_(j, i) = v_[t.s_mixed(i, j)];
        S_(j, i) = v_[t.s_sym2(j, i)];
      }
    }
    D_ = guarded_inverse(U_);
    Vec zbar(n_);
    for (int m = 0; m < n_; ++m) zbar[m] = std::conj(ctx_.zeta[m]);
    zup_ = U_.transpose() * zbar;

    Uz_.resize(n_);
    Up_.resize(n_);
    Upb_.resize(n_);
    for (int s = 0; s < n_; ++s) {
      Uz_[s] = Mat(n_, n_);
      Up_[s] = Mat(n_, n_);
      Upb_[s] = Mat(n_, n_);
      for (int j = 0; j < n_; ++j)
        for (int i = 0; i < n_; ++i) {
          Uz_[s](j, i) = v_[t.s_mixed_z(s, i, j)];
          Up_[s](j, i) = v_[t.s_mixed_p(s, i, j)];
          Upb_[s](j, i) = v_[t.s_mixed_pb(s, i, j)];
        }
    }
  }

  void build_connection() {
    Vec zeta(n_);
    for (int l = 0; l < n_; ++l) zeta[l] = ctx_.zeta[l];

    N_ = Mat(n_, n_);
    for (int i = 0; i < n_; ++i) N_.col(i) = -(D_ * (Uz_[i] * zeta));

    Dp_.resize(n_);
    Dpb_.resize(n_);
    for (int m = 0; m < n_; ++m) {
      Dp_[m] = -(D_ * Up_[m] * D_);
      Dpb_[m] = -(D_ * Upb_[m] * D_);
    }

    deltaU_.resize(n_);
    Hk_.resize(n_);
    Vk_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      deltaU_[k] = Uz_[k];
      for (int s = 0; s < n_; ++s) deltaU_[k] += N_(s, k) * Up_[s];
      Hk_[k] = -(D_ * deltaU_[k]);
      Vk_[k] = -(D_ * Up_[k]);
    }

    torsion_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      torsion_[k] = Mat(n_, n_);
      for (int j = 0; j < n_; ++j)
        for (int i = 0; i < n_; ++i)
          torsion_[k](j, i) = Hk_[k](j, i) - Hk_[j](k, i);
    }
  }

  void build_deep(const MetricTables& t) {
    Vec zeta(n_);
    for (int l = 0; l < n_; ++l) zeta[l] = ctx_.zeta[l];

    Tensor3 DUz(n_);
    for (int k = 0; k < n_; ++k) DUz[k] = D_ * Uz_[k];

    Bhol_.assign(n_, Mat::Zero(n_, n_));
    dN_dpb_.assign(n_, Mat::Zero(n_, n_));
    std::vector<Tensor3> upz(n_, Tensor3(n_)), upbz(n_, Tensor3(n_)),
        upp(n_, Tensor3(n_)), uppb(n_, Tensor3(n_));
    for (int m = 0; m < n_; ++m)
      for (int k = 0; k < n_; ++k) {
        upz[m][k] = Mat(n_, n_);
        upbz[m][k] = Mat(n_, n_);
        upp[m][k] = Mat(n_, n_);
        uppb[m][k] = Mat(n_, n_);
        for (int j = 0; j < n_; ++j)
          for (int i = 0; i < n_; ++i) {
            upz[m][k](j, i) = v_[t.s_mixed_pz(m, k, i, j)];
            upbz[m][k](j, i) = v_[t.s_mixed_pbz(m, k, i, j)];
            upp[m][k](j, i) = v_[t.s_mixed_pp(m, k, i, j)];
            uppb[m][k](j, i) = v_[t.s_mixed_ppb(m, k, i, j)];
          }
      }

    for (int m = 0; m < n_; ++m)
      for (int k = 0; k < n_; ++k) {
        const Vec colp = -(Dp_[m] * (Uz_[k] * zeta)) - (D_ * (upz[m][k] * zeta));
        const Vec colpb =
            -(Dpb_[m] * (Uz_[k] * zeta)) - (D_ * (upbz[m][k] * zeta));
        for (int j = 0; j < n_; ++j) {
          Bhol_[k](j, m) = colp[j] - DUz[k](j, m);
          dN_dpb_[m](j, k) = colpb[j];
        }
      }

    W_ = Mat(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        cd w(0, 0);
        for (int s = 0; s < n_; ++s) w += dN_dpb_[i](k, s) * zup_[s];
        W_(i, k) = w;
      }

    dHk_dp_.assign(n_, Tensor3(n_));
    dHk_dpb_.assign(n_, Tensor3(n_));
    for (int m = 0; m < n_; ++m)
      for (int k = 0; k < n_; ++k) {
        Mat d_deltaU_p = upz[m][k];
        Mat d_deltaU_pb = upbz[m][k];
        for (int s = 0; s < n_; ++s) {
          Mat upp_s(n_, n_), uppb_s(n_, n_);
          for (int j = 0; j < n_; ++j)
            for (int i = 0; i < n_; ++i) {
              upp_s(j, i) = v_[t.s_mixed_pp(m, s, i, j)];
              uppb_s(j, i) = v_[t.s_mixed_ppb(m, s, i, j)];
            }
          d_deltaU_p += Bhol_[k](s, m) * Up_[s] + N_(s, k) * upp_s;
          d_deltaU_pb += dN_dpb_[m](s, k) * Up_[s] + N_(s, k) * uppb_s;
        }
        dHk_dp_[m][k] = -(Dp_[m] * deltaU_[k] + D_ * d_deltaU_p);
        dHk_dpb_[m][k] = -(Dpb_[m] * deltaU_[k] + D_ * d_deltaU_pb);
      }
  }

  int n_;
  EvalContext ctx_;
  bool deep_;
  std::vector<cd> v_;
  cd v_value_{};
  Mat U_, D_, S_, N_, W_;
  Vec zup_, gz_;
  Tensor3 Uz_, Up_, Upb_, Dp_, Dpb_, deltaU_, Hk_, Vk_, torsion_, Bhol_, dN_dpb_;
  std::vector<Tensor3> dHk_dp_, dHk_dpb_;  // [m][k](j,i)
};

// ---------------------------------------------------------------------------
// module operations

inline Mat chern_cartan_nc(const CartanMetric& m, const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Connection);
  return w.N();
}

inline ConnectionFrame linear_connection(const CartanMetric& m,
                                         const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Deep);
  return w.connection_frame();
}

inline std::pair<Tensor3, Mat> berwald_connection(const CartanMetric& m,
                                                  const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Deep);
  return {w.Bhol(), w.W()};
}

inline double metric_compat_residual(const CartanMetric& m,
                                     const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Connection);
  return w.compat_residual();
}

}  // namespace cartan

#endif
