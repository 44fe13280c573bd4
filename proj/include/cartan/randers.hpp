#ifndef CARTAN_RANDERS_HPP
#define CARTAN_RANDERS_HPP

// Cartan-Randers metrics C~ = alpha + |beta| built from Hermitian data
// a^{jbar i}(z) and a (1,0)-form b_i(z), their closed-form fundamental
// tensor, nonlinear connection, and the Berwald / strongly-Berwald /
// purely-Hermitian criteria.
//
// a_up[j][i] holds a^{jbar i} (barred row first, like h_up);
// b_low[i] holds b_i.  Derived data: b^i = a^{jbar i} b_{jbar},
// beta = b^i zeta_i, alpha^2 = a^{jbar i} zeta_{jbar} zeta_i,
// ||b||^2 = b_i b^i, gamma = C~^2 + alpha^2 (||b||^2 - 1), and
// xi_j = conj(beta) zeta_j + alpha^2 b_j.

#include "cartan/connection.hpp"

namespace cartan {

inline constexpr double kBetaFloor = 1e-12;

struct RandersSpec {
  int n{};
  std::vector<std::vector<Expr>> a_up;
  std::vector<Expr> b_low;

  static RandersSpec from_strings(int n,
                                  const std::vector<std::vector<std::string>>& a,
                                  const std::vector<std::string>& b) {
    RandersSpec s;
    s.n = n;
    s.a_up.resize(n);
    for (int j = 0; j < n; ++j) {
      s.a_up[j].reserve(n);
      for (int i = 0; i < n; ++i) s.a_up[j].push_back(parse(a[j][i], n));
    }
    s.b_low.reserve(n);
    for (int i = 0; i < n; ++i) s.b_low.push_back(parse(b[i], n));
    return s;
  }
};

// Numeric values of the Randers data at one point.
// symbolic derivative step recorded for the finite-difference cross-checks
struct DerivativeCheck {
  Expr parent;
  Expr child;
  Symbol s;
};

struct RandersPoint {
  double alpha2{}, alpha{}, absbeta{}, ctilde{}, b_norm2{}, gamma{};
  cd beta;
  Mat a_up, a_low;       // a^{jbar i}, a_{j kbar}
  Tensor3 da_up;         // da_up[s] = d* a_up / dz^s
  Vec b_low, b_up;       // b_i, b^i
  Vec zeta_up_a;         // zeta^i = a^{mbar i} zeta_mbar
  Mat db_bar;            // db_bar(k, r) = d* b_{rbar} / dz^k
  Mat db_up_bar;         // db_up_bar(k, r) = d* b^{rbar} / dz^k
};

class RandersGeometry {
 public:
  explicit RandersGeometry(RandersSpec spec) : spec_(std::move(spec)) {
    const int n = spec_.n;
    std::vector<Expr> b_bar(n), b_up(n), b_up_bar(n);
    for (int j = 0; j < n; ++j) b_bar[j] = conj_push(spec_.b_low[j]);
    for (int i = 0; i < n; ++i) {
      Expr acc = constant(0.0);
      for (int j = 0; j < n; ++j) acc = add(acc, mul(spec_.a_up[j][i], b_bar[j]));
      b_up[i] = acc;
      b_up_bar[i] = conj_push(acc);
    }

    Expr alpha2 = constant(0.0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        alpha2 = add(alpha2, mul(spec_.a_up[j][i],
                                 mul(symbol(sym_pb(j)), symbol(sym_p(i)))));
    Expr beta = constant(0.0);
    for (int i = 0; i < n; ++i)
      beta = add(beta, mul(b_up[i], symbol(sym_p(i))));
    Expr absbeta = sqrt_e(mul(beta, conj_push(beta)));
    hamiltonian_ = pow_int(add(sqrt_e(alpha2), absbeta), 2);

    s_aup_.assign(n, std::vector<int>(n));
    s_daup_.assign(n, std::vector<std::vector<int>>(n, std::vector<int>(n)));
    s_blow_.resize(n);
    s_bup_.resize(n);
    s_dbbar_.assign(n, std::vector<int>(n));
    s_dbupbar_.assign(n, std::vector<int>(n));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        s_aup_[j][i] = tape_.add_root(spec_.a_up[j][i]);
        for (int s = 0; s < n; ++s) {
          Expr d = wirtinger_derive(spec_.a_up[j][i], sym_z(s));
          s_daup_[s][j][i] = tape_.add_root(d);
          checks_.push_back({spec_.a_up[j][i], d, sym_z(s)});
        }
      }
    for (int i = 0; i < n; ++i) {
      s_blow_[i] = tape_.add_root(spec_.b_low[i]);
      s_bup_[i] = tape_.add_root(b_up[i]);
      for (int k = 0; k < n; ++k) {
        Expr db = wirtinger_derive(b_bar[i], sym_z(k));
        Expr dbu = wirtinger_derive(b_up_bar[i], sym_z(k));
        s_dbbar_[k][i] = tape_.add_root(db);
        s_dbupbar_[k][i] = tape_.add_root(dbu);
        checks_.push_back({b_bar[i], db, sym_z(k)});
        checks_.push_back({b_up_bar[i], dbu, sym_z(k)});
      }
    }
    s_beta_ = tape_.add_root(beta);
  }

  const std::vector<DerivativeCheck>& derivative_checks() const {
    return checks_;
  }

  const RandersSpec& spec() const { return spec_; }
  const Expr& hamiltonian() const { return hamiltonian_; }
  int n() const { return spec_.n; }

  RandersPoint at(const EvalContext& ctx, double beta_floor = kBetaFloor) const {
    const int n = spec_.n;
    std::vector<cd> v;
    tape_.eval(ctx, v);
    RandersPoint p;
    p.a_up = Mat(n, n);
    p.da_up.assign(n, Mat(n, n));
    p.b_low = Vec(n);
    p.b_up = Vec(n);
    p.db_bar = Mat(n, n);
    p.db_up_bar = Mat(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        p.a_up(j, i) = v[s_aup_[j][i]];
        for (int s = 0; s < n; ++s) p.da_up[s](j, i) = v[s_daup_[s][j][i]];
      }
    for (int i = 0; i < n; ++i) {
      p.b_low[i] = v[s_blow_[i]];
      p.b_up[i] = v[s_bup_[i]];
      for (int k = 0; k < n; ++k) {
        p.db_bar(k, i) = v[s_dbbar_[k][i]];
        p.db_up_bar(k, i) = v[s_dbupbar_[k][i]];
      }
    }
    p.beta = v[s_beta_];
    p.absbeta = std::abs(p.beta);
    if (p.absbeta < beta_floor) throw BetaZero(-1);
    p.a_low = guarded_inverse(p.a_up);

    Vec zbar(n);
    for (int m = 0; m < n; ++m) zbar[m] = std::conj(ctx.zeta[m]);
    p.zeta_up_a = p.a_up.transpose() * zbar;

    cd alpha2(0, 0);
    for (int i = 0; i < n; ++i) alpha2 += ctx.zeta[i] * p.zeta_up_a[i];
    p.alpha2 = alpha2.real();
    if (!(p.alpha2 > 0.0))
      throw DomainError("alpha^2 not positive", "a_up data");
    p.alpha = std::sqrt(p.alpha2);
    p.ctilde = p.alpha + p.absbeta;
    cd bn(0, 0);
    for (int i = 0; i < n; ++i) bn += p.b_low[i] * p.b_up[i];
    p.b_norm2 = bn.real();
    p.gamma = p.ctilde * p.ctilde + p.alpha2 * (p.b_norm2 - 1.0);
    return p;
  }

  // closed-form fundamental tensor (upper indices), its inverse, and the
  // determinant-identity ratio det(h_up) / [ (C/alpha)^n gamma/(2 alpha |beta|) det(a_up) ]
  void tensors(const RandersPoint& p, const EvalContext& ctx, Mat& h_up,
               Mat& h_down, cd& det_ratio) const {
    const int n = spec_.n;
    if (!(p.gamma > 0.0)) throw GammaNonPositive(-1, p.gamma);

    Vec tz(n);  // zeta~^i = C (zeta^i/alpha + conj(beta) b^i/|beta|)
    for (int i = 0; i < n; ++i)
      tz[i] = p.ctilde * (p.zeta_up_a[i] / p.alpha +
                          std::conj(p.beta) * p.b_up[i] / p.absbeta);

    h_up = Mat(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        h_up(j, i) = p.ctilde / p.alpha * p.a_up(j, i) -
                     p.ctilde / (2.0 * p.alpha2 * p.alpha) *
                         std::conj(p.zeta_up_a[j]) * p.zeta_up_a[i] +
                     p.ctilde / (2.0 * p.absbeta) * std::conj(p.b_up[j]) *
                         p.b_up[i] +
                     std::conj(tz[j]) * tz[i] / (2.0 * p.ctilde * p.ctilde);

    h_down = Mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cd zi = ctx.zeta[i], zbj = std::conj(ctx.zeta[j]);
        h_down(i, j) =
            p.alpha / p.ctilde * p.a_low(i, j) +
            p.absbeta * (p.alpha * p.b_norm2 + p.absbeta) /
                (p.ctilde * p.ctilde * p.gamma) * zi * zbj -
            p.alpha2 * p.alpha / (p.ctilde * p.gamma) * p.b_low[i] *
                std::conj(p.b_low[j]) -
            p.alpha / (p.ctilde * p.gamma) *
                (std::conj(p.beta) * zi * std::conj(p.b_low[j]) +
                 p.beta * p.b_low[i] * zbj);
      }

    const cd det_h = h_up.determinant();
    const cd det_a = p.a_up.determinant();
    const cd predicted = std::pow(p.ctilde / p.alpha, n) * p.gamma /
                         (2.0 * p.alpha * p.absbeta) * det_a;
    det_ratio = det_h / predicted;
  }

  // nonlinear connection via the simplified closed form; Na is the purely
  // Hermitian part N^a_{ji} = -a_{j rbar} (d* a^{rbar l}/dz^i) zeta_l
  void nonlinear_connection(const RandersPoint& p, const EvalContext& ctx,
                            Mat& Ntilde, Mat& Na) const {
    const int n = spec_.n;
    if (!(p.gamma > 0.0)) throw GammaNonPositive(-1, p.gamma);
    Vec zeta(n);
    for (int l = 0; l < n; ++l) zeta[l] = ctx.zeta[l];

    Na = Mat(n, n);
    for (int i = 0; i < n; ++i) Na.col(i) = -(p.a_low * (p.da_up[i] * zeta));

    Vec xi(n);
    for (int j = 0; j < n; ++j)
      xi[j] = std::conj(p.beta) * ctx.zeta[j] + p.alpha2 * p.b_low[j];

    Mat kmat(n, n);  // k_{j rbar}
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r)
        kmat(j, r) = p.alpha * p.a_low(j, r) +
                     (p.alpha * p.b_norm2 + p.absbeta) / p.gamma * ctx.zeta[j] *
                         std::conj(ctx.zeta[r]) -
                     p.alpha * p.ctilde * p.beta /
                         (p.gamma * p.absbeta) * p.b_low[j] *
                         std::conj(ctx.zeta[r]);

    // zeta^{rbar} = conj(zeta^r) = a^{rbar l} zeta_l
    Vec zup_bar(n);
    for (int r = 0; r < n; ++r) zup_bar[r] = std::conj(p.zeta_up_a[r]);

    Ntilde = Mat(n, n);
    for (int i = 0; i < n; ++i) {
      cd scalar(0, 0);
      for (int r = 0; r < n; ++r)
        scalar += p.db_bar(i, r) * zup_bar[r] -
                  p.alpha * p.beta / p.absbeta * p.db_up_bar(i, r) *
                      std::conj(p.b_low[r]);
      for (int j = 0; j < n; ++j) {
        cd corr = scalar / p.gamma * xi[j];
        cd tail(0, 0);
        for (int r = 0; r < n; ++r)
          tail += kmat(j, r) * p.db_up_bar(i, r);
        Ntilde(j, i) = Na(j, i) - corr - p.beta / p.absbeta * tail;
      }
    }
  }

  // ( max_k |delta^a_k |beta||, Kahler residual of alpha )
  std::pair<double, double> berwald_criterion(const RandersPoint& p,
                                              const EvalContext& ctx) const {
    const int n = spec_.n;
    Vec zup_bar(n);
    for (int r = 0; r < n; ++r) zup_bar[r] = std::conj(p.zeta_up_a[r]);
    double d1 = 0.0;
    for (int k = 0; k < n; ++k) {
      cd acc(0, 0);
      for (int r = 0; r < n; ++r)
        acc += std::conj(p.beta) * zup_bar[r] * p.db_bar(k, r) +
               p.beta * p.db_up_bar(k, r) * std::conj(ctx.zeta[r]);
      d1 = std::max(d1, std::abs(acc) / (2.0 * p.absbeta));
    }

    // Kahler residual of the purely Hermitian base:
    // max |d a_{j mbar}/dz^i - d a_{i mbar}/dz^j|, with da_low = -a_low da_up a_low
    Tensor3 da_low(n);
    for (int i = 0; i < n; ++i) da_low[i] = -(p.a_low * p.da_up[i] * p.a_low);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d2 = std::max(d2, max_abs(Mat(da_low[i].row(j) - da_low[j].row(i))));
    return {d1, d2};
  }

  // normalized | alpha^2 ||b||^2 - |beta|^2 |
  double purely_hermitian_residual(const RandersPoint& p) const {
    const double lhs = p.alpha2 * p.b_norm2;
    const double rhs = p.absbeta * p.absbeta;
    return std::abs(lhs - rhs) / (lhs + rhs);
  }

 private:
  RandersSpec spec_;
  Expr hamiltonian_;
  Tape tape_;
  std::vector<std::vector<int>> s_aup_;
  std::vector<std::vector<std::vector<int>>> s_daup_;  // [s][j][i]
  std::vector<int> s_blow_, s_bup_;
  std::vector<std::vector<int>> s_dbbar_, s_dbupbar_;  // [k][r]
  int s_beta_{};
  std::vector<DerivativeCheck> checks_;
};

// Validates the Randers data and compiles the Hamiltonian (alpha + |beta|)^2.
inline CartanMetric build_metric(const RandersGeometry& g,
                                 const std::vector<EvalContext>& samples,
                                 double beta_floor = kBetaFloor) {
  for (std::size_t s = 0; s < samples.size(); ++s) {
    RandersPoint p;
    try {
      p = g.at(samples[s], beta_floor);
    } catch (const BetaZero&) {
      throw BetaZero(static_cast<int>(s));
    }
    if (!(p.gamma > 0.0)) throw GammaNonPositive(static_cast<int>(s), p.gamma);
  }
  return validate_metric(g.hamiltonian(), g.n(), samples);
}

}  // namespace cartan

#endif
