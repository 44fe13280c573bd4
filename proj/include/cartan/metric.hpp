#ifndef CARTAN_METRIC_HPP
#define CARTAN_METRIC_HPP

// Validated metrics and their compiled derivative tables.
//
// A metric function (Hamiltonian H(z, zeta) or Lagrangian L(z, eta); the
// fibre symbols p[k] serve for both) owns every Wirtinger derivative of
// itself up to order four, compiled onto a single evaluation tape.  The
// tape is split into tiers so cheap consumers (ODE right-hand sides) pay
// only for what they read:
//
//   tier 1:  f and its 4n first derivatives
//   tier 2:  mixed/symmetric second derivatives and their first z-, p-,
//            pb-derivatives (third order)
//   tier 3:  the fourth-order tables behind the Berwald / Landsberg /
//            strongly-Berwald residuals
//
// Index conventions (0-based in code):
//   mixed(i, j)  = d^2 f / dp_i dpb_j.
//   On the Cartan side the fundamental tensor is h^{jbar i} = mixed(i, j)
//   arranged as U(row j, col i); its inverse D = U^{-1} has D(j, k) =
//   h_{j kbar}.  On the Finsler side g_{i jbar} = mixed(i, j) arranged
//   with the unbarred row first.

#include <algorithm>
#include <map>
#include <memory>
#include <vector>

#include "cartan/derive.hpp"
#include "cartan/linalg.hpp"
#include "cartan/parse.hpp"
#include "cartan/tape.hpp"

namespace cartan {

struct DerivativeEdge {
  int parent_slot;
  int child_slot;
  Symbol last;                 // child = d(parent)/d(last)
  std::vector<Symbol> index;   // full sorted multi-index of the child
};

class MetricTables {
 public:
  MetricTables(Expr f, int n) : n_(n), f_(std::move(f)) { build(); }

  int n() const { return n_; }
  const Expr& function() const { return f_; }

  int tier1_ops() const { return tier1_; }
  int tier2_ops() const { return tier2_; }
  int tier3_ops() const { return tier3_; }

  void eval_tier1(const EvalContext& ctx, std::vector<cd>& out) const {
    tape_.eval_prefix(ctx, tier1_, out);
  }
  void eval_tier2(const EvalContext& ctx, std::vector<cd>& out) const {
    tape_.eval_prefix(ctx, tier2_, out);
  }
  void eval_tier3(const EvalContext& ctx, std::vector<cd>& out) const {
    tape_.eval_prefix(ctx, tier3_, out);
  }

  // slot accessors -----------------------------------------------------
  int s_value() const { return slot_of({}); }
  int s_d1(Symbol s) const { return slot_of({s}); }
  int s_mixed(int i, int j) const { return slot_of({sym_p(i), sym_pb(j)}); }
  int s_sym2(int i, int j) const { return slot_of({sym_p(i), sym_p(j)}); }
  int s_mixed_z(int s, int i, int j) const {
    return slot_of({sym_z(s), sym_p(i), sym_pb(j)});
  }
  int s_mixed_p(int m, int i, int j) const {
    return slot_of({sym_p(m), sym_p(i), sym_pb(j)});
  }
  int s_mixed_pb(int m, int i, int j) const {
    return slot_of({sym_p(i), sym_pb(m), sym_pb(j)});
  }
  int s_mixed_pz(int m, int s, int i, int j) const {
    return slot_of({sym_z(s), sym_p(m), sym_p(i), sym_pb(j)});
  }
  int s_mixed_pbz(int m, int s, int i, int j) const {
    return slot_of({sym_z(s), sym_p(i), sym_pb(m), sym_pb(j)});
  }
  int s_mixed_pp(int m, int s, int i, int j) const {
    return slot_of({sym_p(m), sym_p(s), sym_p(i), sym_pb(j)});
  }
  int s_mixed_ppb(int m, int s, int i, int j) const {
    return slot_of({sym_p(s), sym_p(i), sym_pb(m), sym_pb(j)});
  }

  const Expr& table_expr(const std::vector<Symbol>& index) const {
    return exprs_.at(sorted(index));
  }
  const std::map<std::vector<Symbol>, Expr>& table() const { return exprs_; }
  const std::vector<DerivativeEdge>& edges() const { return edges_; }

 private:
  static std::vector<Symbol> sorted(std::vector<Symbol> idx) {
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  int slot_of(const std::vector<Symbol>& idx) const {
    return slots_.at(sorted(idx));
  }

  // Builds (and registers on the tape) the derivative for a sorted
  // multi-index, deriving from the parent index in canonical order so
  // identical mixed derivatives share one expression DAG.
  int ensure(std::vector<Symbol> idx) {
    idx = sorted(idx);
    auto it = slots_.find(idx);
    if (it != slots_.end()) return it->second;
    Expr e;
    int parent_slot = -1;
    Symbol last{};
    if (idx.empty()) {
      e = f_;
    } else {
      std::vector<Symbol> parent(idx.begin(), idx.end() - 1);
      last = idx.back();
      parent_slot = ensure(parent);
      e = wirtinger_derive(exprs_.at(parent), last);
    }
    const int slot = tape_.add_root(e);
    exprs_.emplace(idx, e);
    slots_.emplace(idx, slot);
    if (parent_slot >= 0) edges_.push_back({parent_slot, slot, last, idx});
    return slot;
  }

  void build() {
    ensure({});
    for (int i = 0; i < n_; ++i) {
      ensure({sym_z(i)});
      ensure({sym_zb(i)});
      ensure({sym_p(i)});
      ensure({sym_pb(i)});
    }
    tier1_ = tape_.size();

    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        ensure({sym_p(i), sym_pb(j)});
        ensure({sym_p(i), sym_p(j)});
      }
    for (int s = 0; s < n_; ++s)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          ensure({sym_z(s), sym_p(i), sym_pb(j)});
          ensure({sym_p(s), sym_p(i), sym_pb(j)});
          ensure({sym_p(i), sym_pb(s), sym_pb(j)});
        }
    tier2_ = tape_.size();

    for (int m = 0; m < n_; ++m)
      for (int s = 0; s < n_; ++s)
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) {
            ensure({sym_z(s), sym_p(m), sym_p(i), sym_pb(j)});
            ensure({sym_z(s), sym_p(i), sym_pb(m), sym_pb(j)});
            ensure({sym_p(m), sym_p(s), sym_p(i), sym_pb(j)});
            ensure({sym_p(s), sym_p(i), sym_pb(m), sym_pb(j)});
          }
    tier3_ = tape_.size();
  }

  int n_;
  Expr f_;
  Tape tape_;
  int tier1_{0}, tier2_{0}, tier3_{0};
  std::map<std::vector<Symbol>, Expr> exprs_;
  std::map<std::vector<Symbol>, int> slots_;
  std::vector<DerivativeEdge> edges_;
};

// ---------------------------------------------------------------------------

// All tensor values of a Cartan metric at one chart point.
struct MetricFrame {
  EvalContext point;
  Mat h_up;     // U(j, i) = h^{jbar i}
  Mat h_down;   // D(j, k) = h_{j kbar},  D = U^{-1}
  Mat h_sym;    // S(j, r) = h^{jr} = d^2 H / dp_j dp_r
  Vec zeta_up;  // zeta^j = h^{mbar j} zeta_mbar
  double condition{0.0};
};

class CartanMetric {
 public:
  static CartanMetric compile(Expr H, int n) {
    return CartanMetric(std::make_shared<MetricTables>(std::move(H), n));
  }
  static CartanMetric compile(const std::string& text, int n) {
    return compile(parse(text, n), n);
  }

  int n() const { return tables_->n(); }
  const Expr& hamiltonian() const { return tables_->function(); }
  const MetricTables& tables() const { return *tables_; }

  double value(const EvalContext& ctx) const {
    std::vector<cd> v;
    tables_->eval_tier1(ctx, v);
    return check_real(v[tables_->s_value()]);
  }

  // dH/dp_k as a vector; equals zeta^k by the Euler identity.
  Vec grad_zeta(const EvalContext& ctx) const {
    std::vector<cd> v;
    tables_->eval_tier1(ctx, v);
    Vec g(n());
    for (int k = 0; k < n(); ++k) g[k] = v[tables_->s_d1(sym_p(k))];
    return g;
  }

  // dH/dz_k (the starred derivative).
  Vec grad_z(const EvalContext& ctx) const {
    std::vector<cd> v;
    tables_->eval_tier1(ctx, v);
    Vec g(n());
    for (int k = 0; k < n(); ++k) g[k] = v[tables_->s_d1(sym_z(k))];
    return g;
  }

  MetricFrame frame(const EvalContext& ctx) const {
    std::vector<cd> v;
    tables_->eval_tier2(ctx, v);
    return frame_from_values(ctx, v);
  }

  MetricFrame frame_from_values(const EvalContext& ctx,
                                const std::vector<cd>& v) const {
    const int n = tables_->n();
    MetricFrame f;
    f.point = ctx;
    f.h_up = Mat(n, n);
    f.h_sym = Mat(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        f.h_up(j, i) = v[tables_->s_mixed(i, j)];
        f.h_sym(j, i) = v[tables_->s_sym2(j, i)];
      }
    f.h_down = guarded_inverse(f.h_up);
    const double na = f.h_up.cwiseAbs().colwise().sum().maxCoeff();
    const double nb = f.h_down.cwiseAbs().colwise().sum().maxCoeff();
    f.condition = na * nb;
    Vec zbar(n);
    for (int m = 0; m < n; ++m) zbar[m] = std::conj(ctx.zeta[m]);
    f.zeta_up = f.h_up.transpose() * zbar;
    return f;
  }

  static double check_real(cd v) {
    if (std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v.real())))
      throw DomainError("Hamiltonian value is not real",
                        "Im = " + std::to_string(v.imag()));
    return v.real();
  }

 private:
  explicit CartanMetric(std::shared_ptr<const MetricTables> t)
      : tables_(std::move(t)) {}
  std::shared_ptr<const MetricTables> tables_;
};

inline Vec raise_index(const MetricFrame& frame) { return frame.zeta_up; }

// ---------------------------------------------------------------------------
// validation (Definition of a complex Cartan metric, checked pointwise)

struct ValidationOptions {
  double reality_tol = 1e-9;
  double euler_tol = 1e-9;
  double homogeneity_tol = 1e-9;
  double pd_floor = 0.0;  // min eigenvalue must exceed this
};

// The conditions (real value, (1,1)-homogeneity in the fibre, positive
// definite mixed Hessian) are formally identical for Hamiltonians H(z, zeta)
// and Lagrangians L(z, eta), so validation runs on the raw tables.
inline void validate_at_sample(const MetricTables& t, const EvalContext& ctx,
                               int sample_index, const ValidationOptions& opt) {
  const int n = t.n();
  std::vector<cd> v;
  t.eval_tier2(ctx, v);

  const cd H = v[t.s_value()];
  if (std::abs(H.imag()) > opt.reality_tol * (1.0 + std::abs(H.real())))
    throw ValidationError(ValidationError::Kind::NotReal, sample_index,
                          "Im H = " + std::to_string(H.imag()));
  const double scale = 1.0 + std::abs(H.real());

  // Euler identities from (1,1)-homogeneity
  cd euler = -H, euler_bar = -H;
  for (int k = 0; k < n; ++k) {
    euler += v[t.s_d1(sym_p(k))] * ctx.zeta[k];
    euler_bar += v[t.s_d1(sym_pb(k))] * std::conj(ctx.zeta[k]);
  }
  if (std::abs(euler) > opt.euler_tol * scale ||
      std::abs(euler_bar) > opt.euler_tol * scale)
    throw ValidationError(ValidationError::Kind::NotHomogeneous, sample_index,
                          "Euler residual " + std::to_string(std::abs(euler)));

  // (d h^{jbar i} / dp_k) p_k = 0 and its conjugate
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cd r(0, 0), rb(0, 0);
      for (int k = 0; k < n; ++k) {
        r += v[t.s_mixed_p(k, i, j)] * ctx.zeta[k];
        rb += v[t.s_mixed_pb(k, i, j)] * std::conj(ctx.zeta[k]);
      }
      if (std::abs(r) > opt.euler_tol * scale || std::abs(rb) > opt.euler_tol * scale)
        throw ValidationError(ValidationError::Kind::NotHomogeneous, sample_index,
                              "tensor homogeneity residual " +
                                  std::to_string(std::max(std::abs(r), std::abs(rb))));
    }

  // |lambda|^2-homogeneity of H itself at a few non-real scalings
  const cd lambdas[] = {cd(2.0, 0.0), cd(1.0, 1.0),
                        std::polar(1.0, 3.14159265358979323846 / 3.0)};
  for (cd lam : lambdas) {
    EvalContext scaled = ctx;
    for (auto& q : scaled.zeta) q *= lam;
    std::vector<cd> w;
    t.eval_tier1(scaled, w);
    const cd Hs = w[t.s_value()];
    if (std::abs(Hs - std::norm(lam) * H) >
        opt.homogeneity_tol * (1.0 + std::abs(Hs)))
      throw ValidationError(ValidationError::Kind::NotHomogeneous, sample_index,
                            "H(lambda zeta) != |lambda|^2 H");
  }

  // positive definiteness of the fundamental tensor
  Mat U(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) U(j, i) = v[t.s_mixed(i, j)];
  if (hermiticity_residual(U) > 1e-8 * (1.0 + max_abs(U)))
    throw ValidationError(ValidationError::Kind::NotPositiveDefinite, sample_index,
                          "fundamental tensor not Hermitian");
  const double lo = min_eigenvalue(U);
  if (!(lo > opt.pd_floor))
    throw ValidationError(ValidationError::Kind::NotPositiveDefinite, sample_index,
                          "min eigenvalue " + std::to_string(lo));
}

inline const CartanMetric& validate_compiled(
    const CartanMetric& m, const std::vector<EvalContext>& samples,
    const ValidationOptions& opt = {}) {
  if (samples.empty()) throw Error("validate_metric: no samples supplied");
  for (std::size_t s = 0; s < samples.size(); ++s)
    validate_at_sample(m.tables(), samples[s], static_cast<int>(s), opt);
  return m;
}

inline CartanMetric validate_metric(const Expr& H, int n,
                                    const std::vector<EvalContext>& samples,
                                    const ValidationOptions& opt = {}) {
  CartanMetric m = CartanMetric::compile(H, n);
  validate_compiled(m, samples, opt);
  return m;
}

}  // namespace cartan

#endif
