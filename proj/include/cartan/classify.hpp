#ifndef CARTAN_CLASSIFY_HPP
#define CARTAN_CLASSIFY_HPP

// Sample-based classification into the Kahler-Cartan nuances and the
// Berwald / Landsberg / strongly-Berwald classes.  The implication chain
// between the classes is asserted on every report; a violation at the
// working tolerance is an InternalInconsistency, never silently
// reconciled.

#include <tuple>
#include <map>

#include "cartan/connection.hpp"
#include "cartan/parallel.hpp"

namespace cartan {

struct ClassificationReport {
  // raw max residual over the samples, and the scale it is compared against
  std::map<std::string, double> residuals;
  std::map<std::string, double> scales;
  std::map<std::string, bool> verdicts;
  int samples_used{0};
  double tolerance{1e-6};
};

// (strongly, once-contracted, twice-contracted) torsion residuals
inline std::tuple<double, double, double> kahler_residuals(
    const CartanMetric& m, const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Connection);
  double t0, t1, t2;
  w.kahler_residuals(t0, t1, t2);
  return {t0, t1, t2};
}

inline double kahler_residual(const CartanMetric& m, const EvalContext& ctx,
                              int level /* 0 strongly, 1 kahler, 2 weakly */) {
  auto [t0, t1, t2] = kahler_residuals(m, ctx);
  return level == 0 ? t0 : level == 1 ? t1 : t2;
}

inline double berwald_residual(const CartanMetric& m, const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Deep);
  return w.berwald_residual();
}

inline double landsberg_residual(const CartanMetric& m, const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Deep);
  return w.landsberg_residual();
}

// identity tying the Landsberg block to the torsion contraction:
// (dpb^i N_{ks}) zeta^s = dpb^i[(N_{ks}-N_{sk}) zeta^s] - (N_{ks}-N_{sk}) h^{ibar s}
inline double bgamma_identity_residual(const TensorWorkspace& w) {
  const int n = w.n();
  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      cd rhs(0, 0);
      for (int s = 0; s < n; ++s)
        rhs += (w.dN_dpb()[i](k, s) - w.dN_dpb()[i](s, k)) * w.zup()[s];
      r = std::max(r, std::abs(w.W()(i, k) - rhs));
    }
  return r;
}

inline ClassificationReport classify(const CartanMetric& m,
                                     const std::vector<EvalContext>& samples,
                                     double tol = 1e-6, int threads = 1) {
  if (samples.size() < 8)
    throw Error("classify: need at least 8 samples");

  struct PerSample {
    double t0, t1, t2, berwald, landsberg, hz_holo, hz_anti;
    double hk_norm, n_norm, zeta_norm, zup_norm;
  };
  std::vector<PerSample> rows(samples.size());
  parallel_for(static_cast<int>(samples.size()), threads, [&](int idx) {
    const EvalContext& ctx = samples[idx];
    TensorWorkspace w(m, ctx, TensorWorkspace::Level::Deep);
    PerSample& r = rows[idx];
    w.kahler_residuals(r.t0, r.t1, r.t2);
    r.berwald = w.berwald_residual();
    r.landsberg = w.landsberg_residual();
    w.hcoef_fibre_residuals(r.hz_holo, r.hz_anti);
    r.hk_norm = max_abs(w.Hk());
    r.n_norm = max_abs(w.N());
    r.zup_norm = max_abs(w.zup());
    r.zeta_norm = 0;
    for (const cd& q : ctx.zeta) r.zeta_norm = std::max(r.zeta_norm, std::abs(q));
  });

  double t0 = 0, t1 = 0, t2 = 0;                 // torsion contractions
  double berwald = 0, landsberg = 0;             // dpb N, W * zeta_bar
  double hz_holo = 0, hz_anti = 0;               // dH^i_{jk}/dp, /dpb
  double hk_norm = 0, n_norm = 0, zeta_norm = 0, zup_norm = 0;
  for (const PerSample& r : rows) {
    t0 = std::max(t0, r.t0);
    t1 = std::max(t1, r.t1);
    t2 = std::max(t2, r.t2);
    berwald = std::max(berwald, r.berwald);
    landsberg = std::max(landsberg, r.landsberg);
    hz_holo = std::max(hz_holo, r.hz_holo);
    hz_anti = std::max(hz_anti, r.hz_anti);
    hk_norm = std::max(hk_norm, r.hk_norm);
    n_norm = std::max(n_norm, r.n_norm);
    zeta_norm = std::max(zeta_norm, r.zeta_norm);
    zup_norm = std::max(zup_norm, r.zup_norm);
  }

  ClassificationReport rep;
  rep.samples_used = static_cast<int>(samples.size());
  rep.tolerance = tol;

  auto put = [&](const std::string& key, double residual, double scale) {
    rep.residuals[key] = residual;
    rep.scales[key] = scale;
    rep.verdicts[key] = residual <= tol * scale;
  };
  put("strongly_kahler", t0, 1.0 + hk_norm);
  put("kahler", t1, 1.0 + hk_norm * zeta_norm);
  put("weakly_kahler", t2, 1.0 + hk_norm * zeta_norm * zup_norm);
  put("berwald", berwald, 1.0 + n_norm);
  put("landsberg", landsberg, 1.0 + n_norm * zup_norm * zeta_norm);
  const double hz = std::max(hz_holo, hz_anti);
  const bool z_only = hz <= tol * (1.0 + hk_norm);
  rep.residuals["strongly_berwald"] = hz;
  rep.scales["strongly_berwald"] = 1.0 + hk_norm;
  rep.verdicts["strongly_berwald"] = z_only && rep.verdicts["weakly_kahler"];

  const auto& v = rep.verdicts;
  auto implies = [&](const char* a, const char* b) {
    if (v.at(a) && !v.at(b))
      throw InternalInconsistency(std::string(a) + " holds but " + b +
                                  " fails at tolerance " + std::to_string(tol));
  };
  implies("strongly_kahler", "kahler");
  implies("kahler", "weakly_kahler");
  implies("berwald", "landsberg");
  implies("strongly_berwald", "berwald");
  implies("strongly_berwald", "kahler");
  if (z_only != v.at("berwald"))
    throw InternalInconsistency(
        "H^i_{jk}(z)-only and N-holomorphic verdicts disagree");
  if (v.at("landsberg") && v.at("weakly_kahler") && !v.at("kahler"))
    throw InternalInconsistency(
        "Landsberg + weakly-Kahler should imply Kahler");

  return rep;
}

}  // namespace cartan

#endif
