#ifndef CARTAN_GEODESIC_HPP
#define CARTAN_GEODESIC_HPP

// Complex geodesic curves of a Cartan metric.  Four right-hand sides:
//
//   general:         dz^k/ds = zeta^k,  dzeta_k/ds = N_{jk} zeta^j + h_{jk} Theta*^j
//   weakly_kahler:   the same with the Theta* source dropped
//   hamilton_jacobi: dz^k/ds = dH/dzeta_k,  dzeta_k/ds = -d*H/dz^k
//   second_order:    d^2 z^k/ds^2 + H^k_{jl} zeta^j zeta^l = Theta*^k,
//                    zeta recovered from dz/ds each stage
//
// Fixed-step classical RK4; H is recorded along the way and the drift is
// reported, never hidden.

#include <cmath>
#include <functional>

#include "cartan/connection.hpp"

namespace cartan {

enum class GeodesicKind {
  General_2_8,
  WeaklyKahler_2_9,
  HamiltonJacobi_2_10,
  SecondOrder_2_11
};

inline const char* to_string(GeodesicKind k) {
  switch (k) {
    case GeodesicKind::General_2_8: return "general";
    case GeodesicKind::WeaklyKahler_2_9: return "weakly_kahler";
    case GeodesicKind::HamiltonJacobi_2_10: return "hamilton_jacobi";
    default: return "second_order";
  }
}

inline GeodesicKind geodesic_kind_from_string(const std::string& s) {
  if (s == "general" || s == "general_2_8") return GeodesicKind::General_2_8;
  if (s == "weakly_kahler" || s == "weakly-kahler" || s == "weakly_kahler_2_9")
    return GeodesicKind::WeaklyKahler_2_9;
  if (s == "hamilton_jacobi" || s == "hamilton-jacobi" ||
      s == "hamilton_jacobi_2_10")
    return GeodesicKind::HamiltonJacobi_2_10;
  if (s == "second_order" || s == "second-order" || s == "second_order_2_11")
    return GeodesicKind::SecondOrder_2_11;
  throw Error("unknown geodesic kind '" + s + "'");
}

struct GeodesicState {
  double s{0.0};
  std::vector<cd> z;
  std::vector<cd> zeta;
};

struct Trajectory {
  std::vector<GeodesicState> states;
  GeodesicKind kind{GeodesicKind::HamiltonJacobi_2_10};
  double conservation_drift{0.0};  // max |H(s) - H(0)|
  double initial_h{0.0};
  double step{0.0};
  // for the second-order kind: max state deviation from the first-order
  // route over the whole trajectory (the two must agree)
  double second_order_deviation{0.0};
};

inline Vec theta_star(const CartanMetric& m, const EvalContext& ctx) {
  TensorWorkspace w(m, ctx, TensorWorkspace::Level::Connection);
  return w.theta_star();
}

namespace detail {

struct Flow {
  const CartanMetric& m;
  GeodesicKind kind;

  // phase-space rhs for the first-order kinds
  void rhs(const std::vector<cd>& z, const std::vector<cd>& zeta,
           std::vector<cd>& dz, std::vector<cd>& dzeta) const {
    const int n = m.n();
    dz.resize(n);
    dzeta.resize(n);
    EvalContext ctx{z, zeta};
    if (kind == GeodesicKind::HamiltonJacobi_2_10) {
      Vec gp = m.grad_zeta(ctx);
      Vec gz = m.grad_z(ctx);
      for (int k = 0; k < n; ++k) {
        dz[k] = gp[k];
        dzeta[k] = -gz[k];
      }
      return;
    }
    TensorWorkspace w(m, ctx, TensorWorkspace::Level::Connection);
    for (int k = 0; k < n; ++k) dz[k] = w.zup()[k];
    Vec source = Vec::Zero(n);
    if (kind == GeodesicKind::General_2_8) {
      const Vec th = w.theta_star();
      const Mat A = w.A();
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) source[k] += A(j, k) * th[j];
    }
    for (int k = 0; k < n; ++k) {
      cd acc(0, 0);
      for (int j = 0; j < n; ++j) acc += w.N()(j, k) * w.zup()[j];
      dzeta[k] = acc + source[k];
    }
  }
};

inline void axpy(std::vector<cd>& y, double a, const std::vector<cd>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Recovers zeta from v^k = zeta^k = h^{mbar k} zeta_mbar by fixed-point
// iteration on the (0,0)-homogeneous tensor, seeded with the previous zeta.
inline std::vector<cd> recover_zeta(const CartanMetric& m,
                                    const std::vector<cd>& z,
                                    const std::vector<cd>& v,
                                    const std::vector<cd>& seed) {
  const int n = m.n();
  std::vector<cd> zeta = seed;
  Vec rhs(n);
  for (int k = 0; k < n; ++k) rhs[k] = v[k];
  for (int it = 0; it < 40; ++it) {
    MetricFrame f = m.frame(EvalContext{z, zeta});
    Vec zbar = f.h_up.transpose().partialPivLu().solve(rhs);
    double delta = 0.0;
    for (int k = 0; k < n; ++k) {
      cd next = std::conj(zbar[k]);
      delta = std::max(delta, std::abs(next - zeta[k]));
      zeta[k] = next;
    }
    if (delta <= 1e-13 * (1.0 + max_abs(zbar))) return zeta;
  }
  throw DomainExit(0.0, "zeta recovery did not converge");
}

}  // namespace detail

// Classical fixed-step RK4 over s in [initial.s, initial.s + s_end].
// `admissible`, when given, describes the chart (domain constraints, beta
// floors); a state outside it raises DomainExit with the last good s.
inline Trajectory integrate(
    const CartanMetric& m, const GeodesicState& initial, double s_end,
    double step, GeodesicKind kind,
    const std::function<bool(const EvalContext&)>& admissible = {}) {
  if (!(step > 0.0)) throw Error("integrate: step must be positive");
  const int n = m.n();
  Trajectory traj;
  traj.kind = kind;
  traj.step = step;
  traj.initial_h = m.value(EvalContext{initial.z, initial.zeta});

  const long nsteps = std::lround(std::ceil(s_end / step - 1e-12));
  double last_good = initial.s;
  double s_accum = initial.s;

  if (kind == GeodesicKind::SecondOrder_2_11) {
    // integrate (z, v = dz/ds), recovering zeta each stage
    std::vector<cd> z = initial.z;
    std::vector<cd> zeta = initial.zeta;
    TensorWorkspace w0(m, EvalContext{z, zeta},
                       TensorWorkspace::Level::Connection);
    std::vector<cd> v(n);
    for (int k = 0; k < n; ++k) v[k] = w0.zup()[k];
    traj.states.push_back({initial.s, z, zeta});

    auto rhs = [&](const std::vector<cd>& zz, const std::vector<cd>& vv,
                   std::vector<cd>& dz, std::vector<cd>& dv,
                   std::vector<cd>& zeta_io) {
      zeta_io = detail::recover_zeta(m, zz, vv, zeta_io);
      TensorWorkspace w(m, EvalContext{zz, zeta_io},
                        TensorWorkspace::Level::Connection);
      const Vec th = w.theta_star();
      dz = vv;
      dv.assign(n, cd(0, 0));
      for (int k = 0; k < n; ++k) {
        cd acc(0, 0);
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l)
            acc += w.Hk()[l](j, k) * w.zup()[j] * w.zup()[l];
        dv[k] = th[k] - acc;
      }
    };

    try {
      for (long i = 0; i < nsteps; ++i) {
        const double h = std::min(step, s_end - static_cast<double>(i) * step);
        std::vector<cd> k1z, k1v, k2z, k2v, k3z, k3v, k4z, k4v;
        std::vector<cd> zeta_w = zeta;
        rhs(z, v, k1z, k1v, zeta_w);
        std::vector<cd> z2 = z, v2 = v;
        detail::axpy(z2, h / 2, k1z);
        detail::axpy(v2, h / 2, k1v);
        rhs(z2, v2, k2z, k2v, zeta_w);
        std::vector<cd> z3 = z, v3 = v;
        detail::axpy(z3, h / 2, k2z);
        detail::axpy(v3, h / 2, k2v);
        rhs(z3, v3, k3z, k3v, zeta_w);
        std::vector<cd> z4 = z, v4 = v;
        detail::axpy(z4, h, k3z);
        detail::axpy(v4, h, k3v);
        rhs(z4, v4, k4z, k4v, zeta_w);
        for (int k = 0; k < n; ++k) {
          z[k] += h / 6.0 * (k1z[k] + 2.0 * k2z[k] + 2.0 * k3z[k] + k4z[k]);
          v[k] += h / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
        }
        zeta = detail::recover_zeta(m, z, v, zeta_w);
        if (admissible && !admissible(EvalContext{z, zeta}))
          throw DomainExit(last_good, "trajectory left the admissible region");
        s_accum += h;
        last_good = s_accum;
        traj.states.push_back({last_good, z, zeta});
        const double hval = m.value(EvalContext{z, zeta});
        traj.conservation_drift = std::max(traj.conservation_drift,
                                           std::abs(hval - traj.initial_h));
      }
    } catch (const DomainExit& e) {
      throw DomainExit(last_good, e.what());
    } catch (const Error& e) {
      throw DomainExit(last_good, e.what());
    }
    // cross-check against the first-order route
    Trajectory first = integrate(m, initial, s_end, step,
                                 GeodesicKind::General_2_8, admissible);
    const std::size_t count = std::min(first.states.size(), traj.states.size());
    for (std::size_t i = 0; i < count; ++i)
      for (int k = 0; k < n; ++k) {
        traj.second_order_deviation = std::max(
            traj.second_order_deviation,
            std::abs(traj.states[i].z[k] - first.states[i].z[k]));
        traj.second_order_deviation = std::max(
            traj.second_order_deviation,
            std::abs(traj.states[i].zeta[k] - first.states[i].zeta[k]));
      }
    return traj;
  }

  detail::Flow flow{m, kind};
  std::vector<cd> z = initial.z, zeta = initial.zeta;
  traj.states.push_back({initial.s, z, zeta});
  try {
    for (long i = 0; i < nsteps; ++i) {
      const double h = std::min(step, s_end - static_cast<double>(i) * step);
      std::vector<cd> k1z, k1p, k2z, k2p, k3z, k3p, k4z, k4p;
      flow.rhs(z, zeta, k1z, k1p);
      std::vector<cd> z2 = z, p2 = zeta;
      detail::axpy(z2, h / 2, k1z);
      detail::axpy(p2, h / 2, k1p);
      flow.rhs(z2, p2, k2z, k2p);
      std::vector<cd> z3 = z, p3 = zeta;
      detail::axpy(z3, h / 2, k2z);
      detail::axpy(p3, h / 2, k2p);
      flow.rhs(z3, p3, k3z, k3p);
      std::vector<cd> z4 = z, p4 = zeta;
      detail::axpy(z4, h, k3z);
      detail::axpy(p4, h, k3p);
      flow.rhs(z4, p4, k4z, k4p);
      for (int k = 0; k < n; ++k) {
        z[k] += h / 6.0 * (k1z[k] + 2.0 * k2z[k] + 2.0 * k3z[k] + k4z[k]);
        zeta[k] += h / 6.0 * (k1p[k] + 2.0 * k2p[k] + 2.0 * k3p[k] + k4p[k]);
      }
      if (admissible && !admissible(EvalContext{z, zeta}))
        throw DomainExit(last_good, "trajectory left the admissible region");
      s_accum += h;
      last_good = s_accum;
      traj.states.push_back({last_good, z, zeta});
      const double hval = m.value(EvalContext{z, zeta});
      traj.conservation_drift =
          std::max(traj.conservation_drift, std::abs(hval - traj.initial_h));
    }
  } catch (const DomainExit&) {
    throw;
  } catch (const Error& e) {
    throw DomainExit(last_good, e.what());
  }
  return traj;
}

inline void geodesic_rhs(const CartanMetric& m, const GeodesicState& state,
                         std::vector<cd>& dz, std::vector<cd>& dzeta,
                         GeodesicKind kind = GeodesicKind::General_2_8) {
  detail::Flow flow{m, kind};
  flow.rhs(state.z, state.zeta, dz, dzeta);
}

inline void hamilton_jacobi_rhs(const CartanMetric& m, const GeodesicState& state,
                                std::vector<cd>& dz, std::vector<cd>& dzeta) {
  geodesic_rhs(m, state, dz, dzeta, GeodesicKind::HamiltonJacobi_2_10);
}

}  // namespace cartan

#endif
