#ifndef CARTAN_JSON_IO_HPP
#define CARTAN_JSON_IO_HPP

// JSON / CSV serialization of reports.  All reports carry a
// schema_version field; nlohmann::ordered_json keeps key order (and so
// byte output) deterministic for a fixed seed.

#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "cartan/classify.hpp"
#include "cartan/geodesic.hpp"
#include "cartan/legendre.hpp"
#include "cartan/projective.hpp"

namespace cartan {

using json = nlohmann::ordered_json;

inline json to_json(const cd& v) { return json::array({v.real(), v.imag()}); }

inline json to_json(const std::vector<cd>& v) {
  json a = json::array();
  for (const cd& x : v) a.push_back(to_json(x));
  return a;
}

inline json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(to_json(v[i]));
  return a;
}

// row-major matrix of [re, im] pairs
inline json to_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const EvalContext& ctx) {
  return json{{"z", to_json(ctx.z)}, {"zeta", to_json(ctx.zeta)}};
}

inline json to_json(const MetricFrame& f) {
  return json{{"point", to_json(f.point)},
              {"h_up", to_json(f.h_up)},
              {"h_down", to_json(f.h_down)},
              {"h_sym", to_json(f.h_sym)},
              {"zeta_up", to_json(f.zeta_up)},
              {"condition", f.condition}};
}

inline json to_json(const ClassificationReport& r,
                    const std::vector<EvalContext>* samples = nullptr) {
  json j{{"schema_version", 1},
         {"tolerance", r.tolerance},
         {"samples_used", r.samples_used}};
  json res = json::object(), sc = json::object(), ver = json::object();
  for (const auto& [k, v] : r.residuals) res[k] = v;
  for (const auto& [k, v] : r.scales) sc[k] = v;
  for (const auto& [k, v] : r.verdicts) ver[k] = v;
  j["residuals"] = res;
  j["scales"] = sc;
  j["verdicts"] = ver;
  if (samples) {
    json pts = json::array();
    for (const auto& s : *samples) pts.push_back(to_json(s));
    j["samples"] = pts;
  }
  return j;
}

inline json to_json(const ProjectiveReport& r) {
  json qs = json::array();
  for (const auto& q : r.q_samples)
    qs.push_back(json{{"point", to_json(q.point)}, {"Q", to_json(q.Q)}});
  return json{{"schema_version", 1},
              {"verdict", r.verdict},
              {"tolerance", r.tolerance},
              {"samples_used", r.samples_used},
              {"residual", r.residual},
              {"homogeneity_residual", r.homogeneity_residual},
              {"conj_homogeneity_residual", r.conj_homogeneity_residual},
              {"B_decomposition_residual", r.B_decomposition_residual},
              {"B_norm", r.B_norm},
              {"Q_samples", qs}};
}

inline json to_json(const DualityReport& r) {
  return json{{"schema_version", 1},
              {"zeta", to_json(r.zeta)},
              {"gh1_residual", r.gh1_residual},
              {"sym_transfer", r.sym_transfer},
              {"mixed_transfer", r.mixed_transfer},
              {"z_gradient_sign", r.z_gradient_sign}};
}

inline json trajectory_meta(const Trajectory& t, const std::string& metric_id) {
  return json{{"schema_version", 1},
              {"metric", metric_id},
              {"kind", to_string(t.kind)},
              {"step", t.step},
              {"initial_h", t.initial_h},
              {"conservation_drift", t.conservation_drift},
              {"second_order_deviation", t.second_order_deviation},
              {"states", t.states.size()}};
}

inline json to_json(const Trajectory& t, const std::string& metric_id) {
  json j = trajectory_meta(t, metric_id);
  json states = json::array();
  for (const auto& s : t.states)
    states.push_back(json{{"s", s.s}, {"z", to_json(s.z)}, {"zeta", to_json(s.zeta)}});
  j["states"] = states;
  return j;
}

// CSV columns: s, Re/Im of each z^k and zeta_k, H(s)
inline void write_trajectory_csv(std::ostream& os, const Trajectory& t,
                                 const CartanMetric& m) {
  const int n = t.states.empty() ? 0 : static_cast<int>(t.states[0].z.size());
  os << "s";
  for (int k = 1; k <= n; ++k) os << ",re_z" << k << ",im_z" << k;
  for (int k = 1; k <= n; ++k) os << ",re_zeta" << k << ",im_zeta" << k;
  os << ",H\n";
  os << std::setprecision(17);
  for (const auto& s : t.states) {
    os << s.s;
    for (int k = 0; k < n; ++k)
      os << "," << s.z[k].real() << "," << s.z[k].imag();
    for (int k = 0; k < n; ++k)
      os << "," << s.zeta[k].real() << "," << s.zeta[k].imag();
    os << "," << m.value(EvalContext{s.z, s.zeta}) << "\n";
  }
}

}  // namespace cartan

#endif
