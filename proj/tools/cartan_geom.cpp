// cartan-geom: command-line front end for the complex Cartan geometry
// engine.  Subcommands: catalog, classify, geodesic, legendre, projective,
// flatness.  Metrics are addressed as catalog:<name> or as JSON metric
// documents (see README).
//
// Exit codes: 0 success, 2 parse error, 3 metric validation failure,
// 4 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "cartan/cartan.hpp"

namespace {

using namespace cartan;

// parses "0.1+0.2i,-0.3,1i" into complex values (constant expressions)
std::vector<cd> parse_complex_list(const std::string& text, int expect) {
  std::vector<cd> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string tok = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) {
      Expr e = parse(tok, 0);  // constants only; symbols are out of range
      out.push_back(evaluate(e, EvalContext{}));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (expect >= 0 && static_cast<int>(out.size()) != expect)
    throw Error("expected " + std::to_string(expect) +
                " comma-separated complex values, got " +
                std::to_string(out.size()));
  return out;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int run_catalog(bool as_json) {
  if (as_json) {
    json list = json::array();
    for (const auto& e : catalog())
      list.push_back(json{{"name", e.name},
                          {"n", e.n},
                          {"kind", e.randers ? "randers" : "hamiltonian"},
                          {"description", e.description}});
    print_json(json{{"schema_version", 1}, {"catalog", list}});
    return 0;
  }
  for (const auto& e : catalog())
    std::cout << e.name << "  (n=" << e.n << ", "
              << (e.randers ? "randers" : "hamiltonian") << ")\n    "
              << e.description << "\n";
  return 0;
}

int run_classify(const std::string& metric_ref, int nsamples, double tol,
                 unsigned seed, bool as_json) {
  CompiledDocument doc = resolve_metric(metric_ref);
  LoadedMetric lm = doc.as_loaded();
  auto samples = lm.sample(nsamples, seed);
  ClassificationReport rep =
      classify(lm.metric, samples, tol, thread_budget());
  if (as_json) {
    json j = to_json(rep, &samples);
    j["command"] = "classify";
    j["metric"] = metric_ref;
    print_json(j);
  } else {
    std::cout << "classification of " << metric_ref << " (" << rep.samples_used
              << " samples, tolerance " << rep.tolerance << ")\n";
    for (const auto& [k, v] : rep.verdicts)
      std::cout << "  " << k << ": " << (v ? "yes" : "no ")
                << "   residual " << rep.residuals.at(k) << " (scale "
                << rep.scales.at(k) << ")\n";
  }
  return 0;
}

int run_geodesic(const std::string& metric_ref, const std::string& z0,
                 const std::string& zeta0, double s_end, double step,
                 const std::string& kind_name, const std::string& out_path,
                 bool convergence_check, bool as_json) {
  CompiledDocument doc = resolve_metric(metric_ref);
  LoadedMetric lm = doc.as_loaded();
  GeodesicState init;
  init.z = parse_complex_list(z0, lm.metric.n());
  init.zeta = parse_complex_list(zeta0, lm.metric.n());
  GeodesicKind kind = geodesic_kind_from_string(kind_name);
  Trajectory traj =
      integrate(lm.metric, init, s_end, step, kind, lm.admissibility());
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) throw Error("cannot write '" + out_path + "'");
    write_trajectory_csv(os, traj, lm.metric);
  }

  double order = 0.0;
  bool have_order = false, exact = false;
  if (convergence_check) {
    auto endpoint = [&](double h) {
      return integrate(lm.metric, init, s_end, h, kind, lm.admissibility())
          .states.back();
    };
    const GeodesicState ref = endpoint(step / 20.0);
    auto err = [&](const GeodesicState& s) {
      double e = 0;
      for (int k = 0; k < lm.metric.n(); ++k)
        e = std::max(e, std::abs(s.z[k] - ref.z[k]));
      return e;
    };
    const double e1 = err(traj.states.back());
    const double e2 = err(endpoint(step / 2.0));
    if (e1 < 1e-14 || e2 < 1e-14) {
      exact = true;
    } else {
      order = std::log2(e1 / e2);
      have_order = true;
    }
  }

  if (as_json) {
    json j = to_json(traj, metric_ref);
    if (have_order) j["convergence_order"] = order;
    if (exact) j["convergence_order"] = "exact";
    print_json(j);
  } else {
    std::cout << "integrated " << traj.states.size() - 1 << " steps of "
              << to_string(kind) << "; H(0) = " << traj.initial_h
              << ", conservation drift = " << traj.conservation_drift << "\n";
    if (kind == GeodesicKind::SecondOrder_2_11)
      std::cout << "first- vs second-order deviation = "
                << traj.second_order_deviation << "\n";
    if (have_order)
      std::cout << "measured convergence order (step halving) = " << order
                << "\n";
    if (exact)
      std::cout << "measured convergence order (step halving) = exact "
                   "(endpoint error below 1e-14)\n";
    if (!out_path.empty()) std::cout << "trajectory written to " << out_path << "\n";
  }
  return 0;
}

int run_legendre(const std::string& metric_ref, const std::string& dual_ref,
                 const std::string& z0, const std::string& eta0, bool verify,
                 bool as_json) {
  CompiledDocument doc = resolve_metric(metric_ref);
  if (doc.finsler) {
    const FinslerMetric& f = *doc.finsler;
    EvalContext p;
    p.z = parse_complex_list(z0, f.n());
    p.zeta = parse_complex_list(eta0, f.n());
    Vec zeta = forward_legendre(f, p);
    Vec eta_back = invert_forward(f, p.z, zeta);
    double roundtrip = 0.0;
    for (int k = 0; k < f.n(); ++k)
      roundtrip = std::max(roundtrip, std::abs(eta_back[k] - p.zeta[k]));
    const double dual_h = dual_metric_value(f, p.z, zeta);

    json j{{"schema_version", 1},
           {"command", "legendre"},
           {"metric", metric_ref},
           {"zeta", to_json(zeta)},
           {"dual_h", dual_h},
           {"lagrangian_value", f.value(p)},
           {"roundtrip_error", roundtrip}};
    if (!dual_ref.empty()) {
      // verify against an explicitly supplied Cartan metric
      CompiledDocument dual = resolve_metric(dual_ref);
      DualityReport dr = duality_condition(f, dual.as_loaded().metric, p);
      j["dual_metric"] = dual_ref;
      j["gh1_residual"] = dr.gh1_residual;
      j["sym_transfer"] = dr.sym_transfer;
      j["mixed_transfer"] = dr.mixed_transfer;
      j["z_gradient_sign"] = dr.z_gradient_sign;
      if (verify && dr.gh1_residual > 1e-6)
        throw DegenerateHessian(dr.gh1_residual);
    }
    if (as_json) print_json(j);
    else {
      std::cout << "zeta = " << j["zeta"].dump() << "\ndual H = " << dual_h
                << " (L = " << f.value(p) << ")\nroundtrip error = "
                << roundtrip << "\n";
      if (j.contains("gh1_residual"))
        std::cout << "G H1 residual vs " << dual_ref << " = "
                  << j["gh1_residual"].get<double>() << "\n";
    }
    return 0;
  }

  // Cartan side: nonholonomic frame + dualizability at a point
  LoadedMetric lm = doc.as_loaded();
  EvalContext p;
  if (z0.empty()) {
    p = lm.sample(1, 7).front();
  } else {
    p.z = parse_complex_list(z0, lm.metric.n());
    p.zeta = parse_complex_list(eta0, lm.metric.n());
  }
  HessianPair hp = nonholonomic_frame(lm.metric, p);  // throws on failure
  Vec eta = inverse_legendre(lm.metric, p);
  json j{{"schema_version", 1},
         {"command", "legendre"},
         {"metric", metric_ref},
         {"eta", to_json(eta)},
         {"frame_residual", hp.frame_residual},
         {"condition_residual", hp.condition_residual}};
  if (as_json) print_json(j);
  else
    std::cout << "eta = " << j["eta"].dump()
              << "\nnonholonomic frame residual = " << hp.frame_residual
              << "\ncondition residual = " << hp.condition_residual << "\n";
  return 0;
}

int run_projective(const std::string& ref_a, const std::string& ref_b,
                   int nsamples, double tol, unsigned seed, bool as_json) {
  CompiledDocument da = resolve_metric(ref_a);
  CompiledDocument db = resolve_metric(ref_b);
  LoadedMetric a = da.as_loaded();
  LoadedMetric b = db.as_loaded();
  if (a.metric.n() != b.metric.n())
    throw Error("projective: metrics have different dimension");
  // sample where both metrics are admissible (box from A, both constraints)
  const auto admit_a = a.admissibility();
  const auto admit_b = b.admissibility();
  auto samples = sample_points(
      a.domain, nsamples, seed,
      [&](const EvalContext& c) { return admit_a(c) && admit_b(c); });
  ProjectiveReport rep = projective_residual(a.metric, b.metric, samples, tol);
  if (as_json) {
    json j = to_json(rep);
    j["command"] = "projective";
    j["metric_a"] = ref_a;
    j["metric_b"] = ref_b;
    print_json(j);
  } else {
    std::cout << "projectively related: " << (rep.verdict ? "yes" : "no")
              << "\n  collinearity residual = " << rep.residual
              << "\n  Q real-homogeneity residual = " << rep.homogeneity_residual
              << "\n  Q (0,1)-homogeneity residual = "
              << rep.conj_homogeneity_residual
              << "\n  B decomposition residual = "
              << rep.B_decomposition_residual << "\n  max |B_k| = " << rep.B_norm
              << "\n";
  }
  return 0;
}

int run_flatness(const std::string& metric_ref, int nsamples, double tol,
                 unsigned seed, bool as_json) {
  CompiledDocument doc = resolve_metric(metric_ref);
  LoadedMetric lm = doc.as_loaded();
  auto samples = lm.sample(nsamples, seed);
  auto [verdict, r_theta, r_q] = flatness_test(lm.metric, samples, tol);
  if (as_json) {
    print_json(json{{"schema_version", 1},
                    {"command", "flatness"},
                    {"metric", metric_ref},
                    {"verdict", verdict},
                    {"theta_residual", r_theta},
                    {"q_residual", r_q},
                    {"tolerance", tol},
                    {"samples_used", nsamples}});
  } else {
    std::cout << "locally projectively flat: " << (verdict ? "yes" : "no")
              << "  (theta residual " << r_theta << ", Q residual " << r_q
              << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"complex Cartan geometry engine"};
  app.require_subcommand(1);

  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable JSON output");

  auto* cat = app.add_subcommand("catalog", "list built-in metrics");

  std::string metric_ref, metric_ref_b;
  int nsamples = 64;
  double tol = 1e-6;
  unsigned seed = 0;

  auto* cls = app.add_subcommand("classify", "classify a metric");
  cls->add_option("metric", metric_ref, "catalog:<name> or metric file")
      ->required();
  cls->add_option("--samples", nsamples, "number of sample points");
  cls->add_option("--tol", tol, "verdict tolerance");
  cls->add_option("--seed", seed, "sampling seed");

  std::string z0, zeta0, kind = "hamilton_jacobi", out_path;
  double s_end = 1.0, step = 1e-3;
  bool convergence_check = false;
  auto* geo = app.add_subcommand("geodesic", "integrate a geodesic");
  geo->add_option("metric", metric_ref, "catalog:<name> or metric file")
      ->required();
  geo->add_option("--z0", z0, "initial z, comma-separated complex")->required();
  geo->add_option("--zeta0", zeta0, "initial zeta")->required();
  geo->add_option("--s-end", s_end, "parameter end");
  geo->add_option("--step", step, "RK4 step");
  geo->add_option("--kind", kind,
                  "general | weakly_kahler | hamilton_jacobi | second_order");
  geo->add_option("--out", out_path, "CSV output path");
  geo->add_flag("--convergence-check", convergence_check,
                "measure the RK4 order by step halving");

  bool verify = false;
  std::string dual_ref;
  auto* leg = app.add_subcommand("legendre", "Legendre transform / duality");
  leg->add_option("metric", metric_ref, "finsler document or cartan metric")
      ->required();
  leg->add_option("--z0", z0, "point: z values");
  leg->add_option("--eta0", zeta0, "point: eta (or zeta) values");
  leg->add_option("--dual", dual_ref, "cartan metric to verify duality against");
  leg->add_flag("--verify", verify, "fail (exit 4) when duality is violated");

  auto* proj = app.add_subcommand("projective", "projective relatedness");
  proj->add_option("metric_a", metric_ref, "first metric")->required();
  proj->add_option("metric_b", metric_ref_b, "second metric")->required();
  proj->add_option("--samples", nsamples, "number of sample points");
  proj->add_option("--tol", tol, "verdict tolerance");
  proj->add_option("--seed", seed, "sampling seed");

  auto* flat = app.add_subcommand("flatness", "local projective flatness");
  flat->add_option("metric", metric_ref, "catalog:<name> or metric file")
      ->required();
  flat->add_option("--samples", nsamples, "number of sample points");
  flat->add_option("--tol", tol, "verdict tolerance");
  flat->add_option("--seed", seed, "sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cat->parsed()) return run_catalog(as_json);
    if (cls->parsed())
      return run_classify(metric_ref, nsamples, tol, seed, as_json);
    if (geo->parsed())
      return run_geodesic(metric_ref, z0, zeta0, s_end, step, kind, out_path,
                          convergence_check, as_json);
    if (leg->parsed())
      return run_legendre(metric_ref, dual_ref, z0, zeta0, verify, as_json);
    if (proj->parsed())
      return run_projective(metric_ref, metric_ref_b, nsamples, tol, seed,
                            as_json);
    if (flat->parsed())
      return run_flatness(metric_ref, nsamples, tol, seed, as_json);
  } catch (const cartan::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const cartan::ValidationError& e) {
    std::cerr << "metric validation failed: " << e.what() << "\n";
    return 3;
  } catch (const cartan::DomainExit& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const cartan::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
