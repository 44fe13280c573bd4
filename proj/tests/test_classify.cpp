#include "helpers.hpp"

using namespace ct;

TEST_CASE("flat metric is everything", "[classify]") {
  const LoadedMetric& m = fixture("euclidean");
  ClassificationReport r = classify(m.metric, m.sample(16, 1));
  for (const auto& [key, verdict] : r.verdicts) {
    INFO(key);
    CHECK(verdict);
  }
}

TEST_CASE("exponential Randers metric is strongly Berwald and Kahler",
          "[classify]") {
  const LoadedMetric& m = fixture("example-4.2");
  ClassificationReport r = classify(m.metric, m.sample(16, 1));
  CHECK(r.verdicts.at("berwald"));
  CHECK(r.verdicts.at("strongly_berwald"));
  CHECK(r.verdicts.at("kahler"));
  CHECK(r.verdicts.at("weakly_kahler"));
  CHECK(r.verdicts.at("landsberg"));
}

TEST_CASE("disk Randers metric is Berwald but not strongly Berwald",
          "[classify]") {
  const LoadedMetric& m = fixture("example-4.1");
  ClassificationReport r = classify(m.metric, m.sample(16, 1));
  CHECK(r.verdicts.at("berwald"));
  CHECK(r.verdicts.at("landsberg"));
  CHECK_FALSE(r.verdicts.at("strongly_berwald"));
  CHECK_FALSE(r.verdicts.at("kahler"));
  CHECK_FALSE(r.verdicts.at("weakly_kahler"));
  // raw residuals are carried for re-thresholding
  CHECK(r.residuals.at("kahler") > 1e-2);
  CHECK(r.residuals.at("berwald") < 1e-10);
}

TEST_CASE("quartic-root and generalized families", "[classify]") {
  ClassificationReport r9 = classify(fixture("iv9-sigma-quadratic").metric,
                                     fixture("iv9-sigma-quadratic").sample(12, 2));
  CHECK(r9.verdicts.at("berwald"));
  CHECK(r9.verdicts.at("landsberg"));

  ClassificationReport rg = classify(fixture("randers-generalized-n").metric,
                                     fixture("randers-generalized-n").sample(12, 2));
  CHECK(rg.verdicts.at("strongly_berwald"));
  CHECK(rg.verdicts.at("kahler"));
}

TEST_CASE("perturbed disk metric stops being Berwald", "[classify]") {
  RandersGeometry g = perturbed_41();
  const LoadedMetric& base = fixture("example-4.1");
  auto pts = sample_points(base.domain, 12, 3, [&](const EvalContext& c) {
    try {
      return g.at(c, 5e-3).gamma > 0.0;
    } catch (const Error&) {
      return false;
    }
  });
  CartanMetric m = build_metric(g, pts, 5e-3);
  double worst = 0;
  for (const auto& c : pts)
    worst = std::max(worst, berwald_residual(m, c));
  CHECK(worst > 1e-3);

  // cross-oracle: the closed-form criterion agrees
  double crit = 0;
  for (const auto& c : pts)
    crit = std::max(crit, g.berwald_criterion(g.at(c), c).first);
  CHECK(crit > 1e-3);

  ClassificationReport r = classify(m, pts);
  CHECK_FALSE(r.verdicts.at("berwald"));
  CHECK_FALSE(r.verdicts.at("strongly_berwald"));
}

TEST_CASE("implication chain is asserted on every report", "[classify][property]") {
  for (const char* name :
       {"euclidean", "hermitian-exp", "example-4.2", "example-4.1",
        "iv9-sigma-quadratic", "iv9-sigma0"}) {
    const LoadedMetric& m = fixture(name);
    ClassificationReport r = classify(m.metric, m.sample(12, 5));
    const auto& v = r.verdicts;
    INFO(name);
    CHECK((!v.at("strongly_kahler") || v.at("kahler")));
    CHECK((!v.at("kahler") || v.at("weakly_kahler")));
    CHECK((!v.at("berwald") || v.at("landsberg")));
    CHECK((!v.at("strongly_berwald") ||
           (v.at("berwald") && v.at("weakly_kahler") && v.at("kahler"))));
  }
}

TEST_CASE("Berwald-Landsberg identity at the tensor level",
          "[classify][property]") {
  // (dpb^i N_{ks}) zeta^s = dpb^i[(N_{ks}-N_{sk}) zeta^s] - (N_{ks}-N_{sk}) h^{ibar s}
  for (const char* name : {"example-4.1", "example-4.2", "iv9-sigma-quadratic"}) {
    const LoadedMetric& m = fixture(name);
    double worst = 0;
    for (const auto& c : m.sample(10, 29)) {
      TensorWorkspace w(m.metric, c, TensorWorkspace::Level::Deep);
      worst = std::max(worst,
                       bgamma_identity_residual(w) / (1 + max_abs(w.N())));
    }
    INFO(name);
    CHECK(worst < 1e-7);
  }
}

TEST_CASE("identities survive on genuinely non-Landsberg data",
          "[classify][property]") {
  // the perturbed disk metric has nonzero Berwald and Landsberg blocks,
  // which makes the structural identities a much sharper cross-check
  RandersGeometry g = perturbed_41();
  const LoadedMetric& base = fixture("example-4.1");
  auto pts = sample_points(base.domain, 8, 3, [&](const EvalContext& c) {
    try {
      return g.at(c, 5e-3).gamma > 0.0;
    } catch (const Error&) {
      return false;
    }
  });
  CartanMetric m = build_metric(g, pts, 5e-3);
  double landsberg = 0;
  for (const auto& c : pts) {
    TensorWorkspace w(m, c, TensorWorkspace::Level::Deep);
    const double scale = 1 + max_abs(w.N());
    landsberg = std::max(landsberg, w.landsberg_residual() / scale);
    CHECK(bgamma_identity_residual(w) / scale < 1e-8);
    CHECK(w.bgamma_contraction_residual() / scale < 1e-8);
    CHECK(w.compat_residual() / (1 + max_abs(w.U())) < 1e-8);
  }
  CHECK(landsberg > 1e-3);  // not Landsberg either
}

TEST_CASE("classification needs at least 8 samples", "[classify]") {
  const LoadedMetric& m = fixture("euclidean");
  CHECK_THROWS_AS(classify(m.metric, m.sample(4, 1)), Error);
}

TEST_CASE("parallel classification is deterministic", "[classify]") {
  const LoadedMetric& m = fixture("example-4.1");
  auto pts = m.sample(16, 31);
  ClassificationReport a = classify(m.metric, pts, 1e-6, 1);
  ClassificationReport b = classify(m.metric, pts, 1e-6, 4);
  CHECK(a.residuals == b.residuals);
  CHECK(a.verdicts == b.verdicts);
}
