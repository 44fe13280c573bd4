#include "helpers.hpp"

using namespace ct;

TEST_CASE("validation accepts the flat metric with identity tensor", "[metric]") {
  Domain d = Domain::standard(2);
  auto pts = sample_points(d, 16, 1);
  CartanMetric m = validate_metric(parse("p[1]*pb[1]+p[2]*pb[2]", 2), 2, pts);
  for (const auto& c : pts) {
    MetricFrame f = m.frame(c);
    CHECK(max_abs(Mat(f.h_up - Mat::Identity(2, 2))) < 1e-14);
    CHECK(max_abs(Mat(f.h_down - Mat::Identity(2, 2))) < 1e-14);
    CHECK(max_abs(f.h_sym) < 1e-14);
    for (int k = 0; k < 2; ++k)
      CHECK(std::abs(f.zeta_up[k] - std::conj(c.zeta[k])) < 1e-14);
  }
}

TEST_CASE("validation accepts the catalog Randers metrics", "[metric]") {
  // loading runs the full validation on 64 quasi-random samples
  CHECK_NOTHROW(fixture("example-4.2"));
  CHECK_NOTHROW(fixture("example-4.1"));
  CHECK_NOTHROW(fixture("randers-generalized-n"));
}

TEST_CASE("validation rejects a non-homogeneous function", "[metric]") {
  // Re(zeta_1^2): mixed Hessian vanishes identically
  Expr H = parse("(p[1]^2 + pb[1]^2)/2", 1);
  Domain d = Domain::standard(1);
  auto pts = sample_points(d, 8, 1);
  try {
    validate_metric(H, 1, pts);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK((e.kind == ValidationError::Kind::NotHomogeneous ||
           e.kind == ValidationError::Kind::NotPositiveDefinite));
    CHECK(e.sample_index == 0);
  }
}

TEST_CASE("validation rejects non-real and indefinite data", "[metric]") {
  Domain d = Domain::standard(1);
  auto pts = sample_points(d, 8, 2);
  CHECK_THROWS_AS(validate_metric(parse("p[1]*pb[1] + 0.5i*p[1]*pb[1]", 1), 1, pts),
                  ValidationError);
  Domain d2 = Domain::standard(2);
  auto pts2 = sample_points(d2, 8, 2);
  CHECK_THROWS_AS(
      validate_metric(parse("p[1]*pb[1] - p[2]*pb[2]", 2), 2, pts2),
      ValidationError);
}

TEST_CASE("purely Hermitian frame at the origin", "[metric]") {
  const LoadedMetric& m = fixture("hermitian-exp");
  MetricFrame f = m.metric.frame(pt2(0, 0, cd(0.7, 0.2), cd(-0.3, 0.5)));
  CHECK(max_abs(Mat(f.h_up - Mat::Identity(2, 2))) < 1e-14);
  CHECK(max_abs(f.h_sym) < 1e-14);
}

TEST_CASE("frame inverse is exact to tolerance on the disk metric", "[metric]") {
  const LoadedMetric& m = fixture("example-4.1");
  for (const auto& c : m.sample(10, 3)) {
    MetricFrame f = m.metric.frame(c);
    CHECK(max_abs(Mat(f.h_down * f.h_up - Mat::Identity(2, 2))) < 1e-9);
    CHECK(hermiticity_residual(f.h_up) < 1e-9 * (1 + max_abs(f.h_up)));
  }
}

TEST_CASE("raise_index round-trips and scales by the conjugate factor",
          "[metric]") {
  const LoadedMetric& m = fixture("example-4.2");
  EvalContext c = pt2(0, 0, cd(0.8, -0.1), cd(1.2, 0.4));
  MetricFrame f = m.metric.frame(c);
  Vec zup = raise_index(f);

  // contracting zeta^j with h_down returns conj(zeta)
  Vec back = f.h_down.transpose() * zup;
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(back[k] - std::conj(c.zeta[k])) < 1e-10);

  for (cd lambda : {cd(2, 0), cd(1, 1)}) {
    EvalContext cs = c;
    for (auto& q : cs.zeta) q *= lambda;
    Vec zs = raise_index(m.metric.frame(cs));
    for (int k = 0; k < 2; ++k)
      CHECK(std::abs(zs[k] - std::conj(lambda) * zup[k]) <
            1e-10 * (1 + std::abs(zup[k])));
  }

  // zeta^k also equals dH/dzeta_k (Euler)
  Vec g = m.metric.grad_zeta(c);
  for (int k = 0; k < 2; ++k) CHECK(std::abs(g[k] - zup[k]) < 1e-12);
}

TEST_CASE("Euler and homogeneity identities on the catalog", "[metric][property]") {
  for (const char* name :
       {"euclidean", "hermitian-exp", "example-4.2", "example-4.1",
        "iv9-sigma-quadratic", "iv9-sigma0", "randers-generalized-n"}) {
    const LoadedMetric& lm = fixture(name);
    const int n = lm.metric.n();
    double worst_euler = 0, worst_tensor = 0, worst_pair = 0, worst_scale = 0;
    for (const auto& c : lm.sample(30, 9)) {
      const double H = lm.metric.value(c);
      Vec g = lm.metric.grad_zeta(c);
      cd euler(-H, 0);
      for (int k = 0; k < n; ++k) euler += g[k] * c.zeta[k];
      worst_euler = std::max(worst_euler, std::abs(euler) / (1 + H));

      MetricFrame f = lm.metric.frame(c);
      // H = h^{jbar i} zeta_jbar zeta_i
      cd pair(0, 0);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          pair += f.h_up(j, i) * std::conj(c.zeta[j]) * c.zeta[i];
      worst_pair = std::max(worst_pair, std::abs(pair - cd(H, 0)) / (1 + H));

      // h_up is (0,0)-homogeneous
      EvalContext cs = c;
      for (auto& q : cs.zeta) q *= cd(1.3, -0.7);
      MetricFrame fs = lm.metric.frame(cs);
      worst_scale = std::max(
          worst_scale, max_abs(Mat(fs.h_up - f.h_up)) / (1 + max_abs(f.h_up)));

      // (d h_up / dp_k) p_k = 0 via the fibre-derivative tables
      TensorWorkspace w(lm.metric, c, TensorWorkspace::Level::Connection);
      Mat acc = Mat::Zero(n, n);
      for (int k = 0; k < n; ++k) acc += w.Up()[k] * c.zeta[k];
      worst_tensor =
          std::max(worst_tensor, max_abs(acc) / (1 + max_abs(f.h_up)));

      // h_sym is symmetric and equals (dot-p^r h^{pbar j}) zeta_pbar
      worst_tensor = std::max(
          worst_tensor, max_abs(Mat(f.h_sym - f.h_sym.transpose())) /
                            (1 + max_abs(f.h_sym)));
      Mat contracted(n, n);
      for (int j = 0; j < n; ++j)
        for (int r = 0; r < n; ++r) {
          cd s(0, 0);
          for (int p = 0; p < n; ++p)
            s += w.Up()[r](p, j) * std::conj(c.zeta[p]);
          contracted(j, r) = s;
        }
      worst_tensor =
          std::max(worst_tensor, max_abs(Mat(contracted - f.h_sym)) /
                                     (1 + max_abs(f.h_sym)));
    }
    INFO(name);
    CHECK(worst_euler < 1e-9);
    CHECK(worst_pair < 1e-9);
    CHECK(worst_scale < 1e-9);
    CHECK(worst_tensor < 1e-9);
  }
}

TEST_CASE("singular tensors trip the condition guard", "[metric]") {
  CartanMetric m =
      CartanMetric::compile(parse("p[1]*pb[1] + 1e-14*p[2]*pb[2]", 2), 2);
  CHECK_THROWS_AS(m.frame(pt2(0, 0, cd(1, 0), cd(1, 0))), SingularMetric);
}

TEST_CASE("validate_metric requires samples", "[metric]") {
  CHECK_THROWS_AS(validate_metric(parse("p[1]*pb[1]", 1), 1, {}), Error);
}

TEST_CASE("frames serialize as row-major re/im matrices", "[metric]") {
  const LoadedMetric& m = fixture("hermitian-exp");
  EvalContext c = pt2(cd(0.2, -0.1), cd(0.3, 0.4), cd(1, 0), cd(0, 1));
  json j = to_json(m.metric.frame(c));
  REQUIRE(j["h_up"].size() == 2);
  REQUIRE(j["h_up"][0].size() == 2);
  REQUIRE(j["h_up"][0][0].size() == 2);  // [re, im]
  const double re = j["h_up"][0][0][0].get<double>();
  CHECK(re == Catch::Approx(std::exp(0.4)));
  CHECK(j["h_up"][0][1][0].get<double>() == Catch::Approx(0.0).margin(1e-14));
  CHECK(j.contains("zeta_up"));
  CHECK(j.contains("condition"));
}
