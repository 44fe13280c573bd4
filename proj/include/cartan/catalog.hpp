#ifndef CARTAN_CATALOG_HPP
#define CARTAN_CATALOG_HPP

// Built-in metric catalog.  Every entry carries its own sampling domain;
// tests and the CLI address them as catalog:<name>.

#include <optional>

#include "cartan/randers.hpp"
#include "cartan/sampling.hpp"

namespace cartan {

struct CatalogEntry {
  std::string name;
  std::string description;
  int n{2};
  bool randers{false};
  std::string hamiltonian;                       // when !randers
  std::vector<std::vector<std::string>> a_up;    // when randers
  std::vector<std::string> b_low;
  Domain domain;
  double beta_floor{1e-3};  // sampling floor; evaluation floor stays 1e-12
};

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> v;

    {
      CatalogEntry e;
      e.name = "euclidean";
      e.description = "flat Hermitian metric |zeta|^2 on C^2";
      e.n = 2;
      e.hamiltonian = "p[1]*pb[1] + p[2]*pb[2]";
      e.domain = Domain::standard(2);
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "hermitian-exp";
      e.description = "purely Hermitian exponential-weight metric on C^2";
      e.n = 2;
      e.hamiltonian =
          "exp(z[1]+zb[1])*p[1]*pb[1] + exp(z[2]+zb[2])*p[2]*pb[2]";
      e.domain = Domain::standard(2);
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "example-4.2";
      e.description =
          "Randers metric with exponential Hermitian part and beta = "
          "exp(z2) zeta_2 on C^2";
      e.n = 2;
      e.randers = true;
      e.a_up = {{"exp(z[1]+zb[1])", "0"}, {"0", "exp(z[2]+zb[2])"}};
      e.b_low = {"0", "exp(-z[2])"};
      e.domain = Domain::standard(2);
      e.domain.zeta_component_floor = 0.08;
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "example-4.1";
      e.description =
          "Randers metric on the nested-disk domain |z2| < |z1| < 1";
      e.n = 2;
      e.randers = true;
      // b^1 = z2/(|z1|^2-|z2|^2), b^2 = -z1/(|z1|^2-|z2|^2);
      // a_up is the Hermitian completion of the listed upper entries.
      e.a_up = {
          {"1/(1-z[1]*zb[1])^2 + z[2]*zb[2]/(z[1]*zb[1]-z[2]*zb[2])^2",
           "-z[1]*zb[2]/(z[1]*zb[1]-z[2]*zb[2])^2"},
          {"-zb[1]*z[2]/(z[1]*zb[1]-z[2]*zb[2])^2",
           "z[1]*zb[1]/(z[1]*zb[1]-z[2]*zb[2])^2"}};
      e.b_low = {"0", "-(z[1]*zb[1]-z[2]*zb[2])/z[1]"};
      e.domain = Domain::standard(2);
      for (auto& iv : e.domain.z_re) iv = {-0.65, 0.65};
      for (auto& iv : e.domain.z_im) iv = {-0.65, 0.65};
      e.domain.constraint = "0.12<|z2|<|z1|<0.88";
      e.domain.constraint_margin = 0.1;
      e.beta_floor = 5e-3;
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "iv9-sigma-quadratic";
      e.description =
          "quartic-root metric exp(2 sigma) (|zeta1|^4+|zeta2|^4)^(1/2) with "
          "sigma = |z1|^2 + |z2|^2";
      e.n = 2;
      e.hamiltonian =
          "exp(2*(z[1]*zb[1]+z[2]*zb[2])) * "
          "sqrt((p[1]*pb[1])^2 + (p[2]*pb[2])^2)";
      e.domain = Domain::standard(2);
      for (auto& iv : e.domain.z_re) iv = {-0.8, 0.8};
      for (auto& iv : e.domain.z_im) iv = {-0.8, 0.8};
      e.domain.zeta_component_floor = 0.2;
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "iv9-sigma0";
      e.description = "locally Minkowski quartic-root metric (sigma = 0)";
      e.n = 2;
      e.hamiltonian = "sqrt((p[1]*pb[1])^2 + (p[2]*pb[2])^2)";
      e.domain = Domain::standard(2);
      e.domain.zeta_component_floor = 0.2;
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "randers-generalized-n";
      e.description =
          "generalized exponential Randers family on C^3 with beta = "
          "sum_k exp(zk) zeta_k";
      e.n = 3;
      e.randers = true;
      e.a_up = {{"exp(z[1]+zb[1])", "0", "0"},
                {"0", "exp(z[2]+zb[2])", "0"},
                {"0", "0", "exp(z[3]+zb[3])"}};
      e.b_low = {"exp(-z[1])", "exp(-z[2])", "exp(-z[3])"};
      e.domain = Domain::standard(3);
      v.push_back(e);
    }
    return v;
  }();
  return entries;
}

inline const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw Error("unknown catalog metric '" + name + "'");
}

// A compiled catalog metric: the validated CartanMetric plus (for Randers
// entries) the closed-form geometry, plus its sampling domain.
struct LoadedMetric {
  std::string name;
  CartanMetric metric;
  std::optional<RandersGeometry> randers;
  Domain domain;
  double beta_floor{1e-3};

  // chart membership: domain constraints plus (for Randers data) the
  // beta floor and gamma sign; used by samplers and the geodesic integrator
  std::function<bool(const EvalContext&)> admissibility() const {
    const Domain dom = domain;
    if (randers) {
      // own a copy so the predicate outlives this LoadedMetric
      auto g = std::make_shared<const RandersGeometry>(*randers);
      const double floor = beta_floor;
      return [dom, g, floor](const EvalContext& c) {
        if (!detail::constraint_holds(dom.constraint, c, dom.constraint_margin))
          return false;
        try {
          return g->at(c, floor).gamma > 0.0;
        } catch (const Error&) {
          return false;
        }
      };
    }
    const CartanMetric m = metric;
    return [dom, m](const EvalContext& c) {
      if (!detail::constraint_holds(dom.constraint, c, dom.constraint_margin))
        return false;
      try {
        (void)m.value(c);
        return true;
      } catch (const Error&) {
        return false;
      }
    };
  }

  std::vector<EvalContext> sample(int count, unsigned seed) const {
    if (randers) {
      const RandersGeometry& g = *randers;
      double floor = beta_floor;
      return sample_points(domain, count, seed, [&g, floor](const EvalContext& c) {
        try {
          RandersPoint p = g.at(c, floor);
          return p.gamma > 0.0;
        } catch (const Error&) {
          return false;
        }
      });
    }
    return sample_points(domain, count, seed, [this](const EvalContext& c) {
      try {
        (void)metric.value(c);
        return true;
      } catch (const Error&) {
        return false;
      }
    });
  }
};

inline LoadedMetric load_catalog_metric(const std::string& name,
                                        int validation_samples = 64,
                                        unsigned seed = 0) {
  const CatalogEntry& e = catalog_entry(name);
  if (e.randers) {
    RandersGeometry g(RandersSpec::from_strings(e.n, e.a_up, e.b_low));
    auto pts = sample_points(e.domain, validation_samples, seed,
                             [&](const EvalContext& c) {
                               try {
                                 return g.at(c, e.beta_floor).gamma > 0.0;
                               } catch (const Error&) {
                                 return false;
                               }
                             });
    CartanMetric m = build_metric(g, pts, e.beta_floor);
    return LoadedMetric{e.name, std::move(m), std::move(g), e.domain,
                        e.beta_floor};
  }
  CartanMetric m = CartanMetric::compile(parse(e.hamiltonian, e.n), e.n);
  auto pts = sample_points(e.domain, validation_samples, seed,
                           [&](const EvalContext& c) {
                             try {
                               (void)m.value(c);
                               return true;
                             } catch (const Error&) {
                               return false;
                             }
                           });
  validate_compiled(m, pts);
  return LoadedMetric{e.name, std::move(m), std::nullopt, e.domain,
                      e.beta_floor};
}

}  // namespace cartan

#endif
