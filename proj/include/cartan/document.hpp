#ifndef CARTAN_DOCUMENT_HPP
#define CARTAN_DOCUMENT_HPP

// Metric documents: the JSON file format the CLI consumes, and the
// "catalog:<name>" resolution.  A document declares one metric
// (hamiltonian / finsler / randers), its dimension, a sampling domain,
// and a seed.

#include <fstream>

#include <json.hpp>

#include "cartan/catalog.hpp"
#include "cartan/legendre.hpp"

namespace cartan {

using json = nlohmann::ordered_json;

enum class DocumentKind { Hamiltonian, Finsler, Randers };

struct MetricDocument {
  DocumentKind kind{DocumentKind::Hamiltonian};
  int n{2};
  unsigned seed{0};
  double beta_floor{1e-3};
  std::string name{"metric"};
  std::string hamiltonian;                     // Hamiltonian kind
  std::string lagrangian;                      // Finsler kind
  std::vector<std::vector<std::string>> a_up;  // Randers kind
  std::vector<std::string> b_low;
  Domain domain;
};

namespace detail {
inline void read_intervals(const json& arr, std::vector<Interval>& out, int n,
                           const char* field) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != n)
    throw Error(std::string("document domain: ") + field + " must list " +
                std::to_string(n) + " [lo, hi] pairs");
  out.clear();
  for (const auto& pair : arr)
    out.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
}
}  // namespace detail

inline MetricDocument parse_document(const json& j) {
  MetricDocument d;
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1)
    throw Error("document: unsupported schema_version");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "hamiltonian") d.kind = DocumentKind::Hamiltonian;
  else if (kind == "finsler") d.kind = DocumentKind::Finsler;
  else if (kind == "randers") d.kind = DocumentKind::Randers;
  else throw Error("document: kind must be hamiltonian|finsler|randers");

  d.n = j.at("n").get<int>();
  if (d.n < 1 || d.n > 4) throw Error("document: n must be in 1..4");
  d.seed = j.value("seed", 0u);
  d.beta_floor = j.value("beta_floor", 1e-3);
  d.name = j.value("name", std::string("metric"));

  switch (d.kind) {
    case DocumentKind::Hamiltonian:
      d.hamiltonian = j.at("hamiltonian").get<std::string>();
      break;
    case DocumentKind::Finsler:
      d.lagrangian = j.at("lagrangian").get<std::string>();
      break;
    case DocumentKind::Randers: {
      const auto& a = j.at("a_up");
      const auto& b = j.at("b_low");
      if (static_cast<int>(a.size()) != d.n ||
          static_cast<int>(b.size()) != d.n)
        throw Error("document: a_up must be n x n and b_low length n");
      d.a_up.resize(d.n);
      for (int r = 0; r < d.n; ++r) {
        if (static_cast<int>(a[r].size()) != d.n)
          throw Error("document: a_up must be n x n");
        for (const auto& cell : a[r])
          d.a_up[r].push_back(cell.get<std::string>());
      }
      for (const auto& cell : b) d.b_low.push_back(cell.get<std::string>());
      break;
    }
  }

  d.domain = Domain::standard(d.n);
  if (j.contains("domain")) {
    const json& dm = j.at("domain");
    if (dm.contains("z_re")) detail::read_intervals(dm["z_re"], d.domain.z_re, d.n, "z_re");
    if (dm.contains("z_im")) detail::read_intervals(dm["z_im"], d.domain.z_im, d.n, "z_im");
    if (dm.contains("zeta_re"))
      detail::read_intervals(dm["zeta_re"], d.domain.zeta_re, d.n, "zeta_re");
    if (dm.contains("zeta_im"))
      detail::read_intervals(dm["zeta_im"], d.domain.zeta_im, d.n, "zeta_im");
    d.domain.zeta_min_norm = dm.value("zeta_min_norm", d.domain.zeta_min_norm);
    d.domain.zeta_component_floor =
        dm.value("zeta_component_floor", d.domain.zeta_component_floor);
    d.domain.constraint = dm.value("constraint", d.domain.constraint);
    d.domain.constraint_margin =
        dm.value("constraint_margin", d.domain.constraint_margin);
  }
  return d;
}

inline MetricDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open metric file '" + path + "'", 0);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad JSON in '") + path + "': " + e.what(), 0);
  }
  return parse_document(j);
}

// A compiled document: at most one of the three payloads depending on kind.
struct CompiledDocument {
  MetricDocument doc;
  std::optional<CartanMetric> cartan;
  std::optional<FinslerMetric> finsler;
  std::optional<RandersGeometry> randers;

  LoadedMetric as_loaded() const {
    if (!cartan) throw Error("document is not a Cartan metric");
    return LoadedMetric{doc.name, *cartan, randers, doc.domain, doc.beta_floor};
  }
};

inline CompiledDocument compile_document(const MetricDocument& d,
                                         int validation_samples = 64) {
  CompiledDocument out;
  out.doc = d;
  switch (d.kind) {
    case DocumentKind::Hamiltonian: {
      CartanMetric m = CartanMetric::compile(parse(d.hamiltonian, d.n), d.n);
      // sampling only skips points where evaluation is undefined; reality
      // and positivity are validation's to reject
      auto pts = sample_points(d.domain, validation_samples, d.seed,
                               [&](const EvalContext& c) {
                                 try {
                                   (void)evaluate(m.hamiltonian(), c);
                                   return true;
                                 } catch (const Error&) {
                                   return false;
                                 }
                               });
      validate_compiled(m, pts);
      out.cartan = std::move(m);
      break;
    }
    case DocumentKind::Finsler: {
      auto pts = sample_points(d.domain, validation_samples, d.seed);
      out.finsler = validate_finsler(parse(d.lagrangian, d.n), d.n, pts);
      break;
    }
    case DocumentKind::Randers: {
      RandersGeometry g(RandersSpec::from_strings(d.n, d.a_up, d.b_low));
      auto pts = sample_points(d.domain, validation_samples, d.seed,
                               [&](const EvalContext& c) {
                                 try {
                                   return g.at(c, d.beta_floor).gamma > 0.0;
                                 } catch (const Error&) {
                                   return false;
                                 }
                               });
      out.cartan = build_metric(g, pts, d.beta_floor);
      out.randers = std::move(g);
      break;
    }
  }
  return out;
}

// Resolves "catalog:<name>" or a JSON file path.
inline CompiledDocument resolve_metric(const std::string& ref) {
  if (ref.rfind("catalog:", 0) == 0) {
    const std::string name = ref.substr(8);
    const CatalogEntry& e = catalog_entry(name);
    MetricDocument d;
    d.n = e.n;
    d.name = e.name;
    d.domain = e.domain;
    d.beta_floor = e.beta_floor;
    if (e.randers) {
      d.kind = DocumentKind::Randers;
      d.a_up = e.a_up;
      d.b_low = e.b_low;
    } else {
      d.kind = DocumentKind::Hamiltonian;
      d.hamiltonian = e.hamiltonian;
    }
    return compile_document(d);
  }
  return compile_document(load_document(ref));
}

}  // namespace cartan

#endif
