#ifndef CARTAN_TESTS_HELPERS_HPP
#define CARTAN_TESTS_HELPERS_HPP

#include <catch2/catch_amalgamated.hpp>
#include <map>

#include "cartan/cartan.hpp"

namespace ct {

using namespace cartan;

inline EvalContext pt1(cd z1, cd p1) { return EvalContext{{z1}, {p1}}; }
inline EvalContext pt2(cd z1, cd z2, cd p1, cd p2) {
  return EvalContext{{z1, z2}, {p1, p2}};
}

// catalog metrics are expensive enough to share across test cases
inline const LoadedMetric& fixture(const std::string& name) {
  static std::map<std::string, LoadedMetric> cache;
  auto it = cache.find(name);
  if (it == cache.end())
    it = cache.emplace(name, load_catalog_metric(name)).first;
  return it->second;
}

inline double rel_err(cd got, cd want) {
  return std::abs(got - want) / (1.0 + std::abs(want));
}

// perturbed copy of Example 4.1's data whose Randers metric is not Berwald
// (second component of b scaled by 1 + z1 z2)
inline RandersGeometry perturbed_41() {
  const CatalogEntry& e = catalog_entry("example-4.1");
  auto b = e.b_low;
  b[1] = "(" + b[1] + ")*(1+z[1]*z[2])";
  return RandersGeometry(RandersSpec::from_strings(e.n, e.a_up, b));
}

inline std::vector<EvalContext> sample_41(int count, unsigned seed) {
  return fixture("example-4.1").sample(count, seed);
}

}  // namespace ct

#endif
