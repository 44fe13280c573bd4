#ifndef CARTAN_SAMPLING_HPP
#define CARTAN_SAMPLING_HPP

// Deterministic low-discrepancy sampling of chart points.  A Domain is a
// per-coordinate box for Re/Im of z_k and zeta_k plus optional norm
// constraints written as chains like "|z2|<|z1|<1".  The Halton sequence
// plus a seed offset makes every report reproducible bit for bit.

#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan {

struct Interval {
  double lo{-1.0}, hi{1.0};
};

struct Domain {
  int n{2};
  std::vector<Interval> z_re, z_im, zeta_re, zeta_im;
  double zeta_min_norm{0.1};
  double zeta_component_floor{0.0};
  std::string constraint;          // "" or "|z2|<|z1|<1" style chain
  double constraint_margin{0.02};  // strictness margin for every '<'

  static Domain standard(int n) {
    Domain d;
    d.n = n;
    d.z_re.assign(n, {-1.0, 1.0});
    d.z_im.assign(n, {-1.0, 1.0});
    d.zeta_re.assign(n, {-1.5, 1.5});
    d.zeta_im.assign(n, {-1.5, 1.5});
    return d;
  }
};

namespace detail {

inline double halton(unsigned long long index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline const int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                              23, 29, 31, 37, 41, 43, 47, 53};

// Parses "|z2|<|z1|<1" chains; returns true when each strict inequality
// holds with the given margin at the point.
inline bool constraint_holds(const std::string& text, const EvalContext& ctx,
                             double margin) {
  if (text.empty()) return true;
  std::vector<double> values;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  };
  for (;;) {
    skip_ws();
    if (pos >= text.size()) break;
    if (text[pos] == '<') {
      ++pos;
      continue;
    }
    if (text[pos] == '|') {
      std::size_t close = text.find('|', pos + 1);
      if (close == std::string::npos)
        throw Error("domain constraint: unbalanced '|' in \"" + text + "\"");
      std::string atom = text.substr(pos + 1, close - pos - 1);
      pos = close + 1;
      // atom is zK or pK (also accepts z[K]/p[K])
      std::string digits;
      bool fibre = false;
      for (char c : atom) {
        if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
        else if (c == 'p') fibre = true;
      }
      if (digits.empty())
        throw Error("domain constraint: bad coordinate \"" + atom + "\"");
      int k = std::stoi(digits) - 1;
      if (k < 0 || k >= ctx.n())
        throw Error("domain constraint: index out of range in \"" + text + "\"");
      values.push_back(std::abs(fibre ? ctx.zeta[k] : ctx.z[k]));
    } else {
      std::size_t start = pos;
      while (pos < text.size() && text[pos] != '<') ++pos;
      values.push_back(std::stod(text.substr(start, pos - start)));
    }
  }
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    if (!(values[i] + margin <= values[i + 1])) return false;
  return true;
}

}  // namespace detail

// Draws `count` admissible points; `accept` may impose extra conditions
// (beta floors, gamma positivity).  Deterministic in (domain, count, seed).
inline std::vector<EvalContext> sample_points(
    const Domain& d, int count, unsigned seed,
    const std::function<bool(const EvalContext&)>& accept = {}) {
  std::vector<EvalContext> out;
  out.reserve(count);
  unsigned long long index = 17 + 9973ull * seed;
  const int dims = 4 * d.n;
  if (dims > 16) throw Error("sample_points: dimension too large");
  long long budget = 200000ll * count;
  while (static_cast<int>(out.size()) < count && budget-- > 0) {
    EvalContext ctx;
    ctx.z.resize(d.n);
    ctx.zeta.resize(d.n);
    int dim = 0;
    auto draw = [&](const Interval& iv) {
      double u = detail::halton(index, detail::kPrimes[dim++]);
      return iv.lo + u * (iv.hi - iv.lo);
    };
    for (int k = 0; k < d.n; ++k)
      ctx.z[k] = cd(draw(d.z_re[k]), draw(d.z_im[k]));
    for (int k = 0; k < d.n; ++k)
      ctx.zeta[k] = cd(draw(d.zeta_re[k]), draw(d.zeta_im[k]));
    ++index;

    double norm = 0.0, comp_min = 1e300;
    for (int k = 0; k < d.n; ++k) {
      norm += std::norm(ctx.zeta[k]);
      comp_min = std::min(comp_min, std::abs(ctx.zeta[k]));
    }
    if (std::sqrt(norm) < d.zeta_min_norm) continue;
    if (comp_min < d.zeta_component_floor) continue;
    if (!detail::constraint_holds(d.constraint, ctx, d.constraint_margin))
      continue;
    if (accept && !accept(ctx)) continue;
    out.push_back(std::move(ctx));
  }
  if (static_cast<int>(out.size()) < count)
    throw Error("sample_points: rejection budget exhausted (domain too tight)");
  return out;
}

}  // namespace cartan

#endif
