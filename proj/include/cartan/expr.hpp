#ifndef CARTAN_EXPR_HPP
#define CARTAN_EXPR_HPP

// Expression trees over the 4n independent Wirtinger symbols
// z_k, zb_k (base coordinates) and p_k, pb_k (fibre coordinates zeta).
// All metrics and every derived tensor reduce to these trees; evaluation
// at a chart point and symbolic Wirtinger differentiation live here.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "cartan/errors.hpp"

namespace cartan {

using cd = std::complex<double>;

enum class SymKind : std::uint8_t { Z, ZBar, Zeta, ZetaBar };

// index is 1-based, matching the DSL spelling z[1], pb[2], ...
struct Symbol {
  SymKind kind{SymKind::Z};
  int index{1};

  friend bool operator==(const Symbol& a, const Symbol& b) {
    return a.kind == b.kind && a.index == b.index;
  }
  friend bool operator!=(const Symbol& a, const Symbol& b) { return !(a == b); }
  // canonical order used by derivative multi-indices
  friend bool operator<(const Symbol& a, const Symbol& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.index < b.index;
  }
};

inline Symbol conj_symbol(Symbol s) {
  switch (s.kind) {
    case SymKind::Z: s.kind = SymKind::ZBar; break;
    case SymKind::ZBar: s.kind = SymKind::Z; break;
    case SymKind::Zeta: s.kind = SymKind::ZetaBar; break;
    case SymKind::ZetaBar: s.kind = SymKind::Zeta; break;
  }
  return s;
}

inline bool is_barred(Symbol s) {
  return s.kind == SymKind::ZBar || s.kind == SymKind::ZetaBar;
}

// 0-based index helpers for tensor loops.
inline Symbol sym_z(int i0) { return {SymKind::Z, i0 + 1}; }
inline Symbol sym_zb(int i0) { return {SymKind::ZBar, i0 + 1}; }
inline Symbol sym_p(int i0) { return {SymKind::Zeta, i0 + 1}; }
inline Symbol sym_pb(int i0) { return {SymKind::ZetaBar, i0 + 1}; }

inline std::string symbol_name(Symbol s) {
  const char* base = nullptr;
  switch (s.kind) {
    case SymKind::Z: base = "z"; break;
    case SymKind::ZBar: base = "zb"; break;
    case SymKind::Zeta: base = "p"; break;
    case SymKind::ZetaBar: base = "pb"; break;
  }
  return std::string(base) + "[" + std::to_string(s.index) + "]";
}

// Chart point: zb/pb values are derived as conjugates of z/zeta, so a
// context is always conjugate-consistent; the algebra never assumes it.
struct EvalContext {
  std::vector<cd> z;
  std::vector<cd> zeta;

  int n() const { return static_cast<int>(z.size()); }
  cd value(Symbol s) const {
    const int i = s.index - 1;
    switch (s.kind) {
      case SymKind::Z: return z[i];
      case SymKind::ZBar: return std::conj(z[i]);
      case SymKind::Zeta: return zeta[i];
      default: return std::conj(zeta[i]);
    }
  }
};

enum class NodeKind : std::uint8_t {
  Const, Sym, Add, Sub, Mul, Div, Neg, Pow, Exp, Log, Sqrt
};

class Expr;

struct ExprNode {
  NodeKind kind{NodeKind::Const};
  cd value{};        // Const
  Symbol sym{};      // Sym
  int exponent{};    // Pow
  std::shared_ptr<const ExprNode> a, b;
  std::uint64_t id{};

  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
  }
};

class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

  const ExprNode& node() const { return *node_; }
  const ExprNode* raw() const { return node_.get(); }
  std::shared_ptr<const ExprNode> ptr() const { return node_; }
  bool valid() const { return node_ != nullptr; }

  NodeKind kind() const { return node_->kind; }
  bool is_const() const { return node_->kind == NodeKind::Const; }
  bool is_const(cd v) const { return is_const() && node_->value == v; }
  cd const_value() const { return node_->value; }

 private:
  std::shared_ptr<const ExprNode> node_;
};

namespace detail {
inline Expr make_node(ExprNode n) {
  n.id = ExprNode::next_id();
  return Expr(std::make_shared<const ExprNode>(std::move(n)));
}
}  // namespace detail

inline Expr constant(cd v) {
  ExprNode n;
  n.kind = NodeKind::Const;
  n.value = v;
  return detail::make_node(std::move(n));
}
inline Expr constant(double v) { return constant(cd(v, 0.0)); }

inline Expr symbol(Symbol s) {
  ExprNode n;
  n.kind = NodeKind::Sym;
  n.sym = s;
  return detail::make_node(std::move(n));
}

inline Expr add(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return constant(a.const_value() + b.const_value());
  if (a.is_const(cd(0, 0))) return b;
  if (b.is_const(cd(0, 0))) return a;
  ExprNode n;
  n.kind = NodeKind::Add;
  n.a = a.ptr();
  n.b = b.ptr();
  return detail::make_node(std::move(n));
}

inline Expr neg(const Expr& a) {
  if (a.is_const()) return constant(-a.const_value());
  if (a.kind() == NodeKind::Neg) return Expr(a.node().a);
  ExprNode n;
  n.kind = NodeKind::Neg;
  n.a = a.ptr();
  return detail::make_node(std::move(n));
}

inline Expr sub(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return constant(a.const_value() - b.const_value());
  if (b.is_const(cd(0, 0))) return a;
  if (a.is_const(cd(0, 0))) return neg(b);
  ExprNode n;
  n.kind = NodeKind::Sub;
  n.a = a.ptr();
  n.b = b.ptr();
  return detail::make_node(std::move(n));
}

inline Expr mul(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) return constant(a.const_value() * b.const_value());
  if (a.is_const(cd(0, 0)) || b.is_const(cd(0, 0))) return constant(0.0);
  if (a.is_const(cd(1, 0))) return b;
  if (b.is_const(cd(1, 0))) return a;
  ExprNode n;
  n.kind = NodeKind::Mul;
  n.a = a.ptr();
  n.b = b.ptr();
  return detail::make_node(std::move(n));
}

inline Expr div(const Expr& a, const Expr& b) {
  if (b.is_const(cd(1, 0))) return a;
  if (a.is_const(cd(0, 0)) && !b.is_const(cd(0, 0))) return constant(0.0);
  if (a.is_const() && b.is_const() && b.const_value() != cd(0, 0))
    return constant(a.const_value() / b.const_value());
  ExprNode n;
  n.kind = NodeKind::Div;
  n.a = a.ptr();
  n.b = b.ptr();
  return detail::make_node(std::move(n));
}

namespace detail {
inline cd ipow(cd base, int k) {
  // repeated multiplication keeps integer powers exact for real inputs
  bool inv = k < 0;
  unsigned e = inv ? static_cast<unsigned>(-(long long)k) : static_cast<unsigned>(k);
  cd r(1.0, 0.0), acc = base;
  while (e) {
    if (e & 1u) r *= acc;
    acc *= acc;
    e >>= 1u;
  }
  return inv ? cd(1.0, 0.0) / r : r;
}
}  // namespace detail

inline Expr pow_int(const Expr& a, int k) {
  if (k == 0) return constant(1.0);
  if (k == 1) return a;
  if (a.is_const()) return constant(detail::ipow(a.const_value(), k));
  ExprNode n;
  n.kind = NodeKind::Pow;
  n.a = a.ptr();
  n.exponent = k;
  return detail::make_node(std::move(n));
}

inline Expr exp_e(const Expr& a) {
  if (a.is_const()) return constant(std::exp(a.const_value()));
  ExprNode n;
  n.kind = NodeKind::Exp;
  n.a = a.ptr();
  return detail::make_node(std::move(n));
}

namespace detail {
// principal-branch guard shared by Sqrt/Log evaluation and folding
inline bool branch_ok(cd v) {
  return v.real() > 0.0 && std::abs(v.imag()) <= 1e-9 * (1.0 + std::abs(v.real()));
}
}  // namespace detail

inline Expr log_e(const Expr& a) {
  if (a.is_const() && detail::branch_ok(a.const_value()))
    return constant(std::log(a.const_value()));
  ExprNode n;
  n.kind = NodeKind::Log;
  n.a = a.ptr();
  return detail::make_node(std::move(n));
}

inline Expr sqrt_e(const Expr& a) {
  if (a.is_const() && detail::branch_ok(a.const_value()))
    return constant(std::sqrt(a.const_value()));
  ExprNode n;
  n.kind = NodeKind::Sqrt;
  n.a = a.ptr();
  return detail::make_node(std::move(n));
}

// Conjugation is applied eagerly: swap symbol kinds at the leaves and
// conjugate constants, so no Conj node ever survives into a stored tree.
inline Expr conj_push(const Expr& e) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::Const: return constant(std::conj(n.value));
    case NodeKind::Sym: return symbol(conj_symbol(n.sym));
    case NodeKind::Add: return add(conj_push(Expr(n.a)), conj_push(Expr(n.b)));
    case NodeKind::Sub: return sub(conj_push(Expr(n.a)), conj_push(Expr(n.b)));
    case NodeKind::Mul: return mul(conj_push(Expr(n.a)), conj_push(Expr(n.b)));
    case NodeKind::Div: return div(conj_push(Expr(n.a)), conj_push(Expr(n.b)));
    case NodeKind::Neg: return neg(conj_push(Expr(n.a)));
    case NodeKind::Pow: return pow_int(conj_push(Expr(n.a)), n.exponent);
    case NodeKind::Exp: return exp_e(conj_push(Expr(n.a)));
    case NodeKind::Log: return log_e(conj_push(Expr(n.a)));
    case NodeKind::Sqrt: return sqrt_e(conj_push(Expr(n.a)));
  }
  return e;
}

inline bool struct_equal(const Expr& x, const Expr& y) {
  if (x.raw() == y.raw()) return true;
  const ExprNode& a = x.node();
  const ExprNode& b = y.node();
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Const: return a.value == b.value;
    case NodeKind::Sym: return a.sym == b.sym;
    case NodeKind::Pow:
      return a.exponent == b.exponent && struct_equal(Expr(a.a), Expr(b.a));
    case NodeKind::Neg:
    case NodeKind::Exp:
    case NodeKind::Log:
    case NodeKind::Sqrt:
      return struct_equal(Expr(a.a), Expr(b.a));
    default:
      return struct_equal(Expr(a.a), Expr(b.a)) && struct_equal(Expr(a.b), Expr(b.b));
  }
}

// ---------------------------------------------------------------------------
// printing

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::string format_const(cd v, bool& atomic) {
  atomic = true;
  if (v.imag() == 0.0) {
    if (std::signbit(v.real())) atomic = false;  // covers -0.0 too
    return format_real(v.real());
  }
  if (v.real() == 0.0) {
    if (std::signbit(v.imag())) atomic = false;
    return format_real(v.imag()) + "i";
  }
  atomic = false;
  std::string s = "(" + format_real(v.real());
  if (v.imag() >= 0.0) s += "+";
  s += format_real(v.imag()) + "i)";
  atomic = true;  // already parenthesized
  return s;
}

// precedence: Add/Sub 1, Mul/Div/Neg 2, Pow 3, atoms 4
inline int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Neg: return 2;
    case NodeKind::Pow: return 3;
    default: return 4;
  }
}

inline std::string print_node(const ExprNode& n);

inline std::string print_child(const ExprNode& c, int min_prec) {
  std::string s = print_node(c);
  if (precedence(c) < min_prec) return "(" + s + ")";
  // a leading '-' only parses at the start of an expression
  if (c.kind == NodeKind::Neg && min_prec >= 2) return "(" + s + ")";
  if (c.kind == NodeKind::Const) {
    bool atomic = true;
    format_const(c.value, atomic);
    if (!atomic && min_prec > 1) return "(" + s + ")";
  }
  return s;
}

inline std::string print_node(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Const: {
      bool atomic;
      return format_const(n.value, atomic);
    }
    case NodeKind::Sym: return symbol_name(n.sym);
    case NodeKind::Add: return print_child(*n.a, 1) + " + " + print_child(*n.b, 2);
    case NodeKind::Sub: return print_child(*n.a, 1) + " - " + print_child(*n.b, 2);
    case NodeKind::Mul: return print_child(*n.a, 2) + "*" + print_child(*n.b, 3);
    case NodeKind::Div: return print_child(*n.a, 2) + "/" + print_child(*n.b, 3);
    case NodeKind::Neg: return "-" + print_child(*n.a, 3);
    case NodeKind::Pow: return print_child(*n.a, 4) + "^" + std::to_string(n.exponent);
    case NodeKind::Exp: return "exp(" + print_node(*n.a) + ")";
    case NodeKind::Log: return "log(" + print_node(*n.a) + ")";
    case NodeKind::Sqrt: return "sqrt(" + print_node(*n.a) + ")";
  }
  return "?";
}

}  // namespace detail

inline std::string to_string(const Expr& e) { return detail::print_node(e.node()); }

// ---------------------------------------------------------------------------
// evaluation

class EvalMemo {
 public:
  cd evaluate(const Expr& e, const EvalContext& ctx) {
    memo_.clear();
    return eval_node(e.node(), ctx);
  }

 private:
  cd eval_node(const ExprNode& n, const EvalContext& ctx) {
    if (n.kind == NodeKind::Const) return n.value;
    if (n.kind == NodeKind::Sym) return ctx.value(n.sym);
    auto it = memo_.find(&n);
    if (it != memo_.end()) return it->second;
    cd r;
    switch (n.kind) {
      case NodeKind::Add: r = eval_node(*n.a, ctx) + eval_node(*n.b, ctx); break;
      case NodeKind::Sub: r = eval_node(*n.a, ctx) - eval_node(*n.b, ctx); break;
      case NodeKind::Mul: r = eval_node(*n.a, ctx) * eval_node(*n.b, ctx); break;
      case NodeKind::Div: {
        cd den = eval_node(*n.b, ctx);
        if (std::abs(den) < 1e-280)
          throw DomainError("division by zero", detail::print_node(*n.b));
        r = eval_node(*n.a, ctx) / den;
        break;
      }
      case NodeKind::Neg: r = -eval_node(*n.a, ctx); break;
      case NodeKind::Pow: r = detail::ipow(eval_node(*n.a, ctx), n.exponent); break;
      case NodeKind::Exp: r = std::exp(eval_node(*n.a, ctx)); break;
      case NodeKind::Log: {
        cd arg = eval_node(*n.a, ctx);
        if (!detail::branch_ok(arg))
          throw DomainError("log argument off the positive branch",
                            detail::print_node(*n.a));
        r = std::log(arg);
        break;
      }
      case NodeKind::Sqrt: {
        cd arg = eval_node(*n.a, ctx);
        if (!detail::branch_ok(arg))
          throw DomainError("sqrt argument off the positive branch",
                            detail::print_node(*n.a));
        r = std::sqrt(arg);
        break;
      }
      default: r = cd(0, 0); break;
    }
    memo_.emplace(&n, r);
    return r;
  }

  std::unordered_map<const ExprNode*, cd> memo_;
};

inline cd evaluate(const Expr& e, const EvalContext& ctx) {
  EvalMemo memo;
  return memo.evaluate(e, ctx);
}

// For expressions that represent real quantities: checks the reality
// tolerance |Im| <= 1e-9 (1 + |Re|) and returns the real part.
inline double evaluate_real(const Expr& e, const EvalContext& ctx) {
  cd v = evaluate(e, ctx);
  if (std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v.real())))
    throw DomainError("expected a real value, got imaginary part " +
                          detail::format_real(v.imag()),
                      to_string(e));
  return v.real();
}

// ---------------------------------------------------------------------------
// finite-difference Wirtinger oracle
//
// d/dzeta   = (d/dx - i d/dy)/2,   d/dzetabar = (d/dx + i d/dy)/2,
// where x, y are the real and imaginary parts of the underlying complex
// coordinate.  The context stays conjugate-consistent under the wiggle.

inline cd fd_oracle(const Expr& e, Symbol s, const EvalContext& ctx, double step) {
  if (step <= 0.0) throw Error("fd_oracle: step must be positive");
  const int i = s.index - 1;
  const bool fibre = (s.kind == SymKind::Zeta || s.kind == SymKind::ZetaBar);

  auto wiggled = [&](double dre, double dim) {
    EvalContext c = ctx;
    cd& slot = fibre ? c.zeta[i] : c.z[i];
    slot += cd(dre, dim);
    return evaluate(e, c);
  };

  const cd dx = (wiggled(step, 0.0) - wiggled(-step, 0.0)) / (2.0 * step);
  const cd dy = (wiggled(0.0, step) - wiggled(0.0, -step)) / (2.0 * step);
  if (is_barred(s)) return 0.5 * (dx + cd(0, 1) * dy);
  return 0.5 * (dx - cd(0, 1) * dy);
}

}  // namespace cartan

#endif
