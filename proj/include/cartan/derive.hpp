#ifndef CARTAN_DERIVE_HPP
#define CARTAN_DERIVE_HPP

// Symbolic Wirtinger differentiation.  All 4n symbols are independent
// leaves, so the rules are the classical ones applied verbatim.  The
// cache memoizes per (node, symbol) which turns repeated mixed
// derivatives into a shared DAG instead of an exponential tree.

#include <mutex>
#include <unordered_map>

#include "cartan/expr.hpp"

namespace cartan {

class DerivCache {
 public:
  Expr derive(const Expr& e, Symbol s) {
    std::lock_guard<std::mutex> lock(mutex_);
    return derive_locked(e, s);
  }

 private:
  struct Key {
    const ExprNode* node;
    Symbol sym;
    bool operator==(const Key& o) const {
      return node == o.node && sym == o.sym;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<const void*>()(k.node);
      h ^= (static_cast<std::size_t>(k.sym.kind) * 1315423911u) ^
           (static_cast<std::size_t>(k.sym.index) << 3);
      return h;
    }
  };

  Expr derive_locked(const Expr& e, Symbol s) {
    const ExprNode& n = e.node();
    if (n.kind == NodeKind::Const) return constant(0.0);
    if (n.kind == NodeKind::Sym)
      return constant(n.sym == s ? 1.0 : 0.0);

    Key key{e.raw(), s};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    Expr a = n.a ? Expr(n.a) : Expr();
    Expr b = n.b ? Expr(n.b) : Expr();
    Expr r;
    switch (n.kind) {
      case NodeKind::Add: r = add(derive_locked(a, s), derive_locked(b, s)); break;
      case NodeKind::Sub: r = sub(derive_locked(a, s), derive_locked(b, s)); break;
      case NodeKind::Mul:
        r = add(mul(derive_locked(a, s), b), mul(a, derive_locked(b, s)));
        break;
      case NodeKind::Div:
        // (a/b)' = a'/b - a b' / b^2
        r = sub(div(derive_locked(a, s), b),
                div(mul(a, derive_locked(b, s)), pow_int(b, 2)));
        break;
      case NodeKind::Neg: r = neg(derive_locked(a, s)); break;
      case NodeKind::Pow:
        r = mul(mul(constant(static_cast<double>(n.exponent)),
                    pow_int(a, n.exponent - 1)),
                derive_locked(a, s));
        break;
      case NodeKind::Exp: r = mul(e, derive_locked(a, s)); break;
      case NodeKind::Log: r = div(derive_locked(a, s), a); break;
      case NodeKind::Sqrt:
        r = div(derive_locked(a, s), mul(constant(2.0), e));
        break;
      default: r = constant(0.0); break;
    }
    memo_.emplace(key, r);
    // hold the key node alive for the lifetime of the cache
    keepalive_.push_back(e.ptr());
    return r;
  }

  std::unordered_map<Key, Expr, KeyHash> memo_;
  std::vector<std::shared_ptr<const ExprNode>> keepalive_;
  std::mutex mutex_;
};

inline Expr wirtinger_derive(const Expr& e, Symbol s) {
  static DerivCache shared_cache;
  return shared_cache.derive(e, s);
}

}  // namespace cartan

#endif
