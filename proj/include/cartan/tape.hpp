#ifndef CARTAN_TAPE_HPP
#define CARTAN_TAPE_HPP

// Compiled evaluation of expression DAGs.  Nodes reachable from the
// registered roots are linearized once in topological order; evaluating
// at a point is then a single sweep with no hashing.  Tapes are built
// while a metric is constructed and immutable afterwards, so concurrent
// evaluation at different points is safe (each call owns its scratch).

#include <unordered_map>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan {

class Tape {
 public:
  // Registers `e` (and its sub-DAG) and returns the slot of its value.
  int add_root(const Expr& e) {
    roots_.push_back(e.ptr());
    return visit(e.node());
  }

  // Number of ops; eval with `count` limited to an earlier watermark only
  // computes that prefix (tiers of derivative tables are prefixes).
  int size() const { return static_cast<int>(ops_.size()); }

  void eval_prefix(const EvalContext& ctx, int count, std::vector<cd>& out) const {
    out.resize(ops_.size());
    for (int i = 0; i < count; ++i) {
      const Op& op = ops_[i];
      cd r;
      switch (op.kind) {
        case NodeKind::Const: r = op.value; break;
        case NodeKind::Sym: r = ctx.value(op.sym); break;
        case NodeKind::Add: r = out[op.a] + out[op.b]; break;
        case NodeKind::Sub: r = out[op.a] - out[op.b]; break;
        case NodeKind::Mul: r = out[op.a] * out[op.b]; break;
        case NodeKind::Div: {
          const cd den = out[op.b];
          if (std::abs(den) < 1e-280)
            throw DomainError("division by zero", labels_.at(i));
          r = out[op.a] / den;
          break;
        }
        case NodeKind::Neg: r = -out[op.a]; break;
        case NodeKind::Pow: r = detail::ipow(out[op.a], op.exponent); break;
        case NodeKind::Exp: r = std::exp(out[op.a]); break;
        case NodeKind::Log:
          if (!detail::branch_ok(out[op.a]))
            throw DomainError("log argument off the positive branch",
                              labels_.at(i));
          r = std::log(out[op.a]);
          break;
        case NodeKind::Sqrt:
          if (!detail::branch_ok(out[op.a]))
            throw DomainError("sqrt argument off the positive branch",
                              labels_.at(i));
          r = std::sqrt(out[op.a]);
          break;
        default: r = cd(0, 0); break;
      }
      out[i] = r;
    }
  }

  void eval(const EvalContext& ctx, std::vector<cd>& out) const {
    eval_prefix(ctx, size(), out);
  }

 private:
  struct Op {
    NodeKind kind;
    int a{-1}, b{-1};
    cd value{};
    Symbol sym{};
    int exponent{};
  };

  int visit(const ExprNode& n) {
    auto it = slot_.find(&n);
    if (it != slot_.end()) return it->second;
    Op op;
    op.kind = n.kind;
    op.value = n.value;
    op.sym = n.sym;
    op.exponent = n.exponent;
    if (n.a) op.a = visit(*n.a);
    if (n.b) op.b = visit(*n.b);
    const int slot = static_cast<int>(ops_.size());
    ops_.push_back(op);
    if (n.kind == NodeKind::Div || n.kind == NodeKind::Log ||
        n.kind == NodeKind::Sqrt) {
      const ExprNode& culprit =
          n.kind == NodeKind::Div ? *n.b : *n.a;
      std::string text = detail::print_node(culprit);
      if (text.size() > 80) text = text.substr(0, 77) + "...";
      labels_.emplace(slot, std::move(text));
    }
    slot_.emplace(&n, slot);
    return slot;
  }

  std::vector<Op> ops_;
  std::unordered_map<const ExprNode*, int> slot_;
  std::unordered_map<int, std::string> labels_;  // domain-checked ops only
  std::vector<std::shared_ptr<const ExprNode>> roots_;  // keepalive
};

}  // namespace cartan

#endif
