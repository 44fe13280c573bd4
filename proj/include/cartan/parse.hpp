#ifndef CARTAN_PARSE_HPP
#define CARTAN_PARSE_HPP

// Recursive-descent parser for the metric-definition grammar:
//
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' integer)?
//   base   := number | 'z[' k ']' | 'zb[' k ']' | 'p[' k ']' | 'pb[' k ']'
//           | func '(' expr ')' | '(' expr ')'
//   func   := exp | log | sqrt | conj
//   number := decimal with optional 'i' suffix
//
// Returned trees are normalized: conj is pushed to the leaves and
// constants folded, so the AST never contains a Conj node.

#include <cctype>
#include <string>

#include "cartan/expr.hpp"

namespace cartan {

namespace detail {

class Parser {
 public:
  Parser(const std::string& text, int n) : text_(text), n_(n) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  Expr expression() {
    skip_ws();
    bool negate = false;
    if (peek() == '+' || peek() == '-') negate = (take() == '-');
    Expr e = term();
    if (negate) e = neg(e);
    for (;;) {
      skip_ws();
      char c = peek();
      if (c == '+') {
        take();
        e = add(e, term());
      } else if (c == '-') {
        take();
        e = sub(e, term());
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c == '*') {
        take();
        e = mul(e, factor());
      } else if (c == '/') {
        take();
        e = div(e, factor());
      } else {
        return e;
      }
    }
  }

  Expr factor() {
    Expr e = base();
    skip_ws();
    if (peek() == '^') {
      take();
      e = pow_int(e, integer());
    }
    return e;
  }

  Expr base() {
    skip_ws();
    char c = peek();
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    if (c == '(') {
      take();
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr identifier() {
    std::size_t start = pos_;
    std::string name;
    while (std::isalpha(static_cast<unsigned char>(peek()))) name += take();
    if (name == "z" || name == "zb" || name == "p" || name == "pb") {
      expect('[');
      int k = integer();
      expect(']');
      if (k < 1 || k > n_)
        throw ParseError("symbol index " + std::to_string(k) +
                             " out of range 1.." + std::to_string(n_),
                         start);
      SymKind kind = name == "z"    ? SymKind::Z
                     : name == "zb" ? SymKind::ZBar
                     : name == "p"  ? SymKind::Zeta
                                    : SymKind::ZetaBar;
      return symbol(Symbol{kind, k});
    }
    if (name == "exp" || name == "log" || name == "sqrt" || name == "conj") {
      expect('(');
      Expr arg = expression();
      expect(')');
      if (name == "exp") return exp_e(arg);
      if (name == "log") return log_e(arg);
      if (name == "sqrt") return sqrt_e(arg);
      return conj_push(arg);
    }
    throw ParseError("unknown function name '" + name + "'", start);
  }

  Expr number() {
    std::size_t start = pos_;
    std::string digits;
    while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')
      digits += take();
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save = pos_;
      std::string mant = digits;
      mant += take();
      if (peek() == '+' || peek() == '-') mant += take();
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        while (std::isdigit(static_cast<unsigned char>(peek()))) mant += take();
        digits = mant;
      } else {
        pos_ = save;  // 'e' was not an exponent
      }
    }
    double v;
    try {
      v = std::stod(digits);
    } catch (const std::exception&) {
      throw ParseError("malformed number", start);
    }
    if (peek() == 'i') {
      take();
      return constant(cd(0.0, v));
    }
    return constant(v);
  }

  int integer() {
    skip_ws();
    std::size_t start = pos_;
    bool negative = false;
    if (peek() == '-') {
      negative = true;
      take();
    }
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      throw ParseError("expected an integer", start);
    long v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (take() - '0');
      if (v > 1000000) throw ParseError("integer too large", start);
    }
    return static_cast<int>(negative ? -v : v);
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c)
      throw ParseError(std::string("expected '") + c + "'", pos_);
    take();
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char take() { return text_[pos_++]; }

  const std::string& text_;
  int n_;
  std::size_t pos_{0};
};

}  // namespace detail

inline Expr parse(const std::string& text, int n) {
  return detail::Parser(text, n).parse();
}

}  // namespace cartan

#endif
