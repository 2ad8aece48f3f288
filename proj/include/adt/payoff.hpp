#pragma once

// Small expression language for stopping payoffs f_t(x_1, ..., x_t).
//
//   expr   := term (('+' | '-') term)*
//   term   := unary ('*' unary)*
//   unary  := '-' unary | atom
//   atom   := number | ref | 't' | fn '(' expr (',' expr)* ')' | '(' expr ')'
//   fn     := min | max | abs
//   ref    := 'x' | 'x_'i | 'x's | 'x's'_'i
//
// `x` is the current value x_t (d = 1), `x_i` its i-th coordinate, `xs` the
// value at absolute time s and `xs_i` its i-th coordinate. Numbers are
// decimals or "a/b" literals and evaluate exactly. Referencing a time after
// the current one is an evaluation error.

#include <cctype>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "adt/error.hpp"
#include "adt/process.hpp"
#include "adt/rational.hpp"

namespace adt {

class Expression {
 public:
  static Expression parse(std::string_view source) {
    Parser parser{source, 0};
    Expression e;
    e.source_ = std::string(source);
    e.root_ = parser.expr();
    parser.skip();
    if (parser.pos != source.size()) parser.fail("unexpected '" + std::string(1, source[parser.pos]) + "'");
    return e;
  }

  // prefix holds x_1, ..., x_t.
  Rational evaluate(const Path& prefix) const { return eval(*root_, prefix); }

  const std::string& source() const { return source_; }

 private:
  enum class Kind { kNumber, kRef, kTime, kAdd, kSub, kMul, kNeg, kMin, kMax, kAbs };

  struct NodeExpr {
    Kind kind;
    Rational number;
    int time = 0;   // 0: current time
    int coord = 0;  // 0: scalar (d = 1)
    std::vector<std::unique_ptr<NodeExpr>> args;
  };
  using Ptr = std::unique_ptr<NodeExpr>;

  struct Parser {
    std::string_view s;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& what) const {
      throw Error(ErrorCode::kExpression, "payoff '" + std::string(s) + "': " + what + " at offset " + std::to_string(pos));
    }

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool accept(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    static Ptr make(Kind kind) {
      auto n = std::make_unique<NodeExpr>();
      n->kind = kind;
      return n;
    }

    Ptr expr() {
      Ptr left = term();
      for (;;) {
        if (accept('+')) {
          left = binary(Kind::kAdd, std::move(left), term());
        } else if (accept('-')) {
          left = binary(Kind::kSub, std::move(left), term());
        } else {
          return left;
        }
      }
    }

    Ptr term() {
      Ptr left = unary();
      while (accept('*')) left = binary(Kind::kMul, std::move(left), unary());
      return left;
    }

    Ptr unary() {
      if (accept('-')) {
        Ptr n = make(Kind::kNeg);
        n->args.push_back(unary());
        return n;
      }
      return atom();
    }

    static Ptr binary(Kind kind, Ptr a, Ptr b) {
      Ptr n = make(kind);
      n->args.push_back(std::move(a));
      n->args.push_back(std::move(b));
      return n;
    }

    int integer() {
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (start == pos) fail("expected an index");
      return std::stoi(std::string(s.substr(start, pos - start)));
    }

    Ptr atom() {
      skip();
      if (pos >= s.size()) fail("unexpected end of expression");
      char c = s[pos];
      if (c == '(') {
        ++pos;
        Ptr inner = expr();
        if (!accept(')')) fail("expected ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t start = pos;
        while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' || s[pos] == '/')) {
          ++pos;
        }
        Ptr n = make(Kind::kNumber);
        try {
          n->number = parse_rational(s.substr(start, pos - start));
        } catch (const Error&) {
          pos = start;
          fail("malformed number");
        }
        return n;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        std::string_view word = s.substr(start, pos - start);
        if (word == "min" || word == "max" || word == "abs") {
          Kind kind = word == "min" ? Kind::kMin : word == "max" ? Kind::kMax : Kind::kAbs;
          Ptr n = make(kind);
          if (!accept('(')) fail("expected '(' after " + std::string(word));
          n->args.push_back(expr());
          while (accept(',')) n->args.push_back(expr());
          if (!accept(')')) fail("expected ')'");
          if (kind == Kind::kAbs && n->args.size() != 1) fail("abs takes one argument");
          if (kind != Kind::kAbs && n->args.size() < 2) fail(std::string(word) + " takes at least two arguments");
          return n;
        }
        if (word == "t") return make(Kind::kTime);
        if (word == "x") {
          Ptr n = make(Kind::kRef);
          if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            n->time = integer();
            if (n->time < 1) fail("time index must be at least 1");
          }
          if (pos < s.size() && s[pos] == '_') {
            ++pos;
            n->coord = integer();
            if (n->coord < 1) fail("coordinate index must be at least 1");
          }
          return n;
        }
        pos = start;
        fail("unknown identifier '" + std::string(word) + "'");
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  Rational eval(const NodeExpr& n, const Path& prefix) const {
    switch (n.kind) {
      case Kind::kNumber:
        return n.number;
      case Kind::kTime:
        return Rational(static_cast<long>(prefix.size()));
      case Kind::kRef: {
        int t = n.time == 0 ? static_cast<int>(prefix.size()) : n.time;
        if (t > static_cast<int>(prefix.size())) {
          throw Error(ErrorCode::kExpression, "payoff '" + source_ + "' references x" + std::to_string(t) +
                                                  " at time " + std::to_string(prefix.size()));
        }
        const Value& v = prefix[t - 1];
        if (n.coord == 0) {
          if (v.size() != 1) {
            throw Error(ErrorCode::kExpression, "payoff '" + source_ + "' needs a coordinate index for d = " +
                                                    std::to_string(v.size()));
          }
          return v[0];
        }
        if (n.coord > static_cast<int>(v.size())) {
          throw Error(ErrorCode::kExpression, "payoff '" + source_ + "' references coordinate " +
                                                  std::to_string(n.coord) + " but d = " + std::to_string(v.size()));
        }
        return v[n.coord - 1];
      }
      case Kind::kAdd:
        return eval(*n.args[0], prefix) + eval(*n.args[1], prefix);
      case Kind::kSub:
        return eval(*n.args[0], prefix) - eval(*n.args[1], prefix);
      case Kind::kMul:
        return eval(*n.args[0], prefix) * eval(*n.args[1], prefix);
      case Kind::kNeg:
        return -eval(*n.args[0], prefix);
      case Kind::kAbs:
        return abs(eval(*n.args[0], prefix));
      case Kind::kMin:
      case Kind::kMax: {
        Rational best = eval(*n.args[0], prefix);
        for (std::size_t i = 1; i < n.args.size(); ++i) {
          Rational x = eval(*n.args[i], prefix);
          if (n.kind == Kind::kMin ? x < best : x > best) best = x;
        }
        return best;
      }
    }
    return 0;
  }

  std::string source_;
  std::shared_ptr<const NodeExpr> root_;
};

// Payoffs f_1..f_N with a declared Lipschitz constant with respect to the
// l^1 path metric on (x_1, ..., x_t).
struct PayoffSpec {
  std::vector<Expression> per_time;  // one expression for every t, or exactly N
  double lipschitz = 1.0;

  static PayoffSpec parse(const std::string& text, double lipschitz = 1.0) {
    if (!(lipschitz > 0)) throw Error(ErrorCode::kInvalidArgument, "Lipschitz constant must be positive");
    PayoffSpec spec;
    spec.lipschitz = lipschitz;
    std::size_t start = 0;
    for (;;) {
      std::size_t end = text.find(';', start);
      spec.per_time.push_back(Expression::parse(text.substr(start, end - start)));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return spec;
  }

  Rational evaluate(const Path& prefix) const {
    if (per_time.size() == 1) return per_time[0].evaluate(prefix);
    if (prefix.size() > per_time.size()) {
      throw Error(ErrorCode::kExpression, "payoff defines " + std::to_string(per_time.size()) + " times, needed " +
                                              std::to_string(prefix.size()));
    }
    return per_time[prefix.size() - 1].evaluate(prefix);
  }

  void check_horizon(int N) const {
    if (per_time.size() != 1 && per_time.size() != static_cast<std::size_t>(N)) {
      throw Error(ErrorCode::kExpression, "payoff defines " + std::to_string(per_time.size()) +
                                              " expressions for N = " + std::to_string(N));
    }
  }
};

struct LipschitzSample {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_ratio = 0;
};

// Spot check of the declared constant on random pairs of prefixes built from
// the given value pool perturbed by small rationals.
inline LipschitzSample sample_lipschitz(const PayoffSpec& payoff, const std::vector<Value>& pool, int N, int d,
                                        std::uint64_t seed, std::size_t pairs = 200) {
  LipschitzSample out;
  if (pool.empty()) return out;
  std::mt19937_64 rng(seed);
  auto draw = [&]() {
    Value v = pool[rng() % pool.size()];
    for (auto& x : v) x += Rational(static_cast<long>(rng() % 9) - 4, 4);
    return v;
  };
  for (std::size_t k = 0; k < pairs; ++k) {
    int t = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(N));
    Path x;
    Path y;
    Rational dist = 0;
    for (int s = 0; s < t; ++s) {
      x.push_back(draw());
      y.push_back(draw());
      for (int i = 0; i < d; ++i) dist += abs(x.back()[i] - y.back()[i]);
    }
    Rational gap = abs(payoff.evaluate(x) - payoff.evaluate(y));
    ++out.samples;
    if (dist == 0) {
      if (gap != 0) ++out.violations;
      continue;
    }
    double ratio = to_double(gap / dist);
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (ratio > payoff.lipschitz + 1e-12) ++out.violations;
  }
  return out;
}

}  // namespace adt
