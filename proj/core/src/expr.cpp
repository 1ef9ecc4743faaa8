#include "hybrid/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

namespace hybrid::expr {

std::string Diagnostic::to_string() const {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "\n";
    out += d.to_string();
  }
  return out;
}

}  // namespace

DiagnosticError::DiagnosticError(std::vector<Diagnostic> diags)
    : Error(join_diagnostics(diags)), diags_(std::move(diags)) {}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

enum class Tok { number, name, op, lparen, rparen, comma, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double value = 0.0;
  Position pos;
};

class Lexer {
 public:
  Lexer(std::string_view text, Position origin) : text_(text), origin_(origin) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.pos = position();
      if (i_ >= text_.size()) {
        t.kind = Tok::end;
        out.push_back(t);
        return out;
      }
      const char c = text_[i_];
      if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < text_.size() &&
                                                          std::isdigit(static_cast<unsigned char>(text_[i_ + 1])))) {
        t.kind = Tok::number;
        t.text = read_number();
        t.value = std::strtod(t.text.c_str(), nullptr);
        if (!std::isfinite(t.value)) throw DiagnosticError({t.pos, "number out of range: " + t.text});
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::name;
        const std::size_t start = i_;
        while (i_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
          ++i_;
        }
        t.text = std::string(text_.substr(start, i_ - start));
      } else if (c == '(') {
        t.kind = Tok::lparen;
        ++i_;
      } else if (c == ')') {
        t.kind = Tok::rparen;
        ++i_;
      } else if (c == ',') {
        t.kind = Tok::comma;
        ++i_;
      } else {
        t.kind = Tok::op;
        t.text = read_op(t.pos);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void skip_space() {
    while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
  }

  Position position() const {
    std::size_t col = 0;
    for (std::size_t k = 0; k < i_; ++k) {
      if ((static_cast<unsigned char>(text_[k]) & 0xC0) != 0x80) ++col;
    }
    return {origin_.line, origin_.column + col};
  }

  std::string read_number() {
    const std::size_t start = i_;
    auto digits = [&] {
      while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
    };
    digits();
    if (i_ < text_.size() && text_[i_] == '.') {
      ++i_;
      digits();
    }
    if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
      if (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) {
        i_ = j;
        digits();
      }
    }
    return std::string(text_.substr(start, i_ - start));
  }

  std::string read_op(Position pos) {
    static const std::pair<std::string_view, std::string_view> ops[] = {
        {"<=", "<="}, {">=", ">="}, {"==", "="}, {"&&", "and"}, {"||", "or"},
        {"\xE2\x89\xA4", "<="}, {"\xE2\x89\xA5", ">="}, {"+", "+"}, {"-", "-"}, {"*", "*"},
        {"/", "/"}, {"^", "^"}, {"<", "<"}, {">", ">"}, {"=", "="}, {"!", "not"}};
    for (const auto& [spelling, canon] : ops) {
      if (text_.substr(i_, spelling.size()) == spelling) {
        i_ += spelling.size();
        return std::string(canon);
      }
    }
    std::size_t len = 1;
    const auto lead = static_cast<unsigned char>(text_[i_]);
    if (lead >= 0xC0) {
      while (i_ + len < text_.size() && (static_cast<unsigned char>(text_[i_ + len]) & 0xC0) == 0x80) ++len;
    }
    throw DiagnosticError({pos, "unexpected character '" + std::string(text_.substr(i_, len)) + "'"});
  }

  std::string_view text_;
  Position origin_;
  std::size_t i_ = 0;
};

struct Function {
  std::string_view name;
  std::size_t min_args;
  std::size_t max_args;
};

constexpr Function kFunctions[] = {
    {"pow", 2, 2},  {"sqrt", 1, 1}, {"log", 1, 1}, {"exp", 1, 1},       {"abs", 1, 1},
    {"sign", 1, 1}, {"min", 2, 64}, {"max", 2, 64}, {"piecewise", 3, 3},
};

const char* type_name(Type t) { return t == Type::real ? "real" : "boolean"; }

class Parser {
 public:
  Parser(std::vector<Token> toks, const Context& ctx) : toks_(std::move(toks)), ctx_(ctx) {}

  NodePtr whole() {
    NodePtr n = expression();
    if (peek().kind != Tok::end) fail(peek().pos, "unexpected " + describe(peek()));
    return n;
  }

  std::vector<NodePtr> tuple() {
    std::vector<NodePtr> out;
    expect(Tok::lparen, "'('");
    if (peek().kind != Tok::rparen) {
      while (true) {
        NodePtr n = expression();
        require(*n, Type::real);
        out.push_back(std::move(n));
        if (peek().kind == Tok::comma) {
          ++k_;
          continue;
        }
        break;
      }
    }
    expect(Tok::rparen, "',' or ')'");
    if (peek().kind != Tok::end) fail(peek().pos, "unexpected " + describe(peek()) + " after tuple");
    return out;
  }

 private:
  const Token& peek() const { return toks_[k_]; }
  bool at_op(std::string_view op) const { return peek().kind == Tok::op && peek().text == op; }
  bool at_name(std::string_view name) const { return peek().kind == Tok::name && peek().text == name; }

  [[noreturn]] void fail(Position pos, std::string msg) const {
    throw DiagnosticError(Diagnostic{pos, std::move(msg)});
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::end:
        return "end of expression";
      case Tok::lparen:
        return "'('";
      case Tok::rparen:
        return "')'";
      case Tok::comma:
        return "','";
      default:
        return "'" + t.text + "'";
    }
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(peek().pos, std::string("expected ") + what + ", found " + describe(peek()));
    ++k_;
  }

  void require(const Node& n, Type t) const {
    if (n.type != t) {
      fail(n.pos, std::string("expected a ") + type_name(t) + " expression, found " + type_name(n.type));
    }
  }

  static NodePtr make(Op op, Type type, Position pos, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->type = type;
    n->pos = pos;
    n->args = std::move(args);
    return n;
  }

  NodePtr expression() { return disjunction(); }

  NodePtr disjunction() {
    NodePtr lhs = conjunction();
    while (at_name("or") || at_op("or")) {
      const Position pos = peek().pos;
      ++k_;
      NodePtr rhs = conjunction();
      require(*lhs, Type::boolean);
      require(*rhs, Type::boolean);
      lhs = make(Op::logical_or, Type::boolean, pos, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr conjunction() {
    NodePtr lhs = negation();
    while (at_name("and") || at_op("and")) {
      const Position pos = peek().pos;
      ++k_;
      NodePtr rhs = negation();
      require(*lhs, Type::boolean);
      require(*rhs, Type::boolean);
      lhs = make(Op::logical_and, Type::boolean, pos, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr negation() {
    if (at_name("not") || at_op("not")) {
      const Position pos = peek().pos;
      ++k_;
      NodePtr arg = negation();
      require(*arg, Type::boolean);
      return make(Op::logical_not, Type::boolean, pos, {arg});
    }
    return comparison();
  }

  NodePtr comparison() {
    NodePtr lhs = sum();
    static const std::pair<std::string_view, Op> cmps[] = {
        {"<", Op::lt}, {"<=", Op::le}, {"=", Op::eq}, {">=", Op::ge}, {">", Op::gt}};
    for (const auto& [text, op] : cmps) {
      if (at_op(text)) {
        const Position pos = peek().pos;
        ++k_;
        NodePtr rhs = sum();
        require(*lhs, Type::real);
        require(*rhs, Type::real);
        for (const auto& [t2, op2] : cmps) {
          (void)op2;
          if (at_op(t2)) fail(peek().pos, "comparisons do not chain; use 'and'");
        }
        return make(op, Type::boolean, pos, {lhs, rhs});
      }
    }
    return lhs;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    while (at_op("+") || at_op("-")) {
      const Position pos = peek().pos;
      const Op op = peek().text == "+" ? Op::add : Op::sub;
      ++k_;
      NodePtr rhs = product();
      require(*lhs, Type::real);
      require(*rhs, Type::real);
      lhs = make(op, Type::real, pos, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr product() {
    NodePtr lhs = unary();
    while (at_op("*") || at_op("/")) {
      const Position pos = peek().pos;
      const Op op = peek().text == "*" ? Op::mul : Op::div;
      ++k_;
      NodePtr rhs = unary();
      require(*lhs, Type::real);
      require(*rhs, Type::real);
      lhs = make(op, Type::real, pos, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr unary() {
    if (at_op("-")) {
      const Position pos = peek().pos;
      ++k_;
      NodePtr arg = unary();
      require(*arg, Type::real);
      return make(Op::neg, Type::real, pos, {arg});
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (at_op("^")) {
      const Position pos = peek().pos;
      ++k_;
      NodePtr exponent = unary();
      require(*base, Type::real);
      require(*exponent, Type::real);
      return make(Op::pow, Type::real, pos, {base, exponent});
    }
    return base;
  }

  NodePtr atom() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::number: {
        ++k_;
        auto n = make(Op::number, Type::real, t.pos);
        std::const_pointer_cast<Node>(n)->value = t.value;
        return n;
      }
      case Tok::lparen: {
        ++k_;
        NodePtr inner = expression();
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::name:
        ++k_;
        if (peek().kind == Tok::lparen) return call(t);
        return name(t);
      default:
        fail(t.pos, "expected an expression, found " + describe(t));
    }
  }

  NodePtr call(const Token& t) {
    const Function* fn = nullptr;
    for (const auto& f : kFunctions) {
      if (f.name == t.text) fn = &f;
    }
    if (!fn) fail(t.pos, "unknown function '" + t.text + "'");
    ++k_;
    std::vector<NodePtr> args;
    if (peek().kind != Tok::rparen) {
      while (true) {
        args.push_back(expression());
        if (peek().kind != Tok::comma) break;
        ++k_;
      }
    }
    expect(Tok::rparen, "',' or ')'");
    if (args.size() < fn->min_args || args.size() > fn->max_args) {
      fail(t.pos, t.text + " takes " +
                      (fn->min_args == fn->max_args ? std::to_string(fn->min_args)
                                                    : "at least " + std::to_string(fn->min_args)) +
                      " argument(s), got " + std::to_string(args.size()));
    }
    Type type = Type::real;
    if (fn->name == "piecewise") {
      require(*args[0], Type::boolean);
      type = args[1]->type;
      if (args[2]->type != type) {
        fail(args[2]->pos, std::string("piecewise branches differ in type: ") + type_name(type) + " and " +
                               type_name(args[2]->type));
      }
    } else {
      for (const auto& a : args) require(*a, Type::real);
    }
    auto n = std::const_pointer_cast<Node>(
        make(fn->name == "piecewise" ? Op::piecewise : Op::call, type, t.pos, std::move(args)));
    n->name = t.text;
    return n;
  }

  NodePtr name(const Token& t) {
    auto n = std::make_shared<Node>();
    n->pos = t.pos;
    n->name = t.text;
    const char family = t.text[0];
    const bool indexed = t.text.size() > 1 && (family == 'x' || family == 'y') &&
                         t.text.find_first_not_of("0123456789", 1) == std::string::npos;
    if (indexed) {
      if (family == 'y' && !ctx_.allow_y) fail(t.pos, "'" + t.text + "' is only available in relations");
      if (t.text.size() > 2 && t.text[1] == '0') fail(t.pos, "leading zero in coordinate '" + t.text + "'");
      const std::size_t idx = std::stoul(t.text.substr(1));
      const std::size_t dim = family == 'x' ? ctx_.x_dim : ctx_.y_dim;
      if (idx >= dim) {
        fail(t.pos, "coordinate '" + t.text + "' out of range for dimension " + std::to_string(dim));
      }
      n->op = Op::variable;
      n->family = family;
      n->index = idx;
      n->name.clear();
      return n;
    }
    if (ctx_.params) {
      if (const auto it = ctx_.params->find(t.text); it != ctx_.params->end()) {
        n->op = Op::parameter;
        n->value = it->second;
        return n;
      }
    }
    n->op = Op::constant;
    if (t.text == "inf") {
      n->value = std::numeric_limits<double>::infinity();
    } else if (t.text == "pi") {
      n->value = std::numbers::pi;
    } else if (t.text == "true" || t.text == "false") {
      n->type = Type::boolean;
      n->value = t.text == "true" ? 1.0 : 0.0;
    } else {
      fail(t.pos, "unknown identifier '" + t.text + "'");
    }
    return n;
  }

  std::vector<Token> toks_;
  const Context& ctx_;
  std::size_t k_ = 0;
};

[[noreturn]] void domain_error(const Node& n, const std::string& what, double arg) {
  throw Error(std::to_string(n.pos.line) + ":" + std::to_string(n.pos.column) + ": " + what + " " +
              format_number(arg));
}

double coordinate(const Node& n, const Vector& x, const Vector& y) {
  const Vector& v = n.family == 'x' ? x : y;
  if (static_cast<Eigen::Index>(n.index) >= v.size()) {
    throw Error("coordinate " + std::string(1, n.family) + std::to_string(n.index) +
                " not supplied (got dimension " + std::to_string(v.size()) + ")");
  }
  return v[static_cast<Eigen::Index>(n.index)];
}

double eval_node(const Node& n, const Vector& x, const Vector& y);

bool truth(const Node& n, const Vector& x, const Vector& y) {
  switch (n.op) {
    case Op::constant:
    case Op::parameter:
      return n.value != 0.0;
    case Op::lt:
      return eval_node(*n.args[0], x, y) < eval_node(*n.args[1], x, y);
    case Op::le:
      return eval_node(*n.args[0], x, y) <= eval_node(*n.args[1], x, y);
    case Op::eq:
      return eval_node(*n.args[0], x, y) == eval_node(*n.args[1], x, y);
    case Op::ge:
      return eval_node(*n.args[0], x, y) >= eval_node(*n.args[1], x, y);
    case Op::gt:
      return eval_node(*n.args[0], x, y) > eval_node(*n.args[1], x, y);
    case Op::logical_and:
      return truth(*n.args[0], x, y) && truth(*n.args[1], x, y);
    case Op::logical_or:
      return truth(*n.args[0], x, y) || truth(*n.args[1], x, y);
    case Op::logical_not:
      return !truth(*n.args[0], x, y);
    case Op::piecewise:
      return truth(*n.args[0], x, y) ? truth(*n.args[1], x, y) : truth(*n.args[2], x, y);
    default:
      throw Error("internal: real node evaluated as boolean");
  }
}

Op negated(Op op) {
  switch (op) {
    case Op::lt:
      return Op::ge;
    case Op::le:
      return Op::gt;
    case Op::ge:
      return Op::lt;
    case Op::gt:
      return Op::le;
    default:
      return op;
  }
}

bool relaxed(const Node& n, const Vector& x, const Vector& y, double tol, bool negate) {
  switch (n.op) {
    case Op::lt:
    case Op::le:
    case Op::eq:
    case Op::ge:
    case Op::gt: {
      const double a = eval_node(*n.args[0], x, y);
      const double b = eval_node(*n.args[1], x, y);
      const Op op = negate ? negated(n.op) : n.op;
      if (n.op == Op::eq) return negate ? true : std::abs(a - b) <= tol;
      return (op == Op::lt || op == Op::le) ? a - b <= tol : b - a <= tol;
    }
    case Op::logical_and:
    case Op::logical_or: {
      const bool conj = (n.op == Op::logical_and) != negate;
      const bool l = relaxed(*n.args[0], x, y, tol, negate);
      if (conj && !l) return false;
      if (!conj && l) return true;
      return relaxed(*n.args[1], x, y, tol, negate);
    }
    case Op::logical_not:
      return relaxed(*n.args[0], x, y, tol, !negate);
    case Op::piecewise:
      return truth(*n.args[0], x, y) ? relaxed(*n.args[1], x, y, tol, negate)
                                     : relaxed(*n.args[2], x, y, tol, negate);
    default:
      return truth(n, x, y) != negate;
  }
}

double call(const Node& n, const std::vector<double>& a) {
  const std::string& f = n.name;
  if (f == "pow") {
    const double r = std::pow(a[0], a[1]);
    if (std::isnan(r)) domain_error(n, "pow of negative base to a non-integer power:", a[0]);
    return r;
  }
  if (f == "sqrt") {
    if (a[0] < 0.0) domain_error(n, "sqrt of negative argument", a[0]);
    return std::sqrt(a[0]);
  }
  if (f == "log") {
    if (!(a[0] > 0.0)) domain_error(n, "log of non-positive argument", a[0]);
    return std::log(a[0]);
  }
  if (f == "exp") return std::exp(a[0]);
  if (f == "abs") return std::abs(a[0]);
  if (f == "sign") return a[0] > 0.0 ? 1.0 : (a[0] < 0.0 ? -1.0 : 0.0);
  if (f == "min") return *std::min_element(a.begin(), a.end());
  if (f == "max") return *std::max_element(a.begin(), a.end());
  throw Error("internal: unknown function " + f);
}

double eval_node(const Node& n, const Vector& x, const Vector& y) {
  switch (n.op) {
    case Op::number:
    case Op::constant:
    case Op::parameter:
      return n.value;
    case Op::variable:
      return coordinate(n, x, y);
    case Op::neg:
      return -eval_node(*n.args[0], x, y);
    case Op::add:
      return eval_node(*n.args[0], x, y) + eval_node(*n.args[1], x, y);
    case Op::sub:
      return eval_node(*n.args[0], x, y) - eval_node(*n.args[1], x, y);
    case Op::mul:
      return eval_node(*n.args[0], x, y) * eval_node(*n.args[1], x, y);
    case Op::div: {
      const double d = eval_node(*n.args[1], x, y);
      if (d == 0.0) domain_error(n, "division by", d);
      return eval_node(*n.args[0], x, y) / d;
    }
    case Op::pow: {
      const double b = eval_node(*n.args[0], x, y);
      const double r = std::pow(b, eval_node(*n.args[1], x, y));
      if (std::isnan(r)) domain_error(n, "power of negative base to a non-integer exponent:", b);
      return r;
    }
    case Op::call: {
      std::vector<double> a;
      a.reserve(n.args.size());
      for (const auto& c : n.args) a.push_back(eval_node(*c, x, y));
      return call(n, a);
    }
    case Op::piecewise:
      return truth(*n.args[0], x, y) ? eval_node(*n.args[1], x, y) : eval_node(*n.args[2], x, y);
    default:
      throw Error("internal: boolean node evaluated as real");
  }
}

/// Forward differentiation: value plus gradient with respect to x.
struct Dual {
  double v = 0.0;
  Vector g;
};

Dual diff(const Node& n, const Vector& x, const Vector& empty) {
  const auto dim = x.size();
  switch (n.op) {
    case Op::number:
    case Op::constant:
    case Op::parameter:
      return {n.value, Vector::Zero(dim)};
    case Op::variable: {
      Dual d{coordinate(n, x, empty), Vector::Zero(dim)};
      if (n.family == 'x') d.g[static_cast<Eigen::Index>(n.index)] = 1.0;
      return d;
    }
    case Op::neg: {
      Dual a = diff(*n.args[0], x, empty);
      return {-a.v, -a.g};
    }
    case Op::add:
    case Op::sub: {
      const Dual a = diff(*n.args[0], x, empty);
      const Dual b = diff(*n.args[1], x, empty);
      if (n.op == Op::add) return {a.v + b.v, a.g + b.g};
      return {a.v - b.v, a.g - b.g};
    }
    case Op::mul: {
      const Dual a = diff(*n.args[0], x, empty);
      const Dual b = diff(*n.args[1], x, empty);
      return {a.v * b.v, b.v * a.g + a.v * b.g};
    }
    case Op::div: {
      const Dual a = diff(*n.args[0], x, empty);
      const Dual b = diff(*n.args[1], x, empty);
      if (b.v == 0.0) domain_error(n, "division by", b.v);
      return {a.v / b.v, (b.v * a.g - a.v * b.g) / (b.v * b.v)};
    }
    case Op::pow: {
      const Dual a = diff(*n.args[0], x, empty);
      const Dual b = diff(*n.args[1], x, empty);
      const double r = std::pow(a.v, b.v);
      if (std::isnan(r)) domain_error(n, "power of negative base to a non-integer exponent:", a.v);
      Vector g = a.v == 0.0 && b.v == 0.0 ? Vector::Zero(dim) : Vector(b.v * std::pow(a.v, b.v - 1.0) * a.g);
      if (!b.g.isZero(0.0)) g += r * std::log(a.v) * b.g;
      return {r, g};
    }
    case Op::piecewise:
      return truth(*n.args[0], x, empty) ? diff(*n.args[1], x, empty) : diff(*n.args[2], x, empty);
    case Op::call: {
      std::vector<Dual> a;
      for (const auto& c : n.args) a.push_back(diff(*c, x, empty));
      const std::string& f = n.name;
      std::vector<double> vals;
      for (const auto& d : a) vals.push_back(d.v);
      const double v = call(n, vals);
      if (f == "pow") {
        Vector g = vals[0] == 0.0 && vals[1] == 0.0
                       ? Vector::Zero(dim)
                       : Vector(vals[1] * std::pow(vals[0], vals[1] - 1.0) * a[0].g);
        if (!a[1].g.isZero(0.0)) g += v * std::log(vals[0]) * a[1].g;
        return {v, g};
      }
      if (f == "sqrt") return {v, a[0].g / (2.0 * v)};
      if (f == "log") return {v, a[0].g / vals[0]};
      if (f == "exp") return {v, v * a[0].g};
      if (f == "abs") return {v, (vals[0] < 0.0 ? -1.0 : 1.0) * a[0].g};
      if (f == "sign") return {v, Vector::Zero(dim)};
      // min and max: gradient of the first argument attaining the extremum.
      for (const auto& d : a) {
        if (d.v == v) return {v, d.g};
      }
      return {v, Vector::Zero(dim)};
    }
    default:
      throw Error("internal: boolean node differentiated");
  }
}

int precedence(const Node& n) {
  switch (n.op) {
    case Op::logical_or:
      return 1;
    case Op::logical_and:
      return 2;
    case Op::logical_not:
      return 3;
    case Op::lt:
    case Op::le:
    case Op::eq:
    case Op::ge:
    case Op::gt:
      return 4;
    case Op::add:
    case Op::sub:
      return 5;
    case Op::mul:
    case Op::div:
      return 6;
    case Op::neg:
      return 7;
    case Op::pow:
      return 8;
    default:
      return 9;
  }
}

std::string print(const Node& n);

std::string wrap(const Node& n, bool paren) { return paren ? "(" + print(n) + ")" : print(n); }

std::string print(const Node& n) {
  const int p = precedence(n);
  auto binary = [&](const char* op) {
    return wrap(*n.args[0], precedence(*n.args[0]) < p) + " " + op + " " +
           wrap(*n.args[1], precedence(*n.args[1]) <= p);
  };
  switch (n.op) {
    case Op::number:
      return format_number(n.value);
    case Op::constant:
    case Op::parameter:
      return n.name;
    case Op::variable:
      return std::string(1, n.family) + std::to_string(n.index);
    case Op::neg:
      return "-" + wrap(*n.args[0], precedence(*n.args[0]) < 7);
    case Op::logical_not:
      return "not " + wrap(*n.args[0], precedence(*n.args[0]) < 3);
    case Op::add:
      return binary("+");
    case Op::sub:
      return binary("-");
    case Op::mul:
      return binary("*");
    case Op::div:
      return binary("/");
    case Op::lt:
      return binary("<");
    case Op::le:
      return binary("<=");
    case Op::eq:
      return binary("=");
    case Op::ge:
      return binary(">=");
    case Op::gt:
      return binary(">");
    case Op::logical_and:
      return binary("and");
    case Op::logical_or:
      return binary("or");
    case Op::pow:
      return wrap(*n.args[0], precedence(*n.args[0]) <= 8) + " ^ " +
             wrap(*n.args[1], precedence(*n.args[1]) < 7);
    case Op::call:
    case Op::piecewise: {
      std::string out = n.name + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) out += (i ? ", " : "") + print(*n.args[i]);
      return out + ")";
    }
  }
  return {};
}

bool same(const Node& a, const Node& b) {
  if (a.op != b.op || a.type != b.type || a.args.size() != b.args.size()) return false;
  switch (a.op) {
    case Op::number:
      if (a.value != b.value) return false;
      break;
    case Op::variable:
      if (a.family != b.family || a.index != b.index) return false;
      break;
    case Op::constant:
    case Op::parameter:
    case Op::call:
    case Op::piecewise:
      if (a.name != b.name) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

}  // namespace

Expression Expression::parse(std::string_view text, const Context& ctx, Position origin) {
  Parser p(Lexer(text, origin).run(), ctx);
  return Expression(p.whole());
}

std::vector<Expression> Expression::parse_tuple(std::string_view text, const Context& ctx, Position origin) {
  Parser p(Lexer(text, origin).run(), ctx);
  std::vector<Expression> out;
  for (auto& n : p.tuple()) out.push_back(Expression(std::move(n)));
  return out;
}

double Expression::eval(const Vector& x, const Vector& y) const {
  if (root_->type != Type::real) throw Error("boolean expression evaluated as real");
  return eval_node(*root_, x, y);
}

bool Expression::test(const Vector& x, const Vector& y) const {
  if (root_->type != Type::boolean) throw Error("real expression evaluated as boolean");
  return truth(*root_, x, y);
}

bool Expression::test(const Vector& x, const Vector& y, double tol) const {
  if (tol <= 0.0) return test(x, y);
  if (root_->type != Type::boolean) throw Error("real expression evaluated as boolean");
  return relaxed(*root_, x, y, tol, false);
}

double Expression::eval_gradient(const Vector& x, Vector& grad) const {
  if (root_->type != Type::real) throw Error("boolean expression differentiated");
  Dual d = diff(*root_, x, Vector());
  grad = std::move(d.g);
  return d.v;
}

std::string Expression::to_string() const { return root_ ? print(*root_) : std::string(); }

bool operator==(const Expression& a, const Expression& b) {
  if (!a.root_ || !b.root_) return !a.root_ && !b.root_;
  return same(*a.root_, *b.root_);
}

}  // namespace hybrid::expr
