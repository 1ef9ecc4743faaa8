#include "hybrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

namespace hybrid::scn {

using expr::Context;
using expr::Diagnostic;
using expr::DiagnosticError;
using expr::format_number;

std::string_view to_string(AnalysisKind k) {
  switch (k) {
    case AnalysisKind::simulate:
      return "simulate";
    case AnalysisKind::theorem:
      return "theorem";
    case AnalysisKind::invariance:
      return "invariance";
    case AnalysisKind::stability:
      return "stability";
    case AnalysisKind::transport:
      return "transport";
  }
  return "?";
}

std::optional<double> AnalysisDecl::option(std::string_view key) const {
  for (const auto& [k, v] : options) {
    if (k == key) return v;
  }
  return std::nullopt;
}

namespace {

struct Line {
  std::size_t number = 0;
  std::size_t indent = 0;
  std::string text;
};

/// Drops comments and blank lines; keeps columns intact.
std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string raw(text.substr(start, end - start));
    ++number;
    start = end + 1;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    bool quoted = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') quoted = !quoted;
      if (raw[i] == '#' && !quoted) {
        raw.resize(i);
        break;
      }
    }
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.pop_back();
    const std::size_t indent = raw.find_first_not_of(" \t");
    if (indent == std::string::npos) continue;
    out.push_back({number, indent, std::move(raw)});
    if (end == text.size()) break;
  }
  return out;
}

/// Reference to a declaration that failed earlier; suppresses cascades.
struct Skip {};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool label_char(char c) { return ident_char(c) || c == '*'; }

class Cursor {
 public:
  explicit Cursor(const Line& line) : line_(line), i_(line.indent) {}

  Position pos() const { return {line_.number, i_ + 1}; }
  Position pos_at(std::size_t i) const { return {line_.number, i + 1}; }

  void skip_ws() {
    while (i_ < text().size() && std::isspace(static_cast<unsigned char>(text()[i_]))) ++i_;
  }

  bool done() {
    skip_ws();
    return i_ >= text().size();
  }

  char peek() {
    skip_ws();
    return i_ < text().size() ? text()[i_] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg) { fail_at(pos(), msg); }
  [[noreturn]] static void fail_at(Position p, const std::string& msg) {
    throw DiagnosticError(Diagnostic{p, msg});
  }

  /// Consumes `tok` if it is next; words must end at a word boundary.
  bool accept(std::string_view tok) {
    skip_ws();
    if (text().compare(i_, tok.size(), tok) != 0) return false;
    if (ident_char(tok.back()) && i_ + tok.size() < text().size() && ident_char(text()[i_ + tok.size()])) {
      return false;
    }
    i_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'" + found());
  }

  std::string ident(const char* what = "a name") {
    skip_ws();
    const std::size_t start = i_;
    if (i_ < text().size() && (std::isalpha(static_cast<unsigned char>(text()[i_])) || text()[i_] == '_')) {
      while (i_ < text().size() && (ident_char(text()[i_]) || text()[i_] == '.')) ++i_;
    }
    if (start == i_) fail(std::string("expected ") + what + found());
    return text().substr(start, i_ - start);
  }

  /// Node, edge or list label: bare [A-Za-z0-9_*]+ or a double-quoted string.
  std::string label(const char* what = "a label") {
    skip_ws();
    if (i_ < text().size() && text()[i_] == '"') {
      std::string out;
      ++i_;
      while (i_ < text().size() && text()[i_] != '"') {
        if (text()[i_] == '\\' && i_ + 1 < text().size()) ++i_;
        out += text()[i_++];
      }
      if (i_ >= text().size()) fail("unterminated string");
      ++i_;
      return out;
    }
    const std::size_t start = i_;
    while (i_ < text().size() && label_char(text()[i_])) ++i_;
    if (start == i_) fail(std::string("expected ") + what + found());
    return text().substr(start, i_ - start);
  }

  /// Text from an opening bracket through its matching closer.
  std::pair<std::string, Position> balanced(char open, char close) {
    skip_ws();
    const Position p = pos();
    if (i_ >= text().size() || text()[i_] != open) fail(std::string("expected '") + open + "'" + found());
    const std::size_t start = i_;
    int depth = 0;
    for (; i_ < text().size(); ++i_) {
      const char c = text()[i_];
      if (c == open) ++depth;
      if (c == close && --depth == 0) {
        ++i_;
        return {text().substr(start, i_ - start), p};
      }
    }
    fail_at(p, std::string("unbalanced '") + open + "'");
  }

  /// Text up to the next top-level occurrence of `stop` (not consumed).
  std::pair<std::string, Position> until(std::string_view stop) {
    skip_ws();
    const Position p = pos();
    const std::size_t start = i_;
    int depth = 0;
    for (std::size_t k = i_; k < text().size(); ++k) {
      const char c = text()[k];
      if (depth == 0 && text().compare(k, stop.size(), stop) == 0) {
        i_ = k;
        return {trimmed(start, k), p};
      }
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
    }
    fail("expected '" + std::string(stop) + "'");
  }

  /// Text up to the first top-level ')' or ']'; consumes the closer.
  std::pair<std::string, Position> until_closer(char& closer) {
    skip_ws();
    const Position p = pos();
    const std::size_t start = i_;
    int depth = 0;
    for (std::size_t k = i_; k < text().size(); ++k) {
      const char c = text()[k];
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') {
        if (depth == 0) {
          closer = c;
          i_ = k + 1;
          return {trimmed(start, k), p};
        }
        --depth;
      }
    }
    fail("expected ')' or ']'");
  }

  std::pair<std::string, Position> rest() {
    skip_ws();
    const Position p = pos();
    std::string s = text().substr(i_);
    i_ = text().size();
    return {s, p};
  }

  void end() {
    if (!done()) fail("unexpected '" + text().substr(i_) + "'");
  }

  std::string trimmed(std::size_t start, std::size_t end) const {
    std::string s = text().substr(start, end - start);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
  }

  std::string found() {
    skip_ws();
    if (i_ >= text().size()) return ", found end of line";
    std::size_t len = 1;
    while (i_ + len < text().size() && ident_char(text()[i_ + len]) && ident_char(text()[i_])) ++len;
    return ", found '" + text().substr(i_, len) + "'";
  }

 private:
  const std::string& text() const { return line_.text; }
  const Line& line_;
  std::size_t i_;
};

std::string quote_label(const std::string& s) {
  bool bare = !s.empty();
  for (char c : s) bare = bare && label_char(c);
  if (bare) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

SmoothMap tuple_map(std::size_t in_dim, std::vector<Expression> exprs) {
  auto shared = std::make_shared<const std::vector<Expression>>(std::move(exprs));
  SmoothMap m;
  m.in_dim = in_dim;
  m.out_dim = shared->size();
  m.evaluate = [shared](const Vector& x) {
    Vector out(static_cast<Eigen::Index>(shared->size()));
    for (std::size_t i = 0; i < shared->size(); ++i) out[static_cast<Eigen::Index>(i)] = (*shared)[i].eval(x);
    return out;
  };
  m.jacobian = [shared, in_dim](const Vector& x) {
    Matrix j(static_cast<Eigen::Index>(shared->size()), static_cast<Eigen::Index>(in_dim));
    Vector g;
    for (std::size_t i = 0; i < shared->size(); ++i) {
      (*shared)[i].eval_gradient(x, g);
      if (g.size() == j.cols()) j.row(static_cast<Eigen::Index>(i)) = g.transpose();
    }
    return j;
  };
  return m;
}

class Loader {
 public:
  explicit Loader(const Overrides& overrides) : overrides_(overrides) {}

  Loaded run(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t k = 0;
    while (k < lines.size()) {
      const Line& head = lines[k];
      std::size_t end = k + 1;
      while (end < lines.size() && lines[end].indent > 0) ++end;
      if (head.indent > 0) {
        diags_.push_back({{head.number, head.indent + 1}, "indented line outside a declaration"});
      } else {
        declaration(head, std::vector<Line>(lines.begin() + static_cast<std::ptrdiff_t>(k) + 1,
                                            lines.begin() + static_cast<std::ptrdiff_t>(end)));
      }
      k = end;
    }
    for (const auto& [name, v] : overrides_) {
      (void)v;
      if (!m_.params.count(name) && !failed_.count(name)) {
        diags_.push_back({{1, 1}, "override for undeclared parameter '" + name + "'"});
      }
    }
    if (!diags_.empty()) throw DiagnosticError(diags_);
    return {std::move(s_), std::move(m_)};
  }

 private:
  void declaration(const Line& head, const std::vector<Line>& body) {
    Cursor c(head);
    const Position at = c.pos();
    std::string name;
    try {
      const std::string kw = c.ident("a declaration keyword");
      if (kw == "scenario") {
        if (!body.empty()) Cursor::fail_at({body[0].number, body[0].indent + 1}, "scenario takes no body");
        s_.name = c.ident();
        c.end();
        return;
      }
      name = c.ident();
      if (name.find('.') != std::string::npos) Cursor::fail_at(at, "declared names may not contain '.'");
      if (names_.count(name)) Cursor::fail_at(at, "'" + name + "' is already declared");
      names_.insert(name);
      if (kw == "param") {
        no_body(body);
        param(c, name, at);
      } else if (kw == "space") {
        space(c, name, at, body);
      } else if (kw == "morphism") {
        morphism(c, name, at, body);
      } else if (kw == "ssub") {
        no_body(body);
        ssub(c, name, at);
      } else if (kw == "control") {
        control(c, name, at, body);
      } else if (kw == "network") {
        network(c, name, at, body);
      } else if (kw == "netmorph") {
        netmorph(c, name, at, body);
      } else if (kw == "flowsys") {
        no_body(body);
        flowsys(c, name, at);
      } else if (kw == "map") {
        no_body(body);
        map(c, name, at);
      } else if (kw == "simulate" || kw == "theorem" || kw == "invariance" || kw == "stability" ||
                 kw == "transport") {
        analysis(c, kw, name, at, body);
      } else {
        Cursor::fail_at(at, "unknown declaration '" + kw + "'");
      }
    } catch (const DiagnosticError& e) {
      for (const auto& d : e.diagnostics()) diags_.push_back(d);
      if (!name.empty()) failed_.insert(name);
    } catch (const Skip&) {
      if (!name.empty()) failed_.insert(name);
    } catch (const Error& e) {
      diags_.push_back({at, e.what()});
      if (!name.empty()) failed_.insert(name);
    }
  }

  static void no_body(const std::vector<Line>& body) {
    if (!body.empty()) Cursor::fail_at({body[0].number, body[0].indent + 1}, "this declaration takes no body");
  }

  Context constants() const {
    Context ctx;
    ctx.params = &m_.params;
    return ctx;
  }

  Context coords(std::size_t dim) const {
    Context ctx = constants();
    ctx.x_dim = dim;
    return ctx;
  }

  double constant(Cursor& c, const std::pair<std::string, Position>& text) {
    (void)c;
    const Expression e = Expression::parse(text.first, constants(), text.second);
    if (e.type() != expr::Type::real) Cursor::fail_at(text.second, "expected a real constant");
    return e.eval(Vector());
  }

  std::vector<Expression> tuple(Cursor& c, const Context& ctx) {
    const auto [text, p] = c.balanced('(', ')');
    return Expression::parse_tuple(text, ctx, p);
  }

  static Vector eval_point(const std::vector<Expression>& t) {
    Vector v(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) v[static_cast<Eigen::Index>(i)] = t[i].eval(Vector());
    return v;
  }

  // ---- references ----------------------------------------------------------

  template <class Map>
  const typename Map::mapped_type& lookup(const Map& m, const std::string& name, Position p, const char* what) {
    if (const auto it = m.find(name); it != m.end()) return it->second;
    if (failed_.count(name) || failed_.count(name.substr(0, name.find('.')))) throw Skip{};
    Cursor::fail_at(p, std::string("unknown ") + what + " '" + name + "'");
  }

  const PhaseSpacePtr& space_ref(const std::string& name, Position p) {
    return lookup(m_.spaces, name, p, "space");
  }

  ProductChain chain_ref(const std::string& name, Position p) {
    if (const auto it = m_.chains.find(name); it != m_.chains.end()) return it->second;
    return ProductChain({space_ref(name, p)});
  }

  static NodeId node_ref(const HybridPhaseSpace& hps, const std::string& name, Position p) {
    if (auto n = hps.graph().find_node(name)) return *n;
    Cursor::fail_at(p, "unknown node '" + name + "' in space '" + hps.name() + "'");
  }

  static EdgeId edge_ref(const HybridPhaseSpace& hps, const std::string& name, Position p) {
    if (auto e = hps.graph().find_edge(name)) return *e;
    Cursor::fail_at(p, "unknown edge '" + name + "' in space '" + hps.name() + "'");
  }

  // ---- declarations --------------------------------------------------------

  void param(Cursor& c, const std::string& name, Position at) {
    if ((name.size() > 1 && (name[0] == 'x' || name[0] == 'y') &&
         name.find_first_not_of("0123456789", 1) == std::string::npos) ||
        name == "inf" || name == "pi" || name == "true" || name == "false") {
      Cursor::fail_at(at, "'" + name + "' is reserved");
    }
    c.expect("=");
    const auto text = c.rest();
    ParamDecl d{name, Expression::parse(text.first, constants(), text.second), at};
    if (d.value.type() != expr::Type::real) Cursor::fail_at(text.second, "parameters are real");
    double value = d.value.eval(Vector());
    if (const auto it = overrides_.find(name); it != overrides_.end()) {
      value = it->second;
      d.value = Expression::parse(format_number(value), constants());
    }
    m_.params[name] = value;
    s_.decls.emplace_back(std::move(d));
  }

  std::vector<IntervalDecl> box(Cursor& c) {
    std::vector<IntervalDecl> out;
    if (c.accept("point")) return out;
    do {
      if (c.accept("R")) {
        std::size_t n = 1;
        if (c.accept("^")) {
          const auto t = c.label("a dimension");
          if (t.find_first_not_of("0123456789") != std::string::npos) c.fail("expected a dimension");
          n = std::stoul(t);
        }
        for (std::size_t i = 0; i < n; ++i) {
          out.push_back({Expression::parse("-inf", constants()), Expression::parse("inf", constants()), false,
                         false});
        }
        continue;
      }
      IntervalDecl iv;
      const char open = c.peek();
      if (open != '(' && open != '[') c.fail("expected an interval, 'R' or 'point'" + c.found());
      iv.lower_closed = open == '[';
      c.accept(std::string(1, open));
      const auto lo = c.until(",");
      c.expect(",");
      char closer = ')';
      const auto hi = c.until_closer(closer);
      iv.upper_closed = closer == ']';
      iv.lower = Expression::parse(lo.first, constants(), lo.second);
      iv.upper = Expression::parse(hi.first, constants(), hi.second);
      for (const auto* e : {&iv.lower, &iv.upper}) {
        if (e->type() != expr::Type::real) Cursor::fail_at(e->root().pos, "interval bounds are real");
      }
      out.push_back(std::move(iv));
    } while (c.accept("x"));
    return out;
  }

  BoxSpace make_box(const std::vector<IntervalDecl>& decl, Position p) {
    std::vector<Interval> ivs;
    for (const auto& d : decl) {
      Interval iv{d.lower.eval(Vector()), d.upper.eval(Vector()), d.lower_closed, d.upper_closed};
      if ((iv.lower_closed && !iv.lower_finite()) || (iv.upper_closed && !iv.upper_finite())) {
        Cursor::fail_at(p, "infinite endpoints must be open");
      }
      ivs.push_back(iv);
    }
    BoxSpace b(std::move(ivs));
    if (!b.well_formed()) Cursor::fail_at(p, "empty or malformed box " + b.to_string());
    return b;
  }

  void space(Cursor& c, const std::string& name, Position at, const std::vector<Line>& body) {
    SpaceDecl d;
    d.name = name;
    d.pos = at;
    if (c.accept("=")) {
      no_body(body);
      c.expect("product");
      c.expect("(");
      std::vector<PhaseSpacePtr> factors;
      do {
        const Position p = c.pos();
        d.factors.push_back(c.ident("a space"));
        factors.push_back(space_ref(d.factors.back(), p));
      } while (c.accept(","));
      c.expect(")");
      c.end();
      ProductChain chain(factors);
      m_.spaces[name] = chain.space();
      m_.chains.emplace(name, chain);
      s_.decls.emplace_back(std::move(d));
      return;
    }
    c.end();
    HybridPhaseSpace::Builder b(name);
    std::vector<BoxSpace> boxes;
    for (const Line& line : body) {
      Cursor l(line);
      const Position p = l.pos();
      const std::string kw = l.ident("node, edge or pair");
      if (kw == "node") {
        NodeDecl n;
        n.pos = p;
        n.name = l.label("a node name");
        for (const auto& other : d.nodes) {
          if (other.name == n.name) Cursor::fail_at(p, "duplicate node '" + n.name + "'");
        }
        l.expect(":");
        n.box = box(l);
        l.end();
        boxes.push_back(make_box(n.box, p));
        d.nodes.push_back(std::move(n));
      } else if (kw == "edge") {
        EdgeDecl e;
        e.pos = p;
        e.name = l.label("an edge name");
        l.expect(":");
        e.src = l.label("a node");
        l.expect("->");
        e.tgt = l.label("a node");
        const auto src = find_node(d, e.src, p);
        const auto tgt = find_node(d, e.tgt, p);
        if (l.accept("diagonal")) {
          e.kind = RelationKind::diagonal;
        } else if (l.accept("finite")) {
          e.kind = RelationKind::finite;
        } else if (l.accept("where")) {
          e.kind = RelationKind::predicate;
          Context ctx = coords(boxes[src].dim());
          ctx.y_dim = boxes[tgt].dim();
          ctx.allow_y = true;
          const auto text = l.rest();
          e.predicate = Expression::parse(text.first, ctx, text.second);
          if (e.predicate.type() != expr::Type::boolean) Cursor::fail_at(text.second, "relations are boolean");
        } else {
          l.fail("expected 'diagonal', 'finite' or 'where'" + l.found());
        }
        l.end();
        for (const auto& other : d.edges) {
          if (other.name == e.name) Cursor::fail_at(p, "duplicate edge '" + e.name + "'");
        }
        d.edges.push_back(std::move(e));
      } else if (kw == "pair") {
        PairDecl pr;
        pr.pos = p;
        pr.edge = l.label("an edge name");
        const EdgeDecl* edge = nullptr;
        for (const auto& e : d.edges) {
          if (e.name == pr.edge) edge = &e;
        }
        if (!edge) Cursor::fail_at(p, "pair for undeclared edge '" + pr.edge + "'");
        if (edge->kind == RelationKind::diagonal) Cursor::fail_at(p, "diagonal relations take no pairs");
        l.expect(":");
        const Position bp = l.pos();
        pr.before = tuple(l, constants());
        l.expect("->");
        const Position ap = l.pos();
        pr.after = tuple(l, constants());
        l.end();
        if (pr.before.size() != boxes[find_node(d, edge->src, p)].dim()) {
          Cursor::fail_at(bp, "pair has the wrong dimension for node '" + edge->src + "'");
        }
        if (pr.after.size() != boxes[find_node(d, edge->tgt, p)].dim()) {
          Cursor::fail_at(ap, "pair has the wrong dimension for node '" + edge->tgt + "'");
        }
        d.pairs.push_back(std::move(pr));
      } else {
        Cursor::fail_at(p, "expected node, edge or pair, found '" + kw + "'");
      }
    }
    if (d.nodes.empty()) Cursor::fail_at(at, "space '" + name + "' has no nodes");

    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < d.nodes.size(); ++i) ids.push_back(b.add_node(d.nodes[i].name, boxes[i]));
    for (const auto& e : d.edges) {
      const std::size_t src = find_node(d, e.src, e.pos);
      const std::size_t tgt = find_node(d, e.tgt, e.pos);
      std::vector<PointPair> pairs;
      for (const auto& pr : d.pairs) {
        if (pr.edge == e.name) pairs.emplace_back(eval_point(pr.before), eval_point(pr.after));
      }
      JumpRelation rel = JumpRelation::diagonal(boxes[src]);
      if (e.kind == RelationKind::finite) {
        rel = JumpRelation::finite(std::move(pairs));
      } else if (e.kind == RelationKind::predicate) {
        const Expression pred = e.predicate;
        PairSampler sampler;
        if (!pairs.empty()) {
          sampler = [pairs](std::size_t count, std::uint64_t) {
            std::vector<PointPair> out;
            for (std::size_t i = 0; i < count; ++i) out.push_back(pairs[i % pairs.size()]);
            return out;
          };
        }
        rel = JumpRelation::predicate(
            [pred](const Vector& a, const Vector& b, double tol) { return pred.test(a, b, tol); }, sampler);
      }
      b.add_edge(e.name, ids[src], ids[tgt], std::move(rel));
    }
    PhaseSpacePtr hps = b.build();
    const ValidationReport rep = validate(*hps);
    if (!rep.ok()) {
      std::vector<Diagnostic> ds;
      for (const auto& v : rep.violations) ds.push_back({at, "space '" + name + "': " + v});
      throw DiagnosticError(ds);
    }
    m_.spaces[name] = hps;
    s_.decls.emplace_back(std::move(d));
  }

  static std::size_t find_node(const SpaceDecl& d, const std::string& name, Position p) {
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
      if (d.nodes[i].name == name) return i;
    }
    Cursor::fail_at(p, "unknown node '" + name + "'");
  }

  // ---- morphism terms ------------------------------------------------------

  Term term(Cursor& c) {
    Term t;
    t.pos = c.pos();
    const std::string head = c.ident("a morphism term");
    const bool call = c.peek() == '(';
    if (!call || (head != "id" && head != "proj" && head != "pair" && head != "prod" && head != "compose")) {
      if (head.find('.') != std::string::npos) Cursor::fail_at(t.pos, "expected a morphism, found space '" + head + "'");
      t.kind = Term::Kind::ref;
      t.name = head;
      return t;
    }
    c.expect("(");
    if (head == "id") {
      t.kind = Term::Kind::identity;
      t.domain = c.ident("a space");
    } else if (head == "proj") {
      t.kind = Term::Kind::projection;
      t.domain = c.ident("a space");
      c.expect(",");
      const std::string idx = c.label("an index");
      if (idx.find_first_not_of("0123456789") != std::string::npos) c.fail("expected an index");
      t.index = std::stoul(idx);
    } else if (head == "pair" || head == "prod") {
      t.kind = head == "pair" ? Term::Kind::pairing : Term::Kind::product;
      t.domain = c.ident("a space");
      c.expect(",");
      t.codomain = c.ident("a space");
      c.expect(";");
      do {
        t.args.push_back(term(c));
      } while (c.accept(","));
    } else {
      t.kind = Term::Kind::compose;
      t.args.push_back(term(c));
      c.expect(",");
      t.args.push_back(term(c));
    }
    c.expect(")");
    return t;
  }

  PhaseSpaceMorphism elaborate(const Term& t) {
    try {
      switch (t.kind) {
        case Term::Kind::ref:
          return lookup(m_.morphisms, t.name, t.pos, "morphism");
        case Term::Kind::identity:
          return PhaseSpaceMorphism::identity(space_ref(t.domain, t.pos));
        case Term::Kind::projection: {
          const ProductChain ch = chain_ref(t.domain, t.pos);
          if (t.index >= ch.size()) {
            Cursor::fail_at(t.pos, "projection index " + std::to_string(t.index) + " out of range for '" +
                                       t.domain + "' with " + std::to_string(ch.size()) + " factor(s)");
          }
          return PhaseSpaceMorphism::projection(ch, t.index);
        }
        case Term::Kind::pairing: {
          const PhaseSpacePtr dom = space_ref(t.domain, t.pos);
          const ProductChain cod = chain_ref(t.codomain, t.pos);
          std::vector<PhaseSpaceMorphism> parts;
          for (const auto& a : t.args) parts.push_back(elaborate(a));
          return PhaseSpaceMorphism::pairing(dom, cod, parts);
        }
        case Term::Kind::product: {
          const ProductChain dom = chain_ref(t.domain, t.pos);
          const ProductChain cod = chain_ref(t.codomain, t.pos);
          std::vector<PhaseSpaceMorphism> parts;
          for (const auto& a : t.args) parts.push_back(elaborate(a));
          return PhaseSpaceMorphism::product(dom, cod, parts);
        }
        case Term::Kind::compose:
          return compose(elaborate(t.args[0]), elaborate(t.args[1]));
      }
    } catch (const DiagnosticError&) {
      throw;
    } catch (const Skip&) {
      throw;
    } catch (const Error& e) {
      Cursor::fail_at(t.pos, e.what());
    }
    Cursor::fail_at(t.pos, "bad term");
  }

  void morphism(Cursor& c, const std::string& name, Position at, const std::vector<Line>& body) {
    MorphismDecl d;
    d.name = name;
    d.pos = at;
    if (c.accept("=")) {
      no_body(body);
      d.term = term(c);
      c.end();
      m_.morphisms.emplace(name, elaborate(*d.term));
      m_.morphism_order.push_back(name);
      s_.decls.emplace_back(std::move(d));
      return;
    }
    c.expect(":");
    Position p = c.pos();
    d.domain = c.ident("a space");
    const PhaseSpacePtr dom = space_ref(d.domain, p);
    c.expect("->");
    p = c.pos();
    d.codomain = c.ident("a space");
    const PhaseSpacePtr cod = space_ref(d.codomain, p);
    c.end();

    NodeMap nm;
    nm.nodes.assign(dom->node_count(), NodeId{});
    nm.edges.assign(dom->edge_count(), EdgeId{});
    std::vector<bool> node_seen(dom->node_count(), false);
    std::vector<bool> edge_seen(dom->edge_count(), false);
    std::vector<SmoothMap> maps(dom->node_count());
    for (const Line& line : body) {
      Cursor l(line);
      const Position lp = l.pos();
      const std::string kw = l.ident("node or edge");
      if (kw == "node") {
        NodeRow r;
        r.pos = lp;
        r.src = l.label("a node");
        const NodeId s = node_ref(*dom, r.src, lp);
        l.expect("->");
        r.tgt = l.label("a node");
        const NodeId t = node_ref(*cod, r.tgt, lp);
        l.expect(":");
        const Position tp = l.pos();
        r.coords = tuple(l, coords(dom->dim(s)));
        l.end();
        if (node_seen[s.index]) Cursor::fail_at(lp, "node '" + r.src + "' mapped twice");
        if (r.coords.size() != cod->dim(t)) {
          Cursor::fail_at(tp, "node '" + r.tgt + "' has dimension " + std::to_string(cod->dim(t)) + ", got " +
                                  std::to_string(r.coords.size()) + " coordinate(s)");
        }
        node_seen[s.index] = true;
        nm.nodes[s.index] = t;
        maps[s.index] = tuple_map(dom->dim(s), r.coords);
        d.nodes.push_back(std::move(r));
      } else if (kw == "edge") {
        EdgeRow r;
        r.pos = lp;
        r.src = l.label("an edge");
        const EdgeId s = edge_ref(*dom, r.src, lp);
        l.expect("->");
        r.tgt = l.label("an edge");
        const EdgeId t = edge_ref(*cod, r.tgt, lp);
        l.end();
        if (edge_seen[s.index]) Cursor::fail_at(lp, "edge '" + r.src + "' mapped twice");
        edge_seen[s.index] = true;
        nm.edges[s.index] = t;
        d.edges.push_back(std::move(r));
      } else {
        Cursor::fail_at(lp, "expected node or edge, found '" + kw + "'");
      }
    }
    for (std::size_t i = 0; i < dom->node_count(); ++i) {
      if (!node_seen[i]) Cursor::fail_at(at, "node '" + dom->graph().node_names()[i] + "' is not mapped");
    }
    for (std::size_t i = 0; i < dom->edge_count(); ++i) {
      if (edge_seen[i]) continue;
      const EdgeId e{i};
      if (!dom->graph().is_unit(e)) {
        Cursor::fail_at(at, "edge '" + dom->graph().edge(e).name + "' is not mapped");
      }
      const auto u = cod->graph().unit_edge(nm.nodes[dom->graph().edge(e).src.index]);
      if (!u) Cursor::fail_at(at, "image of unit edge '" + dom->graph().edge(e).name + "' has no unit");
      nm.edges[i] = *u;
    }
    PhaseSpaceMorphism f(dom, cod, nm, std::move(maps));
    const ValidationReport rep = validate(f);
    if (!rep.ok()) {
      std::vector<Diagnostic> ds;
      for (const auto& v : rep.violations) ds.push_back({at, "morphism '" + name + "': " + v});
      throw DiagnosticError(ds);
    }
    m_.morphisms.emplace(name, std::move(f));
    m_.morphism_order.push_back(name);
    s_.decls.emplace_back(std::move(d));
  }

  void ssub(Cursor& c, const std::string& name, Position at) {
    c.expect("=");
    SSubDecl d{name, term(c), at};
    c.end();
    PhaseSpaceMorphism f = elaborate(d.term);
    m_.ssubs.emplace(name, HybridSSub(f));
    m_.morphisms.emplace(name, std::move(f));
    m_.ssub_order.push_back(name);
    s_.decls.emplace_back(std::move(d));
  }

  // ---- controls ------------------------------------------------------------

  struct JumpRule {
    Expression guard;
    std::optional<NodeId> target;
    Expression target_index;
    std::vector<Expression> coords;
  };

  void control(Cursor& c, const std::string& name, Position at, const std::vector<Line>& body) {
    ControlDecl d;
    d.name = name;
    d.pos = at;
    c.expect("on");
    d.ssub = term(c);
    c.end();
    HybridSSub s(elaborate(d.ssub));
    const auto& total = *s.total;
    const auto& state = *s.state;
    const std::size_t n = total.node_count();

    std::vector<std::optional<std::vector<Expression>>> flows(n);
    auto rules = std::make_shared<std::vector<std::vector<JumpRule>>>(n);
    std::vector<std::vector<EventFunction>> events(n);
    for (const Line& line : body) {
      Cursor l(line);
      const Position lp = l.pos();
      const std::string kw = l.ident("flow, jump or event");
      const std::string node = l.label("a node");
      const NodeId id = node_ref(total, node, lp);
      const std::size_t dim = total.dim(id);
      const std::size_t state_dim = state.dim(s.proj.map_node(id));
      if (kw == "flow") {
        l.expect(":");
        const Position tp = l.pos();
        FlowRow r{node, tuple(l, coords(dim)), lp};
        l.end();
        if (flows[id.index]) Cursor::fail_at(lp, "second flow for node '" + node + "'");
        if (r.field.size() != state_dim) {
          Cursor::fail_at(tp, "state node under '" + node + "' has dimension " + std::to_string(state_dim) +
                                  ", got " + std::to_string(r.field.size()) + " component(s)");
        }
        flows[id.index] = r.field;
        d.flows.push_back(std::move(r));
      } else if (kw == "jump") {
        JumpRow r;
        r.pos = lp;
        r.node = node;
        if (l.accept("when")) {
          const auto g = l.until("->");
          r.guard = Expression::parse(g.first, coords(dim), g.second);
          if (r.guard.type() != expr::Type::boolean) Cursor::fail_at(g.second, "jump guards are boolean");
        }
        l.expect("->");
        JumpRule rule;
        const Position tp = l.pos();
        if (l.peek() == '[') {
          auto [text, p] = l.balanced('[', ']');
          text = text.substr(1, text.size() - 2);
          r.target_index = Expression::parse(text, coords(dim), {p.line, p.column + 1});
          if (r.target_index.type() != expr::Type::real) Cursor::fail_at(p, "node index must be real");
        } else {
          r.target = l.label("a state node");
          rule.target = node_ref(state, r.target, tp);
        }
        l.expect(":");
        const Position cp = l.pos();
        r.coords = tuple(l, coords(dim));
        l.end();
        if (rule.target && r.coords.size() != state.dim(*rule.target)) {
          Cursor::fail_at(cp, "node '" + r.target + "' has dimension " + std::to_string(state.dim(*rule.target)) +
                                  ", got " + std::to_string(r.coords.size()) + " coordinate(s)");
        }
        rule.guard = r.guard;
        rule.target_index = r.target_index;
        rule.coords = r.coords;
        (*rules)[id.index].push_back(std::move(rule));
        d.jumps.push_back(std::move(r));
      } else if (kw == "event") {
        l.expect(":");
        const auto text = l.rest();
        EventRow r{node, Expression::parse(text.first, coords(dim), text.second), lp};
        if (r.value.type() != expr::Type::real) Cursor::fail_at(text.second, "event functions are real");
        const Expression e = r.value;
        events[id.index].push_back([e](const Vector& x) { return e.eval(x); });
        d.events.push_back(std::move(r));
      } else {
        Cursor::fail_at(lp, "expected flow, jump or event, found '" + kw + "'");
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!flows[i] && state.dim(s.proj.map_node(NodeId{i})) > 0) {
        Cursor::fail_at(at, "no flow for node '" + total.graph().node_names()[i] + "'");
      }
      if (!flows[i]) flows[i] = std::vector<Expression>{};
    }

    auto fields = std::make_shared<std::vector<SmoothMap>>();
    for (std::size_t i = 0; i < n; ++i) fields->push_back(tuple_map(total.dim(NodeId{i}), *flows[i]));
    VectorField vf = [fields](const TaggedPoint& p) { return (*fields)[p.node.index](p.coords); };

    const PhaseSpaceMorphism proj = s.proj;
    const PhaseSpacePtr st = s.state;
    JumpMap rho = [rules, proj, st](const TaggedPoint& p) {
      for (const auto& r : (*rules)[p.node.index]) {
        if (!r.guard.empty() && !r.guard.test(p.coords)) continue;
        NodeId target;
        if (r.target) {
          target = *r.target;
        } else {
          const double v = r.target_index.eval(p.coords);
          if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(st->node_count())) {
            throw Error("computed jump target " + format_number(v) + " is not a node index of '" + st->name() +
                        "'");
          }
          target = NodeId{static_cast<std::size_t>(v)};
        }
        if (r.coords.size() != st->dim(target)) {
          throw Error("jump to node '" + st->graph().node_name(target) + "' gives " +
                      std::to_string(r.coords.size()) + " coordinate(s), expected " +
                      std::to_string(st->dim(target)));
        }
        Vector out(static_cast<Eigen::Index>(r.coords.size()));
        for (std::size_t i = 0; i < r.coords.size(); ++i) out[static_cast<Eigen::Index>(i)] = r.coords[i].eval(p.coords);
        return TaggedPoint{target, out};
      }
      return TaggedPoint{proj.map_node(p.node), proj.map(p.node)(p.coords)};
    };
    m_.controls.emplace(name, DeterministicControl{std::move(s), std::move(vf), std::move(rho), std::move(events)});
    m_.control_order.push_back(name);
    s_.decls.emplace_back(std::move(d));
  }

  // ---- networks ------------------------------------------------------------

  void network(Cursor& c, const std::string& name, Position at, const std::vector<Line>& body) {
    c.end();
    NetworkDecl d;
    d.name = name;
    d.pos = at;
    std::set<std::string> seen;
    for (const Line& line : body) {
      Cursor l(line);
      const Position lp = l.pos();
      const std::string kw = l.ident("entry, bound, tot, st or inverse");
      if (kw == "entry") {
        if (!seen.empty()) Cursor::fail_at(lp, "entries must come before bound, tot, st and inverse");
        EntryDecl e;
        e.pos = lp;
        e.label = l.label("a label");
        for (const auto& other : d.entries) {
          if (other.label == e.label) Cursor::fail_at(lp, "duplicate label '" + e.label + "'");
        }
        l.expect("=");
        e.ssub = term(l);
        l.end();
        d.entries.push_back(std::move(e));
        continue;
      }
      Term* slot = kw == "bound" ? &d.bound : kw == "tot" ? &d.tot : kw == "st" ? &d.st : kw == "inverse" ? &d.inverse : nullptr;
      if (!slot) Cursor::fail_at(lp, "expected entry, bound, tot, st or inverse, found '" + kw + "'");
      if (!seen.insert(kw).second) Cursor::fail_at(lp, "second '" + kw + "' line");
      l.expect("=");
      *slot = term(l);
      l.end();
    }
    for (const char* kw : {"bound", "tot", "st", "inverse"}) {
      if (!seen.count(kw)) Cursor::fail_at(at, std::string("network '") + name + "' has no '" + kw + "' line");
    }
    SystemList list;
    for (const auto& e : d.entries) list.add(e.label, HybridSSub(elaborate(e.ssub)));
    const SSubProduct pi = pi_product(list);
    m_.chains.emplace(name + ".total", pi.total);
    m_.chains.emplace(name + ".state", pi.state);
    m_.spaces[name + ".total"] = pi.total.space();
    m_.spaces[name + ".state"] = pi.state.space();
    SSubMorphism iota{HybridSSub(elaborate(d.bound)), pi.ssub, elaborate(d.tot), elaborate(d.st),
                      elaborate(d.inverse)};
    try {
      m_.networks.emplace(name, make_network(std::move(list), std::move(iota)));
    } catch (const Error& e) {
      Cursor::fail_at(at, "network '" + name + "': " + e.what());
    }
    m_.network_order.push_back(name);
    s_.decls.emplace_back(std::move(d));
  }

  void netmorph(Cursor& c, const std::string& name, Position at, const std::vector<Line>& body) {
    NetMorphDecl d;
    d.name = name;
    d.pos = at;
    c.expect(":");
    Position p = c.pos();
    d.source = c.ident("a network");
    const Network& src = lookup(m_.networks, d.source, p, "network");
    c.expect("->");
    p = c.pos();
    d.target = c.ident("a network");
    const Network& tgt = lookup(m_.networks, d.target, p, "network");
    c.end();

    ListMorphism lm{src.list, tgt.list, std::vector<std::size_t>(src.list.size()), {}};
    std::vector<std::optional<SSubMorphism>> comps(src.list.size());
    bool have_z = false;
    for (const Line& line : body) {
      Cursor l(line);
      const Position lp = l.pos();
      const std::string kw = l.ident("component or z");
      if (kw == "component") {
        ComponentDecl k;
        k.pos = lp;
        k.from = l.label("a source label");
        l.expect("->");
        k.to = l.label("a target label");
        const auto xi = find_label(src.list, k.from, lp);
        const auto yi = find_label(tgt.list, k.to, lp);
        l.expect("tot");
        l.expect("=");
        k.tot = term(l);
        l.expect("st");
        l.expect("=");
        k.st = term(l);
        l.end();
        if (comps[xi]) Cursor::fail_at(lp, "second component for label '" + k.from + "'");
        lm.label_map[xi] = yi;
        comps[xi] = SSubMorphism{tgt.list.entries[yi], src.list.entries[xi], elaborate(k.tot), elaborate(k.st),
                                 std::nullopt};
        d.components.push_back(std::move(k));
      } else if (kw == "z") {
        if (have_z) Cursor::fail_at(lp, "second z line");
        have_z = true;
        l.expect("tot");
        l.expect("=");
        d.z_tot = term(l);
        l.expect("st");
        l.expect("=");
        d.z_st = term(l);
        l.end();
      } else {
        Cursor::fail_at(lp, "expected component or z, found '" + kw + "'");
      }
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (!comps[i]) Cursor::fail_at(at, "no component for label '" + src.list.labels[i] + "'");
      lm.components.push_back(*comps[i]);
    }
    if (!have_z) Cursor::fail_at(at, "netmorph '" + name + "' has no z line");
    SSubMorphism z{tgt.bound, src.bound, elaborate(d.z_tot), elaborate(d.z_st), std::nullopt};
    m_.netmorphs.emplace(name, NetworkMorphism{src, tgt, std::move(lm), std::move(z)});
    m_.netmorph_order.push_back(name);
    s_.decls.emplace_back(std::move(d));
  }

  static std::size_t find_label(const SystemList& list, const std::string& label, Position p) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list.labels[i] == label) return i;
    }
    Cursor::fail_at(p, "unknown label '" + label + "'");
  }

  // ---- flows and maps ------------------------------------------------------

  void flowsys(Cursor& c, const std::string& name, Position at) {
    FlowSysDecl d;
    d.name = name;
    d.pos = at;
    c.expect(":");
    const Position bp = c.pos();
    d.box = box(c);
    const BoxSpace b = make_box(d.box, bp);
    c.expect("=");
    const Position tp = c.pos();
    d.field = tuple(c, coords(b.dim()));
    c.end();
    if (d.field.size() != b.dim()) Cursor::fail_at(tp, "field has " + std::to_string(d.field.size()) +
                                                           " component(s), box has dimension " + std::to_string(b.dim()));
    m_.flows.emplace(name, FlowSystem{name, b, tuple_map(b.dim(), d.field).evaluate});
    s_.decls.emplace_back(std::move(d));
  }

  std::size_t dimension(Cursor& c) {
    const std::string t = c.label("a dimension");
    if (t.find_first_not_of("0123456789") != std::string::npos) c.fail("expected a dimension");
    return std::stoul(t);
  }

  void map(Cursor& c, const std::string& name, Position at) {
    MapDecl d;
    d.name = name;
    d.pos = at;
    c.expect(":");
    d.in_dim = dimension(c);
    c.expect("->");
    d.out_dim = dimension(c);
    c.expect("=");
    const Position tp = c.pos();
    d.value = tuple(c, coords(d.in_dim));
    c.end();
    if (d.value.size() != d.out_dim) Cursor::fail_at(tp, "map has " + std::to_string(d.value.size()) +
                                                             " component(s), declared " + std::to_string(d.out_dim));
    m_.maps.emplace(name, tuple_map(d.in_dim, d.value));
    s_.decls.emplace_back(std::move(d));
  }

  // ---- analyses ------------------------------------------------------------

  std::vector<std::string> name_list(Cursor& c) {
    std::vector<std::string> out;
    c.expect("(");
    if (!c.accept(")")) {
      do {
        out.push_back(c.ident("a control"));
      } while (c.accept(","));
      c.expect(")");
    }
    return out;
  }

  void check_point(const HybridPhaseSpace& hps, NodeId n, const std::vector<Expression>& pt, Position p) {
    if (pt.size() != hps.dim(n)) {
      Cursor::fail_at(p, "node '" + hps.graph().node_name(n) + "' has dimension " + std::to_string(hps.dim(n)) +
                             ", got " + std::to_string(pt.size()) + " coordinate(s)");
    }
    const Vector x = eval_point(pt);
    if (!hps.space(n).contains(x)) {
      Cursor::fail_at(p, "initial point " + format_vector(x) + " lies outside the box " + hps.space(n).to_string() +
                             " of node '" + hps.graph().node_name(n) + "'");
    }
  }

  const DeterministicControl& control_ref(const std::string& name, Position p) {
    return lookup(m_.controls, name, p, "control");
  }

  void analysis(Cursor& c, const std::string& kw, const std::string& name, Position at,
                const std::vector<Line>& body) {
    AnalysisDecl d;
    d.name = name;
    d.pos = at;
    std::vector<std::string> allowed;
    c.expect(":");
    Position p = c.pos();
    d.subject = c.ident("a subject");
    if (kw == "simulate") {
      d.kind = AnalysisKind::simulate;
      const DeterministicControl& ctl = control_ref(d.subject, p);
      if (!ctl.closed()) Cursor::fail_at(p, "simulate needs a closed control");
      c.expect("from");
      p = c.pos();
      d.node = c.label("a node");
      const NodeId n = node_ref(*ctl.ssub.total, d.node, p);
      p = c.pos();
      d.point = tuple(c, constants());
      check_point(*ctl.ssub.total, n, d.point, p);
      allowed = {"horizon", "step", "max-jumps", "min-dwell", "event-tol"};
    } else if (kw == "theorem" || kw == "invariance") {
      d.kind = kw == "theorem" ? AnalysisKind::theorem : AnalysisKind::invariance;
      const NetworkMorphism& nm = lookup(m_.netmorphs, d.subject, p, "netmorph");
      c.expect("w");
      p = c.pos();
      d.w = name_list(c);
      for (const auto& w : d.w) control_ref(w, p);
      if (d.w.size() != nm.target.list.size()) {
        Cursor::fail_at(p, "w needs " + std::to_string(nm.target.list.size()) + " control(s), one per target label");
      }
      c.expect("v");
      p = c.pos();
      d.v = name_list(c);
      for (const auto& v : d.v) control_ref(v, p);
      if (d.v.size() != nm.source.list.size()) {
        Cursor::fail_at(p, "v needs " + std::to_string(nm.source.list.size()) + " control(s), one per source label");
      }
      if (d.kind == AnalysisKind::invariance) {
        c.expect("from");
        p = c.pos();
        d.node = c.label("a node");
        const auto& space = *nm.target.bound.total;
        const NodeId n = node_ref(space, d.node, p);
        p = c.pos();
        d.point = tuple(c, constants());
        check_point(space, n, d.point, p);
        allowed = {"horizon", "step", "max-jumps", "min-dwell", "event-tol", "tol"};
      } else {
        allowed = {"samples", "seed", "tol"};
      }
    } else if (kw == "stability" || kw == "transport") {
      const FlowSystem* sys = nullptr;
      if (kw == "stability") {
        d.kind = AnalysisKind::stability;
        sys = &lookup(m_.flows, d.subject, p, "flow system");
      } else {
        d.kind = AnalysisKind::transport;
        const SmoothMap& f = lookup(m_.maps, d.subject, p, "map");
        c.expect("from");
        p = c.pos();
        d.from = c.ident("a flow system");
        sys = &lookup(m_.flows, d.from, p, "flow system");
        c.expect("to");
        p = c.pos();
        d.to = c.ident("a flow system");
        const FlowSystem& y = lookup(m_.flows, d.to, p, "flow system");
        if (f.in_dim != sys->box.dim() || f.out_dim != y.box.dim()) {
          Cursor::fail_at(at, "map '" + d.subject + "' does not fit " + d.from + " -> " + d.to);
        }
      }
      c.expect("at");
      p = c.pos();
      d.point = tuple(c, constants());
      if (d.point.size() != sys->box.dim()) Cursor::fail_at(p, "point has the wrong dimension");
      if (!sys->box.contains(eval_point(d.point))) {
        Cursor::fail_at(p, "initial point " + format_vector(eval_point(d.point)) + " lies outside the box " +
                               sys->box.to_string());
      }
      c.expect("eps");
      p = c.pos();
      d.eps = tuple(c, constants());
      if (d.eps.empty()) Cursor::fail_at(p, "empty epsilon grid");
      for (const auto& e : d.eps) {
        if (!(e.eval(Vector()) > 0.0)) Cursor::fail_at(p, "epsilon values must be positive");
      }
      if (d.kind == AnalysisKind::transport) {
        c.expect("grid");
        p = c.pos();
        const auto g = tuple(c, constants());
        if (g.size() != 3) Cursor::fail_at(p, "grid takes (lo, hi, count)");
        d.grid_lo = g[0].eval(Vector());
        d.grid_hi = g[1].eval(Vector());
        const double n = g[2].eval(Vector());
        if (!(d.grid_lo < d.grid_hi) || n < 2 || n != std::floor(n)) {
          Cursor::fail_at(p, "grid needs lo < hi and an integer count >= 2");
        }
        d.grid_count = static_cast<std::size_t>(n);
        if (sys->box.dim() != 1) Cursor::fail_at(at, "transport grids are one-dimensional");
        allowed = {"horizon", "step", "seed", "map-tol"};
      } else {
        allowed = {"horizon", "step", "seed"};
      }
    }
    c.end();
    for (const Line& line : body) {
      Cursor l(line);
      const Position lp = l.pos();
      std::string key = l.label("an option");
      while (l.accept("-")) key += "-" + l.label("an option");
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        Cursor::fail_at(lp, "unknown option '" + key + "' for " + kw + " (allowed: " + list + ")");
      }
      if (d.option(key)) Cursor::fail_at(lp, "option '" + key + "' given twice");
      const auto text = l.rest();
      const double v = constant(l, text);
      if (!std::isfinite(v) || v <= 0.0) Cursor::fail_at(text.second, "option values must be positive");
      d.options.emplace_back(key, v);
    }
    s_.decls.emplace_back(std::move(d));
  }

  const Overrides& overrides_;
  Model m_;
  Scenario s_;
  std::vector<Diagnostic> diags_;
  std::set<std::string> names_;
  std::set<std::string> failed_;
};

// ---- serialization -----------------------------------------------------------

std::string tuple_text(const std::vector<Expression>& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? ", " : "") + t[i].to_string();
  return out + ")";
}

std::string box_text(const std::vector<IntervalDecl>& box) {
  if (box.empty()) return "point";
  std::string out;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const auto& iv = box[i];
    out += (i ? " x " : "");
    out += iv.lower_closed ? "[" : "(";
    out += iv.lower.to_string() + ", " + iv.upper.to_string();
    out += iv.upper_closed ? "]" : ")";
  }
  return out;
}

std::string term_text(const Term& t) {
  auto args = [&] {
    std::string out;
    for (std::size_t i = 0; i < t.args.size(); ++i) out += (i ? ", " : "") + term_text(t.args[i]);
    return out;
  };
  switch (t.kind) {
    case Term::Kind::ref:
      return t.name;
    case Term::Kind::identity:
      return "id(" + t.domain + ")";
    case Term::Kind::projection:
      return "proj(" + t.domain + ", " + std::to_string(t.index) + ")";
    case Term::Kind::pairing:
      return "pair(" + t.domain + ", " + t.codomain + "; " + args() + ")";
    case Term::Kind::product:
      return "prod(" + t.domain + ", " + t.codomain + "; " + args() + ")";
    case Term::Kind::compose:
      return "compose(" + args() + ")";
  }
  return {};
}

std::string names_text(const std::vector<std::string>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out + ")";
}

struct Printer {
  std::ostringstream os;

  void operator()(const ParamDecl& d) { os << "param " << d.name << " = " << d.value.to_string() << "\n"; }

  void operator()(const SpaceDecl& d) {
    if (!d.factors.empty()) {
      os << "space " << d.name << " = product(";
      for (std::size_t i = 0; i < d.factors.size(); ++i) os << (i ? ", " : "") << d.factors[i];
      os << ")\n";
      return;
    }
    os << "space " << d.name << "\n";
    for (const auto& n : d.nodes) os << "  node " << quote_label(n.name) << " : " << box_text(n.box) << "\n";
    for (const auto& e : d.edges) {
      os << "  edge " << quote_label(e.name) << " : " << quote_label(e.src) << " -> " << quote_label(e.tgt) << " ";
      switch (e.kind) {
        case RelationKind::diagonal:
          os << "diagonal";
          break;
        case RelationKind::finite:
          os << "finite";
          break;
        case RelationKind::predicate:
          os << "where " << e.predicate.to_string();
          break;
      }
      os << "\n";
    }
    for (const auto& p : d.pairs) {
      os << "  pair " << quote_label(p.edge) << " : " << tuple_text(p.before) << " -> " << tuple_text(p.after) << "\n";
    }
  }

  void operator()(const MorphismDecl& d) {
    if (d.term) {
      os << "morphism " << d.name << " = " << term_text(*d.term) << "\n";
      return;
    }
    os << "morphism " << d.name << " : " << d.domain << " -> " << d.codomain << "\n";
    for (const auto& r : d.nodes) {
      os << "  node " << quote_label(r.src) << " -> " << quote_label(r.tgt) << " : " << tuple_text(r.coords) << "\n";
    }
    for (const auto& r : d.edges) os << "  edge " << quote_label(r.src) << " -> " << quote_label(r.tgt) << "\n";
  }

  void operator()(const SSubDecl& d) { os << "ssub " << d.name << " = " << term_text(d.term) << "\n"; }

  void operator()(const ControlDecl& d) {
    os << "control " << d.name << " on " << term_text(d.ssub) << "\n";
    for (const auto& f : d.flows) os << "  flow " << quote_label(f.node) << " : " << tuple_text(f.field) << "\n";
    for (const auto& j : d.jumps) {
      os << "  jump " << quote_label(j.node);
      if (!j.guard.empty()) os << " when " << j.guard.to_string();
      os << " -> " << (j.target_index.empty() ? quote_label(j.target) : "[" + j.target_index.to_string() + "]");
      os << " : " << tuple_text(j.coords) << "\n";
    }
    for (const auto& e : d.events) os << "  event " << quote_label(e.node) << " : " << e.value.to_string() << "\n";
  }

  void operator()(const NetworkDecl& d) {
    os << "network " << d.name << "\n";
    for (const auto& e : d.entries) os << "  entry " << quote_label(e.label) << " = " << term_text(e.ssub) << "\n";
    os << "  bound = " << term_text(d.bound) << "\n";
    os << "  tot = " << term_text(d.tot) << "\n";
    os << "  st = " << term_text(d.st) << "\n";
    os << "  inverse = " << term_text(d.inverse) << "\n";
  }

  void operator()(const NetMorphDecl& d) {
    os << "netmorph " << d.name << " : " << d.source << " -> " << d.target << "\n";
    for (const auto& k : d.components) {
      os << "  component " << quote_label(k.from) << " -> " << quote_label(k.to) << " tot = " << term_text(k.tot)
         << " st = " << term_text(k.st) << "\n";
    }
    os << "  z tot = " << term_text(d.z_tot) << " st = " << term_text(d.z_st) << "\n";
  }

  void operator()(const FlowSysDecl& d) {
    os << "flowsys " << d.name << " : " << box_text(d.box) << " = " << tuple_text(d.field) << "\n";
  }

  void operator()(const MapDecl& d) {
    os << "map " << d.name << " : " << d.in_dim << " -> " << d.out_dim << " = " << tuple_text(d.value) << "\n";
  }

  void operator()(const AnalysisDecl& d) {
    os << to_string(d.kind) << " " << d.name << " : " << d.subject;
    switch (d.kind) {
      case AnalysisKind::simulate:
        os << " from " << quote_label(d.node) << " " << tuple_text(d.point);
        break;
      case AnalysisKind::theorem:
        os << " w " << names_text(d.w) << " v " << names_text(d.v);
        break;
      case AnalysisKind::invariance:
        os << " w " << names_text(d.w) << " v " << names_text(d.v) << " from " << quote_label(d.node) << " "
           << tuple_text(d.point);
        break;
      case AnalysisKind::stability:
        os << " at " << tuple_text(d.point) << " eps " << tuple_text(d.eps);
        break;
      case AnalysisKind::transport:
        os << " from " << d.from << " to " << d.to << " at " << tuple_text(d.point) << " eps " << tuple_text(d.eps)
           << " grid (" << format_number(d.grid_lo) << ", " << format_number(d.grid_hi) << ", " << d.grid_count
           << ")";
        break;
    }
    os << "\n";
    for (const auto& [k, v] : d.options) os << "  " << k << " " << format_number(v) << "\n";
  }
};

}  // namespace

Loaded load_scenario(std::string_view text, const Overrides& overrides) { return Loader(overrides).run(text); }

Scenario parse_scenario(std::string_view text) { return load_scenario(text).scenario; }

std::string serialize(const Scenario& s) {
  Printer p;
  bool first = true;
  if (!s.name.empty()) {
    p.os << "scenario " << s.name << "\n";
    first = false;
  }
  for (const auto& d : s.decls) {
    if (!first) p.os << "\n";
    first = false;
    std::visit(p, d);
  }
  return p.os.str();
}

}  // namespace hybrid::scn
