#include "proxcomp/serialize.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "proxcomp/atoms.hpp"
#include "proxcomp/prox_registry.hpp"

namespace proxcomp {

ParseError::ParseError(const std::string& msg, int line, int column)
    : UserError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

const char* kVarLetters = "xyzwvutsrqponmlkjihgfedcba";
const char* kConstLetters = "abcdefghijklmnopqrstuvwxyz";

std::string letter_name(const char* letters, std::size_t index, bool upper) {
  char c = letters[index % 26];
  if (upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::string s(1, c);
  if (index >= 26) s += std::to_string(index / 26);
  return s;
}

bool is_op_name(const std::string& s) {
  return s == "scalar" || s == "dense" || s == "sparse" || s == "diag" || s == "kron" || s == "opsum" ||
         s == "product";
}

// Output shape a linear map gets when none is written explicitly.
Dim natural_dim(const LinearOp& op, Dim in) {
  if (op.rows() == op.cols() && op.cols() == in.size()) return in;
  if (op.kind() == LinearOp::Kind::Kron && in.rows == op.kron_right().cols() && in.cols == op.kron_left().cols())
    return Dim{op.kron_right().rows(), op.kron_left().rows()};
  return Dim{op.rows(), 1};
}

// --- printing -------------------------------------------------------------------

class Printer {
 public:
  explicit Printer(bool allow_atoms) : allow_atoms_(allow_atoms) {}

  std::string var(const Expr& v) {
    auto it = vars_.find(v->var_id);
    if (it != vars_.end()) return it->second;
    const std::string name = letter_name(kVarLetters, vars_.size(), v->dim.cols > 1);
    vars_.emplace(v->var_id, name);
    data_ << "var " << name << ' ' << v->dim.rows << ' ' << v->dim.cols << '\n';
    return name;
  }

  std::string dense_const(const Matrix& m) {
    std::string key = "d" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ":";
    key.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(double));
    auto it = consts_.find(key);
    if (it != consts_.end()) return it->second;
    const std::string name = next_const_name(m.rows() > 1 && m.cols() > 1);
    consts_.emplace(std::move(key), name);
    data_ << "const " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    char buf[40];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
        data_ << (j ? " " : "") << buf;
      }
      data_ << '\n';
    }
    return name;
  }

  std::string sparse_const(const SparseMatrix& m) {
    std::ostringstream body;
    char buf[40];
    std::int64_t nnz = 0;
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        std::snprintf(buf, sizeof buf, "%.17g", it.value());
        body << it.row() << ' ' << it.col() << ' ' << buf << '\n';
        ++nnz;
      }
    const std::string key = "s" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ":" + body.str();
    auto it = consts_.find(key);
    if (it != consts_.end()) return it->second;
    const std::string name = next_const_name(m.rows() > 1 && m.cols() > 1);
    consts_.emplace(key, name);
    data_ << "sparse " << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n' << body.str();
    return name;
  }

  std::string op(const LinearOp& a) {
    using K = LinearOp::Kind;
    switch (a.kind()) {
      case K::Scalar: return "scalar(" + format_number(a.scalar_value()) + ")";
      case K::Dense: return "dense(" + dense_const(a.dense_matrix()) + ")";
      case K::Sparse: return "sparse(" + sparse_const(a.sparse_matrix()) + ")";
      case K::Diagonal: return "diag(" + dense_const(Matrix(a.diagonal_values())) + ")";
      case K::Kron: {
        std::string l = op(a.kron_left());
        return "kron(" + l + ", " + op(a.kron_right()) + ")";
      }
      case K::Sum:
      case K::Product: {
        std::string s = a.kind() == K::Sum ? "opsum(" : "product(";
        const auto& kids = a.children();
        for (std::size_t i = 0; i < kids.size(); ++i) s += (i ? ", " : "") + op(kids[i]);
        return s + ")";
      }
      case K::Abstract:
        throw InternalError("cannot serialize abstract operator '" + a.label() + "'");
    }
    return "";
  }

  std::string params(const std::vector<double>& p) {
    if (p.empty()) return "";
    std::string s = "[";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ", " : "") + format_number(p[i]);
    return s + "]";
  }

  std::string call(const std::string& name, const std::vector<Expr>& args) {
    std::string s = name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + expr(args[i]);
    return s + ")";
  }

  std::string expr(const Expr& e) {
    switch (e->kind) {
      case NodeKind::Variable: return "var(" + var(e) + ")";
      case NodeKind::Constant: {
        const std::string name = e->sparse ? sparse_const(e->value.sparseView()) : dense_const(e->value);
        return "const(" + name + ")";
      }
      case NodeKind::LinearMap: {
        std::string o = op(e->op);
        std::string s = o + "*" + expr(e->children[0]);
        if (!(natural_dim(e->op, e->children[0]->dim) == e->dim))
          s = "shape[" + std::to_string(e->dim.rows) + ", " + std::to_string(e->dim.cols) + "](" + s + ")";
        return s;
      }
      case NodeKind::Add: return call("add", e->children);
      case NodeKind::Atom: {
        const AtomInfo& a = lookup_atom(e->atom);
        if (a.linear) return expr(a.linearize(e->children, e->params, e->dim));
        if (!allow_atoms_) throw UserError("cannot serialize uncompiled atom '" + e->atom + "'");
        return call(e->atom + params(e->params), e->children);
      }
      case NodeKind::ProxFunction: {
        std::string s;
        if (e->weight != 1.0) s = "scalar(" + format_number(e->weight) + ")*";
        s += call(e->atom + params(e->params), e->children);
        if (e->folds.empty()) return s;
        s = "fold(" + s;
        for (const auto& f : e->folds) s += ", " + expr(f);
        return s + ")";
      }
    }
    return "";
  }

  std::string constraint(const LinearConstraint& c) {
    std::vector<std::string> parts;
    for (const auto& t : c.terms) {
      if (t.op.kind() == LinearOp::Kind::Scalar && t.op.scalar_value() == 1.0) parts.push_back(expr(t.var));
      else {
        std::string o = op(t.op);
        parts.push_back(o + "*" + expr(t.var));
      }
    }
    if (c.b.size() && c.b.cwiseAbs().maxCoeff() > 0.0)
      parts.push_back("scalar(-1.00)*const(" + dense_const(Matrix(c.b)) + ")");
    if (parts.size() == 1) return "zero(" + parts[0] + ")";
    std::string s = "zero(add(";
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? ", " : "") + parts[i];
    return s + "))";
  }

  std::string data() const { return data_.str(); }

 private:
  std::string next_const_name(bool upper) { return letter_name(kConstLetters, const_count_++, upper); }

  bool allow_atoms_;
  std::map<std::int64_t, std::string> vars_;
  std::map<std::string, std::string> consts_;
  std::size_t const_count_ = 0;
  std::ostringstream data_;
};

std::string objective_block(const std::vector<std::string>& items) {
  std::string s = "objective:\n";
  if (items.empty()) return s + "  add()\n";
  if (items.size() == 1) return s + "  " + items[0] + "\n";
  s += "  add(\n";
  for (std::size_t i = 0; i < items.size(); ++i) s += "    " + items[i] + (i + 1 < items.size() ? ",\n" : ")\n");
  return s;
}

std::string constraint_block(const std::vector<std::string>& items) {
  std::string s = "\nconstraints:\n";
  for (const auto& c : items) s += "  " + c + "\n";
  return s;
}

// --- parsing ----------------------------------------------------------------------

struct Syn {
  std::string name;  // call name, "*" for application, "" for a bare token
  std::vector<double> params;
  std::vector<Syn> args;
  std::string ident;
  std::optional<double> number;
  int line = 0, col = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    advance();
    return true;
  }

  void expect(char c) {
    if (!accept(c)) {
      const char got = peek();
      fail(std::string("expected '") + c + "', found " + (got ? std::string("'") + got + "'" : "end of input"));
    }
  }

  bool ident_next() {
    const char c = peek();
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string ident() {
    if (!ident_next()) fail("expected an identifier");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) advance();
    return s_.substr(start, pos_ - start);
  }

  bool number_next() {
    const char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  double number() {
    skip_ws();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    for (const char* p = begin; p < end; ++p) advance();
    return v;
  }

  int line() {
    skip_ws();
    return line_;
  }
  int col() {
    skip_ws();
    return col_;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_, col_); }

 private:
  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

Syn parse_term(Lexer& lx);

Syn parse_call(Lexer& lx) {
  Syn s;
  s.line = lx.line();
  s.col = lx.col();
  if (lx.number_next()) {
    s.number = lx.number();
    return s;
  }
  s.name = lx.ident();
  if (lx.accept('[')) {
    do {
      s.params.push_back(lx.number());
    } while (lx.accept(','));
    lx.expect(']');
  }
  if (!lx.accept('(')) {
    // bare identifier (constant or variable name)
    s.ident = s.name;
    s.name.clear();
    if (!s.params.empty()) lx.fail("parameters on a bare identifier");
    return s;
  }
  if (!lx.accept(')')) {
    do {
      s.args.push_back(parse_term(lx));
    } while (lx.accept(','));
    lx.expect(')');
  }
  return s;
}

Syn parse_term(Lexer& lx) {
  Syn left = parse_call(lx);
  if (!lx.accept('*')) return left;
  Syn app;
  app.name = "*";
  app.line = left.line;
  app.col = left.col;
  app.args.push_back(std::move(left));
  app.args.push_back(parse_term(lx));
  return app;
}

struct Document {
  std::vector<Syn> objective;  // children of the top-level add
  std::vector<Syn> constraints;
};

Document parse_document(const std::string& text) {
  Lexer lx(text);
  Document doc;
  if (lx.ident() != "objective") lx.fail("expected 'objective:'");
  lx.expect(':');
  Syn obj = parse_term(lx);
  if (obj.name == "add" && obj.params.empty()) doc.objective = std::move(obj.args);
  else doc.objective.push_back(std::move(obj));
  if (lx.at_end()) return doc;
  if (lx.ident() != "constraints") lx.fail("expected 'constraints:'");
  lx.expect(':');
  while (!lx.at_end()) doc.constraints.push_back(parse_term(lx));
  return doc;
}

struct SidecarConst {
  Matrix value;
  bool sparse = false;
};

struct Sidecar {
  std::map<std::string, Expr> vars;
  std::map<std::string, SidecarConst> consts;
};

Sidecar parse_sidecar(const std::string& data) {
  Sidecar sc;
  std::istringstream in(data);
  std::string kind;
  while (in >> kind) {
    std::string name;
    std::int64_t rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols) || rows < 1 || cols < 1)
      throw UserError("sidecar: malformed '" + kind + "' record");
    if (kind == "var") {
      sc.vars.emplace(name, variable(name, rows, cols));
    } else if (kind == "const") {
      Matrix m(rows, cols);
      for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < cols; ++j)
          if (!(in >> m(i, j))) throw UserError("sidecar: truncated data for constant '" + name + "'");
      sc.consts[name] = {std::move(m), false};
    } else if (kind == "sparse") {
      std::int64_t nnz = 0;
      if (!(in >> nnz)) throw UserError("sidecar: malformed sparse record '" + name + "'");
      Matrix m = Matrix::Zero(rows, cols);
      for (std::int64_t k = 0; k < nnz; ++k) {
        std::int64_t i, j;
        double v;
        if (!(in >> i >> j >> v) || i < 0 || j < 0 || i >= rows || j >= cols)
          throw UserError("sidecar: bad entry in sparse constant '" + name + "'");
        m(i, j) = v;
      }
      sc.consts[name] = {std::move(m), true};
    } else {
      throw UserError("sidecar: unknown record kind '" + kind + "'");
    }
  }
  return sc;
}

enum class Mode { ProxAffine, Problem };

class Builder {
 public:
  Builder(const Sidecar& sc, Mode mode) : sc_(sc), mode_(mode) {}

  const SidecarConst& constant_ref(const Syn& s) {
    if (s.args.size() != 1 || s.args[0].ident.empty()) fail(s, s.name + " expects one identifier");
    auto it = sc_.consts.find(s.args[0].ident);
    if (it == sc_.consts.end()) fail(s, "unresolved constant '" + s.args[0].ident + "'");
    return it->second;
  }

  std::optional<std::int64_t> fixed_cols(const Syn& s) {
    if (s.name == "scalar") return std::nullopt;
    if (s.name == "dense" || s.name == "sparse") return constant_ref(s).value.cols();
    if (s.name == "diag") return constant_ref(s).value.size();
    if (s.name == "kron") {
      auto l = fixed_cols(s.args.at(0)), r = fixed_cols(s.args.at(1));
      if (l && r) return *l * *r;
      return std::nullopt;
    }
    if (s.name == "product") return fixed_cols(s.args.back());
    if (s.name == "opsum")
      for (const auto& a : s.args)
        if (auto c = fixed_cols(a)) return c;
    return std::nullopt;
  }

  LinearOp op(const Syn& s, std::int64_t in) {
    if (s.name == "scalar") {
      if (s.args.size() != 1 || !s.args[0].number) fail(s, "scalar expects one number");
      return LinearOp::scalar(*s.args[0].number, in);
    }
    if (s.name == "dense" || s.name == "sparse" || s.name == "diag") {
      const auto& c = constant_ref(s);
      LinearOp o = s.name == "diag"     ? LinearOp::diagonal(Eigen::Map<const Vector>(c.value.data(), c.value.size()))
                   : s.name == "dense" ? LinearOp::dense(c.value)
                                       : LinearOp::sparse(c.value.sparseView());
      if (o.cols() != in)
        fail(s, s.name + " operator takes " + std::to_string(o.cols()) + " inputs, operand has " + std::to_string(in));
      return o;
    }
    if (s.name == "kron") {
      if (s.args.size() != 2) fail(s, "kron expects two operators");
      const Syn &l = s.args[0], &r = s.args[1];
      std::int64_t lc, rc;
      if (auto fr = fixed_cols(r)) {
        rc = *fr;
        if (rc == 0 || in % rc) fail(s, "kron does not divide operand size");
        lc = in / rc;
      } else if (auto fl = fixed_cols(l)) {
        lc = *fl;
        if (lc == 0 || in % lc) fail(s, "kron does not divide operand size");
        rc = in / lc;
      } else {
        fail(s, "cannot infer kron factor sizes");
      }
      LinearOp lo = op(l, lc);
      return LinearOp::kron(lo, op(r, rc));
    }
    if (s.name == "product") {
      std::vector<LinearOp> f(s.args.size());
      std::int64_t cur = in;
      for (std::size_t i = s.args.size(); i-- > 0;) {
        f[i] = op(s.args[i], cur);
        cur = f[i].rows();
      }
      return LinearOp::product(std::move(f));
    }
    if (s.name == "opsum") {
      std::vector<LinearOp> t;
      for (const auto& a : s.args) t.push_back(op(a, in));
      return LinearOp::sum(std::move(t));
    }
    fail(s, "'" + s.name + "' is not an operator");
  }

  std::vector<Expr> children(const Syn& s) {
    std::vector<Expr> out;
    for (const auto& a : s.args) out.push_back(expr(a));
    return out;
  }

  Expr function_call(const Syn& s, double weight) {
    if (mode_ == Mode::Problem) {
      if (find_atom(s.name)) {
        Expr e = build_atom(s.name, children(s), s.params);
        if (weight != 1.0) e = linear_map(LinearOp::scalar(weight, 1), e);
        return e;
      }
    }
    const auto* f = prox::find_prox(s.name);
    if (!f) fail(s, "unknown function '" + s.name + "'");
    if (static_cast<int>(s.args.size()) != f->arity) fail(s, s.name + ": wrong number of arguments");
    if (static_cast<int>(s.params.size()) != f->num_params) fail(s, s.name + ": wrong number of parameters");
    return prox_function(s.name, children(s), s.params, weight);
  }

  Expr expr(const Syn& s) {
    if (s.number) fail(s, "unexpected number");
    if (!s.ident.empty()) fail(s, "unexpected identifier '" + s.ident + "'");
    if (s.name == "*") {
      const Syn& l = s.args[0];
      const Syn& r = s.args[1];
      if (!is_op_name(l.name)) fail(l, "'" + l.name + "' is not an operator");
      if (mode_ == Mode::ProxAffine && l.name == "scalar" && is_function(r)) {
        if (l.args.size() != 1 || !l.args[0].number) fail(l, "scalar expects one number");
        return function_call(r, *l.args[0].number);
      }
      Expr child = expr(r);
      LinearOp o = op(l, child->dim.size());
      const Dim d = natural_dim(o, child->dim);
      return linear_map(std::move(o), std::move(child), d);
    }
    if (s.name == "var") {
      if (s.args.size() != 1 || s.args[0].ident.empty()) fail(s, "var expects one identifier");
      auto it = sc_.vars.find(s.args[0].ident);
      if (it == sc_.vars.end()) fail(s, "undeclared variable '" + s.args[0].ident + "'");
      return it->second;
    }
    if (s.name == "const") {
      const auto& c = constant_ref(s);
      return constant(c.value, c.sparse);
    }
    if (s.name == "add") {
      if (s.args.empty()) fail(s, "empty add");
      return add_node(children(s));
    }
    if (s.name == "shape") {
      if (s.params.size() != 2 || s.args.size() != 1) fail(s, "shape expects [rows, cols] and one argument");
      Expr inner = expr(s.args[0]);
      if (inner->kind != NodeKind::LinearMap) fail(s, "shape applies to a linear map");
      const Dim d{static_cast<std::int64_t>(s.params[0]), static_cast<std::int64_t>(s.params[1])};
      return linear_map(inner->op, inner->children[0], d);
    }
    if (s.name == "fold") {
      if (s.args.size() < 2) fail(s, "fold expects a term and at least one folded term");
      Expr head = expr(s.args[0]);
      if (head->kind != NodeKind::ProxFunction) fail(s, "fold head must be a prox function");
      std::vector<Expr> folds;
      for (std::size_t i = 1; i < s.args.size(); ++i) {
        Expr f = expr(s.args[i]);
        if (f->kind != NodeKind::ProxFunction) fail(s.args[i], "folded term must be a prox function");
        folds.push_back(f);
      }
      return prox_function(head->atom, head->children, head->params, head->weight, std::move(folds));
    }
    if (is_op_name(s.name)) fail(s, "operator '" + s.name + "' without an operand");
    return function_call(s, 1.0);
  }

  static bool is_function(const Syn& s) {
    return !s.name.empty() && s.name != "*" && s.name != "var" && s.name != "const" && s.name != "add" &&
           s.name != "shape" && s.name != "fold" && !is_op_name(s.name);
  }

  [[noreturn]] void fail(const Syn& s, const std::string& msg) { throw ParseError(msg, s.line, s.col); }

 private:
  const Sidecar& sc_;
  Mode mode_;
};

}  // namespace

Serialized serialize(const ProxAffineProblem& p) {
  Printer pr(false);
  std::vector<std::string> items;
  for (const auto& t : p.terms) {
    if (t->kind != NodeKind::ProxFunction) throw UserError("prox-affine term is not a prox function");
    items.push_back(pr.expr(t));
  }
  if (p.offset != 0.0) items.push_back(pr.expr(constant(p.offset)));
  Serialized s;
  s.text = objective_block(items) + constraint_block({});
  s.data = pr.data();
  return s;
}

Serialized serialize(const SeparableProblem& p) {
  Printer pr(false);
  std::vector<std::string> items, cons;
  for (const auto& t : p.terms) items.push_back(pr.expr(t));
  if (p.offset != 0.0) items.push_back(pr.expr(constant(p.offset)));
  for (const auto& c : p.constraints) cons.push_back(pr.constraint(c));
  Serialized s;
  s.text = objective_block(items) + constraint_block(cons);
  s.data = pr.data();
  return s;
}

Serialized serialize(const Problem& p) {
  Printer pr(true);
  std::vector<std::string> items, cons;
  if (p.objective->kind == NodeKind::Add)
    for (const auto& c : p.objective->children) items.push_back(pr.expr(c));
  else
    items.push_back(pr.expr(p.objective));
  for (const auto& c : p.constraints) {
    std::string s = cone_name(c.cone) + "(";
    for (std::size_t i = 0; i < c.args.size(); ++i) s += (i ? ", " : "") + pr.expr(c.args[i]);
    cons.push_back(s + ")");
  }
  Serialized s;
  s.text = objective_block(items) + constraint_block(cons);
  s.data = pr.data();
  return s;
}

ProxAffineProblem parse_prox_affine(const std::string& text, const std::string& data) {
  const Sidecar sc = parse_sidecar(data);
  const Document doc = parse_document(text);
  Builder b(sc, Mode::ProxAffine);
  ProxAffineProblem p;
  for (const auto& s : doc.objective) {
    Expr e = b.expr(s);
    if (e->kind == NodeKind::Constant && e->dim.is_scalar()) p.offset += e->value(0, 0);
    else if (e->kind == NodeKind::ProxFunction) p.terms.push_back(e);
    else b.fail(s, "objective entries must be prox functions");
  }
  if (!doc.constraints.empty()) b.fail(doc.constraints[0], "prox-affine programs carry no constraints section");
  return p;
}

SeparableProblem parse_separable(const std::string& text, const std::string& data) {
  const Sidecar sc = parse_sidecar(data);
  const Document doc = parse_document(text);
  Builder b(sc, Mode::ProxAffine);
  SeparableProblem p;
  for (const auto& s : doc.objective) {
    Expr e = b.expr(s);
    if (e->kind == NodeKind::Constant && e->dim.is_scalar()) p.offset += e->value(0, 0);
    else if (e->kind == NodeKind::ProxFunction) p.terms.push_back(e);
    else b.fail(s, "objective entries must be prox functions");
  }
  for (const auto& s : doc.constraints) {
    if (s.name != "zero" || s.args.size() != 1) b.fail(s, "constraints must be zero(...)");
    Expr e = b.expr(s.args[0]);
    if (!is_affine_tree(e)) b.fail(s, "constraint is not affine");
    AffineForm f = affine_form(e);
    p.constraints.push_back({std::move(f.terms), -f.offset});
  }
  return p;
}

Problem parse_problem(const std::string& text, const std::string& data) {
  const Sidecar sc = parse_sidecar(data);
  const Document doc = parse_document(text);
  Builder b(sc, Mode::Problem);
  Problem p;
  std::vector<Expr> obj;
  for (const auto& s : doc.objective) obj.push_back(b.expr(s));
  if (obj.empty()) throw UserError("empty objective");
  p.objective = add_node(std::move(obj));
  if (!p.objective->dim.is_scalar()) throw DimensionError("objective must be scalar, got " + p.objective->dim.str());
  for (const auto& s : doc.constraints) {
    Constraint c;
    if (s.name == "zero") c.cone = Cone::Zero;
    else if (s.name == "nonneg") c.cone = Cone::Nonneg;
    else if (s.name == "soc") c.cone = Cone::Soc;
    else if (s.name == "psd") c.cone = Cone::Psd;
    else b.fail(s, "unknown constraint '" + s.name + "'");
    const std::size_t want = c.cone == Cone::Soc ? 2 : 1;
    if (s.args.size() != want) b.fail(s, s.name + ": wrong number of arguments");
    for (const auto& a : s.args) c.args.push_back(b.expr(a));
    p.constraints.push_back(std::move(c));
  }
  return p;
}

void write_files(const std::string& path, const Serialized& s) {
  std::ofstream t(path), d(path + ".data");
  if (!t || !d) throw UserError("cannot write '" + path + "'");
  t << s.text;
  d << s.data;
}

Serialized read_files(const std::string& path) {
  std::ifstream t(path);
  if (!t) throw UserError("file not found: " + path);
  std::ifstream d(path + ".data");
  if (!d) throw UserError("file not found: " + path + ".data");
  std::stringstream ts, ds;
  ts << t.rdbuf();
  ds << d.rdbuf();
  return {ts.str(), ds.str()};
}

}  // namespace proxcomp
