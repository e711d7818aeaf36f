#include "cf/frontend.hpp"

#include <cctype>
#include <set>

namespace cf {

Ast Ast::number(const Rat& q)
{
  Ast a;
  a.kind = Kind::Num;
  a.num = q;
  return a;
}

Ast Ast::variable(int index, std::string name)
{
  Ast a;
  a.kind = Kind::Var;
  a.var = index;
  a.name = std::move(name);
  return a;
}

bool operator==(const Ast& a, const Ast& b)
{
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Ast::Kind::Num: return a.num == b.num;
    case Ast::Kind::Var: return a.var == b.var;
    case Ast::Kind::Pow:
      if (a.num != b.num) return false;
      break;
    default: break;
  }
  return a.kids == b.kids;
}

std::vector<std::string> SourceForm::names() const
{
  std::vector<std::string> out;
  for (const auto& c : chains) out.push_back(c.name);
  return out;
}

namespace {

struct Token {
  enum class Type { Int, Ident, Sym, End };
  Type type = Type::End;
  std::string text;
  int line = 1;
  int column = 1;
};

std::vector<Token> tokenize(std::string_view s)
{
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < s.size()) {
    const char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      advance(1);
      continue;
    }
    if (ch == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    std::size_t j = i;
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && (s[j] == '.' || s[j] == 'e' || s[j] == 'E'))
        throw SyntaxError("decimal literals are not allowed, write a fraction", line, col);
      t.type = Token::Type::Int;
    } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.type = Token::Type::Ident;
    } else if (std::string_view("+-*/^()<>={},").find(ch) != std::string_view::npos) {
      j = i + 1;
      t.type = Token::Type::Sym;
    } else {
      throw SyntaxError(std::string("unexpected character '") + ch + "'", line, col);
    }
    t.text = std::string(s.substr(i, j - i));
    advance(j - i);
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

const std::set<std::string>& banned_functions()
{
  static const std::set<std::string> names{"exp", "sin", "cos", "tan", "sqrt", "atan", "asin", "acos",
                                           "sinh", "cosh", "tanh", "abs", "ln", "pow"};
  return names;
}

const std::set<std::string>& keywords()
{
  static const std::set<std::string> names{"log", "on", "cell", "inf", "center"};
  return names;
}

void fold_into(std::vector<Ast>& kids, Ast item, Ast::Kind kind)
{
  if (item.kind == kind) {
    for (auto& k : item.kids) kids.push_back(std::move(k));
  } else {
    kids.push_back(std::move(item));
  }
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::size_t begin, std::size_t end, std::vector<std::string> names)
      : t_(std::move(toks)), pos_(begin), end_(end), names_(std::move(names))
  {
  }

  const Token& peek() const { return pos_ < end_ ? t_[pos_] : t_.back(); }
  bool at_end() const { return pos_ >= end_; }
  bool is_sym(const char* s) const { return !at_end() && peek().type == Token::Type::Sym && peek().text == s; }
  bool is_ident(const char* s) const
  {
    return !at_end() && peek().type == Token::Type::Ident && peek().text == s;
  }

  [[noreturn]] void error(const std::string& what) const
  {
    const Token& k = peek();
    throw SyntaxError(what + (at_end() ? " (end of input)" : " near '" + k.text + "'"), k.line, k.column);
  }

  void expect_sym(const char* s)
  {
    if (!is_sym(s)) error(std::string("expected '") + s + "'");
    ++pos_;
  }

  Ast at(Ast a, const Token& k) const
  {
    a.line = k.line;
    a.column = k.column;
    return a;
  }

  Ast expr()
  {
    const Token start = peek();
    Ast first;
    if (is_sym("-")) {
      ++pos_;
      first = negate(term(), start);
    } else {
      first = term();
    }
    if (!is_sym("+") && !is_sym("-")) return first;
    Ast sum = at(Ast{}, start);
    sum.kind = Ast::Kind::Add;
    fold_into(sum.kids, std::move(first), Ast::Kind::Add);
    while (is_sym("+") || is_sym("-")) {
      const Token op = peek();
      ++pos_;
      Ast item = term();
      if (op.text == "-") item = negate(std::move(item), op);
      fold_into(sum.kids, std::move(item), Ast::Kind::Add);
    }
    return sum;
  }

  Ast negate(Ast a, const Token& k) const
  {
    if (a.kind == Ast::Kind::Num) {
      a.num = -a.num;
      return a;
    }
    Ast n = at(Ast{}, k);
    n.kind = Ast::Kind::Neg;
    n.kids.push_back(std::move(a));
    return n;
  }

  Ast term()
  {
    const Token start = peek();
    std::vector<Ast> kids;
    auto push = [&](Ast f) {
      if (f.kind == Ast::Kind::Num && !kids.empty() && kids.back().kind == Ast::Kind::Num) {
        kids.back().num *= f.num;
        return;
      }
      fold_into(kids, std::move(f), Ast::Kind::Mul);
    };
    push(factor());
    while (is_sym("*") || is_sym("/")) {
      const Token op = peek();
      ++pos_;
      Ast f = factor();
      if (op.text == "/") {
        if (f.kind == Ast::Kind::Num) {
          if (f.num == 0) throw SyntaxError("division by zero", op.line, op.column);
          f.num = 1 / f.num;
        } else {
          Ast p = at(Ast{}, op);
          p.kind = Ast::Kind::Pow;
          p.num = -1;
          p.kids.push_back(std::move(f));
          f = std::move(p);
        }
      }
      push(std::move(f));
    }
    if (kids.size() == 1) return std::move(kids.front());
    Ast m = at(Ast{}, start);
    m.kind = Ast::Kind::Mul;
    m.kids = std::move(kids);
    return m;
  }

  Ast factor()
  {
    const Token start = peek();
    Ast base = primary();
    if (!is_sym("^")) return base;
    ++pos_;
    Ast p = at(Ast{}, start);
    p.kind = Ast::Kind::Pow;
    p.num = exponent();
    p.kids.push_back(std::move(base));
    if (is_sym("^")) error("chained powers need parentheses");
    return p;
  }

  Rat exponent()
  {
    if (!at_end() && peek().type == Token::Type::Int) {
      Rat r(peek().text);
      ++pos_;
      return r;
    }
    if (!is_sym("(")) error("exponent must be an integer or a parenthesized rational");
    ++pos_;
    Rat r = rational();
    expect_sym(")");
    return r;
  }

  Rat rational()
  {
    bool negative = false;
    if (is_sym("-")) {
      negative = true;
      ++pos_;
    }
    if (at_end() || peek().type != Token::Type::Int) error("expected an integer");
    Rat r(peek().text);
    ++pos_;
    if (is_sym("/")) {
      ++pos_;
      if (at_end() || peek().type != Token::Type::Int) error("expected a denominator");
      const Rat d(peek().text);
      if (d == 0) error("zero denominator");
      ++pos_;
      r /= d;
    }
    r.canonicalize();
    return negative ? Rat(-r) : r;
  }

  Ast primary()
  {
    const Token k = peek();
    if (at_end()) error("unexpected end of expression");
    if (k.type == Token::Type::Int) {
      ++pos_;
      return at(Ast::number(Rat(k.text)), k);
    }
    if (is_sym("(")) {
      ++pos_;
      Ast inner = expr();
      expect_sym(")");
      return inner;
    }
    if (k.type == Token::Type::Ident) {
      if (k.text == "log") {
        ++pos_;
        expect_sym("(");
        Ast arg = expr();
        expect_sym(")");
        Ast l = at(Ast{}, k);
        l.kind = Ast::Kind::Log;
        l.kids.push_back(std::move(arg));
        return l;
      }
      if (banned_functions().count(k.text) ||
          (pos_ + 1 < end_ && t_[pos_ + 1].type == Token::Type::Sym && t_[pos_ + 1].text == "("))
        fail(ErrorKind::FragmentEscape, "function '" + k.text + "' is outside the supported fragment (line " +
                                            std::to_string(k.line) + ", column " + std::to_string(k.column) + ")");
      if (keywords().count(k.text)) error("unexpected keyword");
      for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == k.text) {
          ++pos_;
          return at(Ast::variable(static_cast<int>(i), k.text), k);
        }
      }
      throw SyntaxError("undeclared variable '" + k.text + "'", k.line, k.column);
    }
    error("unexpected token");
  }

  // bound := '-' 'inf' | 'inf' | expr
  Ast bound(bool& neg_inf, bool& pos_inf)
  {
    neg_inf = pos_inf = false;
    if (is_sym("-") && pos_ + 1 < end_ && t_[pos_ + 1].type == Token::Type::Ident && t_[pos_ + 1].text == "inf") {
      pos_ += 2;
      neg_inf = true;
      return {};
    }
    if (is_ident("inf")) {
      ++pos_;
      pos_inf = true;
      return {};
    }
    return expr();
  }

  std::string new_name()
  {
    const Token k = peek();
    if (at_end() || k.type != Token::Type::Ident || keywords().count(k.text)) error("expected a variable name");
    for (const auto& n : names_)
      if (n == k.text) throw SyntaxError("variable '" + k.text + "' declared twice", k.line, k.column);
    ++pos_;
    return k.text;
  }

  SourceChain chain()
  {
    SourceChain c;
    // thin form starts with a fresh name followed by '='
    if (!at_end() && peek().type == Token::Type::Ident && pos_ + 1 < end_ && t_[pos_ + 1].text == "=") {
      c.name = new_name();
      ++pos_;
      bool ni = false, pi = false;
      c.thin = true;
      c.lower = bound(ni, pi);
      if (ni || pi) error("a thin variable needs a finite value");
      names_.push_back(c.name);
      return c;
    }
    c.lower = bound(c.lower_inf, c.upper_inf);
    if (c.upper_inf) error("lower bound cannot be inf");
    expect_sym("<");
    c.name = new_name();
    expect_sym("<");
    bool ni = false;
    c.upper = bound(ni, c.upper_inf);
    if (ni) error("upper bound cannot be -inf");
    if (is_ident("center")) {
      ++pos_;
      c.center = rational();
    }
    names_.push_back(c.name);
    return c;
  }

  std::vector<SourceChain> cell()
  {
    if (is_ident("cell")) ++pos_;
    expect_sym("{");
    std::vector<SourceChain> out;
    out.push_back(chain());
    while (is_sym(",")) {
      ++pos_;
      out.push_back(chain());
    }
    expect_sym("}");
    return out;
  }

  void finish() const
  {
    if (!at_end()) error("unexpected trailing input");
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t position() const { return pos_; }

 private:
  std::vector<Token> t_;
  std::size_t pos_;
  std::size_t end_;
  std::vector<std::string> names_;
};

// Without a cell, names of the form <letters><digits> are declared in index order.
std::vector<std::string> implicit_names(const std::vector<Token>& toks, std::size_t end)
{
  std::set<std::pair<std::string, long>> found;
  for (std::size_t i = 0; i < end; ++i) {
    const Token& k = toks[i];
    if (k.type != Token::Type::Ident || keywords().count(k.text)) continue;
    std::size_t d = k.text.size();
    while (d > 0 && std::isdigit(static_cast<unsigned char>(k.text[d - 1]))) --d;
    if (d == 0 || d == k.text.size() || k.text.size() - d > 6) continue;
    found.insert({k.text.substr(0, d), std::stol(k.text.substr(d))});
  }
  std::vector<std::string> out;
  for (const auto& [stem, idx] : found) out.push_back(stem + std::to_string(idx));
  return out;
}

}  // namespace

SourceForm parse_source(std::string_view text)
{
  std::vector<Token> toks = tokenize(text);
  const std::size_t total = toks.size() - 1;
  std::size_t split = total;
  int depth = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (toks[i].type == Token::Type::Sym && toks[i].text == "(") ++depth;
    if (toks[i].type == Token::Type::Sym && toks[i].text == ")") --depth;
    if (depth == 0 && toks[i].type == Token::Type::Ident && toks[i].text == "on") {
      split = i;
      break;
    }
  }
  SourceForm out;
  std::vector<std::string> names;
  if (split < total) {
    Parser cp(toks, split + 1, total, {});
    out.chains = cp.cell();
    cp.finish();
    names = cp.names();
  } else {
    names = implicit_names(toks, total);
    for (const auto& n : names) {
      SourceChain c;
      c.name = n;
      c.lower_inf = true;
      c.upper_inf = true;
      out.chains.push_back(c);
    }
  }
  if (split == 0) throw SyntaxError("missing expression before 'on'", toks[0].line, toks[0].column);
  Parser ep(toks, 0, split, names);
  out.expr = ep.expr();
  ep.finish();
  return out;
}

Ast parse_expr(std::string_view text, const std::vector<std::string>& names)
{
  std::vector<Token> toks = tokenize(text);
  const std::size_t total = toks.size() - 1;
  Parser p(std::move(toks), 0, total, names);
  Ast a = p.expr();
  p.finish();
  return a;
}

// ------------------------------------------------------------------ printing

namespace {

std::string exponent_text(const Rat& r)
{
  if (is_integer(r) && r >= 0) return to_string(r);
  return "(" + to_string(r) + ")";
}

std::string print_at(const Ast& a, const std::vector<std::string>& names, int prec);

// prec: 0 sum, 1 product, 2 power base
std::string print_at(const Ast& a, const std::vector<std::string>& names, int prec)
{
  switch (a.kind) {
    case Ast::Kind::Num: {
      const std::string s = to_string(a.num);
      if (a.num < 0 && prec > 0) return "(" + s + ")";
      if (!is_integer(a.num) && prec > 1) return "(" + s + ")";
      return s;
    }
    case Ast::Kind::Var:
      return a.var >= 0 && a.var < static_cast<int>(names.size()) ? names[a.var] : a.name;
    case Ast::Kind::Log: return "log(" + print_at(a.kids[0], names, 0) + ")";
    case Ast::Kind::Pow: {
      const std::string s = print_at(a.kids[0], names, 2) + "^" + exponent_text(a.num);
      return prec > 1 ? "(" + s + ")" : s;
    }
    case Ast::Kind::Neg: {
      const Ast& k = a.kids[0];
      std::string inner = print_at(k, names, 1);
      if (k.kind == Ast::Kind::Neg) inner = "(" + inner + ")";
      const std::string s = "-" + inner;
      return prec > 0 ? "(" + s + ")" : s;
    }
    case Ast::Kind::Mul: {
      std::string s;
      for (std::size_t i = 0; i < a.kids.size(); ++i) {
        const Ast& k = a.kids[i];
        if (i > 0) s += "*";
        // a leading negative number reads fine unparenthesized only at the front of a sum
        s += print_at(k, names, 1);
      }
      return prec > 1 ? "(" + s + ")" : s;
    }
    case Ast::Kind::Add: {
      std::string s;
      for (std::size_t i = 0; i < a.kids.size(); ++i) {
        const Ast& k = a.kids[i];
        if (i == 0) {
          s += print_at(k, names, 0);
          continue;
        }
        if (k.kind == Ast::Kind::Neg) {
          const Ast& inner = k.kids[0];
          const bool wrap = inner.kind == Ast::Kind::Neg || inner.kind == Ast::Kind::Add ||
                            (inner.kind == Ast::Kind::Num && inner.num < 0);
          s += " - " + (wrap ? "(" + print_at(inner, names, 0) + ")" : print_at(inner, names, 1));
        } else if (k.kind == Ast::Kind::Num && k.num < 0) {
          s += " - " + to_string(Rat(-k.num));
        } else {
          s += " + " + print_at(k, names, 1);
        }
      }
      return prec > 0 ? "(" + s + ")" : s;
    }
  }
  return "?";
}

std::string print_bound(bool ni, bool pi, const Ast& a, const std::vector<std::string>& names)
{
  if (ni) return "-inf";
  if (pi) return "inf";
  return print_at(a, names, 0);
}

}  // namespace

std::string print_ast(const Ast& a, const std::vector<std::string>& names) { return print_at(a, names, 0); }

std::string print_source(const SourceForm& s)
{
  const auto names = s.names();
  std::string out = print_ast(s.expr, names) + " on {";
  for (std::size_t i = 0; i < s.chains.size(); ++i) {
    const SourceChain& c = s.chains[i];
    if (i > 0) out += ", ";
    if (c.thin) {
      out += c.name + " = " + print_ast(c.lower, names);
      continue;
    }
    out += print_bound(c.lower_inf, false, c.lower, names) + " < " + c.name + " < " +
           print_bound(false, c.upper_inf, c.upper, names);
    if (c.center != 0) out += " center " + to_string(c.center);
  }
  return out + "}";
}

}  // namespace cf
