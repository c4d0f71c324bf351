#include "rmleq/parser.hpp"

#include <cctype>
#include <optional>

namespace rmleq {

TermPtr mk_term(TermKind k, std::vector<TermPtr> kids) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->kids = std::move(kids);
  return t;
}

namespace {

enum class Tok {
  End, LParen, RParen, UnitVal, Int, Ident, Lambda, Dot, Colon, Semi,
  Assign, Eq, Bang, Arrow, Comma, Omega,
  KwLet, KwIn, KwIf, KwThen, KwElse, KwWhile, KwDo, KwRef, KwSucc, KwPred,
  KwMkvar, KwUnit, KwInt,
};

struct Token {
  Tok kind;
  std::string text;
  int value = 0;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      tok_.text = "<eof>";
      return;
    }
    char c = src_[pos_];
    // UTF-8 lambda (CE BB) and omega (CE A9)
    if ((unsigned char)c == 0xCE && pos_ + 1 < src_.size()) {
      unsigned char d = src_[pos_ + 1];
      if (d == 0xBB) { bump(2); tok_.kind = Tok::Lambda; tok_.text = "λ"; return; }
      if (d == 0xA9) { bump(2); tok_.kind = Tok::Omega; tok_.text = "Ω"; return; }
    }
    if (c == '\\') { bump(1); tok_.kind = Tok::Lambda; tok_.text = "\\"; return; }
    if (c == '(') {
      if (pos_ + 1 < src_.size() && src_[pos_ + 1] == ')') { bump(2); tok_.kind = Tok::UnitVal; tok_.text = "()"; return; }
      bump(1); tok_.kind = Tok::LParen; tok_.text = "("; return;
    }
    if (c == ')') { bump(1); tok_.kind = Tok::RParen; tok_.text = ")"; return; }
    if (c == '.') { bump(1); tok_.kind = Tok::Dot; tok_.text = "."; return; }
    if (c == ',') { bump(1); tok_.kind = Tok::Comma; tok_.text = ","; return; }
    if (c == ';') { bump(1); tok_.kind = Tok::Semi; tok_.text = ";"; return; }
    if (c == '!') { bump(1); tok_.kind = Tok::Bang; tok_.text = "!"; return; }
    if (c == '=') { bump(1); tok_.kind = Tok::Eq; tok_.text = "="; return; }
    if (c == ':') {
      if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') { bump(2); tok_.kind = Tok::Assign; tok_.text = ":="; return; }
      bump(1); tok_.kind = Tok::Colon; tok_.text = ":"; return;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') { bump(2); tok_.kind = Tok::Arrow; tok_.text = "->"; return; }
    if (std::isdigit((unsigned char)c)) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) bump(1);
      tok_.kind = Tok::Int;
      tok_.text = src_.substr(start, pos_ - start);
      tok_.value = std::stoi(tok_.text);
      return;
    }
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_' || src_[pos_] == '\''))
        bump(1);
      tok_.text = src_.substr(start, pos_ - start);
      tok_.kind = keyword(tok_.text);
      return;
    }
    throw SyntaxError("unexpected character '" + std::string(1, c) + "'", line_, col_);
  }

  static Tok keyword(const std::string& s) {
    if (s == "let") return Tok::KwLet;
    if (s == "in") return Tok::KwIn;
    if (s == "if") return Tok::KwIf;
    if (s == "then") return Tok::KwThen;
    if (s == "else") return Tok::KwElse;
    if (s == "while") return Tok::KwWhile;
    if (s == "do") return Tok::KwDo;
    if (s == "ref") return Tok::KwRef;
    if (s == "succ") return Tok::KwSucc;
    if (s == "pred") return Tok::KwPred;
    if (s == "mkvar") return Tok::KwMkvar;
    if (s == "unit") return Tok::KwUnit;
    if (s == "int") return Tok::KwInt;
    if (s == "fun") return Tok::Lambda;
    if (s == "omega") return Tok::Omega;
    return Tok::Ident;
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_])) bump(1);
      if (pos_ + 1 < src_.size() && src_[pos_] == '(' && src_[pos_ + 1] == '*') {
        int depth = 1;
        int l = line_, c = col_;
        bump(2);
        while (depth > 0) {
          if (pos_ + 1 >= src_.size()) throw SyntaxError("unterminated comment", l, c);
          if (src_[pos_] == '(' && src_[pos_ + 1] == '*') { depth++; bump(2); }
          else if (src_[pos_] == '*' && src_[pos_ + 1] == ')') { depth--; bump(2); }
          else bump(1);
        }
        continue;
      }
      break;
    }
  }

  void bump(int n) {
    for (int i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') { line_++; col_ = 1; }
      else col_++;
      pos_++;
    }
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
public:
  explicit Parser(const std::string& src) : lex_(src) {}

  TermPtr term() {
    TermPtr t = seq();
    return t;
  }

  TypePtr type() {
    TypePtr a = type_atom();
    if (lex_.peek().kind == Tok::Arrow) {
      lex_.take();
      return RmlType::arrow(a, type());
    }
    return a;
  }

  void expect_end() {
    if (lex_.peek().kind != Tok::End)
      throw SyntaxError("trailing input '" + lex_.peek().text + "'", lex_.peek().line, lex_.peek().col);
  }

  std::vector<std::pair<std::string, TypePtr>> context() {
    std::vector<std::pair<std::string, TypePtr>> ctx;
    while (lex_.peek().kind != Tok::End) {
      Token name = expect(Tok::Ident, "context entry name");
      expect(Tok::Colon, "':'");
      ctx.emplace_back(name.text, type());
      if (lex_.peek().kind == Tok::Comma) lex_.take();
    }
    return ctx;
  }

private:
  TermPtr seq() {
    TermPtr a = asg();
    if (lex_.peek().kind == Tok::Semi) {
      Token t = lex_.take();
      TermPtr b = seq();
      return at(t, mk_term(TermKind::Seq, {a, b}));
    }
    return a;
  }

  TermPtr asg() {
    TermPtr a = eq();
    if (lex_.peek().kind == Tok::Assign) {
      Token t = lex_.take();
      TermPtr b = asg();
      return at(t, mk_term(TermKind::Assign, {a, b}));
    }
    return a;
  }

  TermPtr eq() {
    TermPtr a = app();
    if (lex_.peek().kind == Tok::Eq) {
      Token t = lex_.take();
      TermPtr b = app();
      return at(t, mk_term(TermKind::IntEq, {a, b}));
    }
    return a;
  }

  TermPtr app() {
    TermPtr f = prefix();
    while (starts_prefix(lex_.peek().kind)) {
      TermPtr a = prefix();
      auto n = mk_term(TermKind::App, {f, a});
      auto m = std::const_pointer_cast<Term>(n);
      m->line = f->line;
      m->col = f->col;
      f = n;
    }
    return f;
  }

  static bool starts_prefix(Tok k) {
    switch (k) {
    case Tok::Bang: case Tok::KwSucc: case Tok::KwPred: case Tok::KwRef:
    case Tok::LParen: case Tok::UnitVal: case Tok::Int: case Tok::Ident:
    case Tok::Lambda: case Tok::KwLet: case Tok::KwIf: case Tok::KwWhile:
    case Tok::KwMkvar: case Tok::Omega:
      return true;
    default:
      return false;
    }
  }

  TermPtr prefix() {
    Token t = lex_.peek();
    switch (t.kind) {
    case Tok::Bang: lex_.take(); return at(t, mk_term(TermKind::Deref, {prefix()}));
    case Tok::KwSucc: lex_.take(); return at(t, mk_term(TermKind::Succ, {prefix()}));
    case Tok::KwPred: lex_.take(); return at(t, mk_term(TermKind::Pred, {prefix()}));
    case Tok::KwRef: lex_.take(); return at(t, mk_term(TermKind::Ref, {prefix()}));
    default: return atom();
    }
  }

  TermPtr atom() {
    Token t = lex_.take();
    switch (t.kind) {
    case Tok::LParen: {
      TermPtr inner = term();
      expect(Tok::RParen, "')'");
      return inner;
    }
    case Tok::UnitVal:
      return at(t, mk_term(TermKind::Unit));
    case Tok::Int: {
      auto n = mk_term(TermKind::Lit);
      std::const_pointer_cast<Term>(n)->lit = t.value;
      return at(t, n);
    }
    case Tok::Ident: {
      auto n = mk_term(TermKind::Var);
      std::const_pointer_cast<Term>(n)->name = t.text;
      return at(t, n);
    }
    case Tok::Omega:
      return at(t, mk_term(TermKind::Omega));
    case Tok::Lambda: {
      Token name = expect(Tok::Ident, "binder name");
      expect(Tok::Colon, "':' (lambda binders require a type annotation)");
      TypePtr ty = type();
      expect(Tok::Dot, "'.'");
      TermPtr body = term();
      auto n = mk_term(TermKind::Lambda, {body});
      auto m = std::const_pointer_cast<Term>(n);
      m->name = name.text;
      m->binder_type = ty;
      return at(t, n);
    }
    case Tok::KwLet: {
      Token name = expect(Tok::Ident, "binder name");
      expect(Tok::Eq, "'='");
      TermPtr bound = term();
      expect(Tok::KwIn, "'in'");
      TermPtr body = term();
      auto n = mk_term(TermKind::Let, {bound, body});
      std::const_pointer_cast<Term>(n)->name = name.text;
      return at(t, n);
    }
    case Tok::KwIf: {
      TermPtr g = term();
      expect(Tok::KwThen, "'then'");
      TermPtr th = term();
      expect(Tok::KwElse, "'else'");
      TermPtr el = term();
      return at(t, mk_term(TermKind::Cond, {g, th, el}));
    }
    case Tok::KwWhile: {
      TermPtr g = term();
      expect(Tok::KwDo, "'do'");
      TermPtr b = term();
      return at(t, mk_term(TermKind::While, {g, b}));
    }
    case Tok::KwMkvar: {
      expect(Tok::LParen, "'('");
      TermPtr r = term();
      expect(Tok::Comma, "','");
      TermPtr w = term();
      expect(Tok::RParen, "')'");
      return at(t, mk_term(TermKind::Mkvar, {r, w}));
    }
    default:
      throw SyntaxError("unexpected token '" + t.text + "'", t.line, t.col);
    }
  }

  TypePtr type_atom() {
    Token t = lex_.take();
    switch (t.kind) {
    case Tok::KwUnit: return RmlType::unit_t();
    case Tok::KwInt:
      if (lex_.peek().kind == Tok::KwRef) {
        lex_.take();
        return RmlType::intref_t();
      }
      return RmlType::int_t();
    case Tok::LParen: {
      TypePtr inner = type();
      expect(Tok::RParen, "')'");
      return inner;
    }
    default:
      throw SyntaxError("expected a type, found '" + t.text + "'", t.line, t.col);
    }
  }

  Token expect(Tok k, const std::string& what) {
    Token t = lex_.take();
    if (t.kind != k)
      throw SyntaxError("expected " + what + ", found '" + t.text + "'", t.line, t.col);
    return t;
  }

  static TermPtr at(const Token& t, TermPtr n) {
    auto m = std::const_pointer_cast<Term>(n);
    if (m->line == 0) { m->line = t.line; m->col = t.col; }
    return n;
  }

  Lexer lex_;
};

} // namespace

TermPtr parse_term(const std::string& source) {
  Parser p(source);
  TermPtr t = p.term();
  p.expect_end();
  return t;
}

TypePtr parse_type(const std::string& source) {
  Parser p(source);
  TypePtr t = p.type();
  p.expect_end();
  return t;
}

std::vector<std::pair<std::string, TypePtr>> parse_context(const std::string& source) {
  Parser p(source);
  return p.context();
}

std::string term_to_string(const TermPtr& t) {
  auto paren = [](const std::string& s) { return "(" + s + ")"; };
  switch (t->kind) {
  case TermKind::Unit: return "()";
  case TermKind::Lit: return std::to_string(t->lit);
  case TermKind::Var: return t->name;
  case TermKind::Succ: return "succ " + paren(term_to_string(t->kids[0]));
  case TermKind::Pred: return "pred " + paren(term_to_string(t->kids[0]));
  case TermKind::Cond:
    return "if " + term_to_string(t->kids[0]) + " then " + paren(term_to_string(t->kids[1])) +
           " else " + paren(term_to_string(t->kids[2]));
  case TermKind::Deref: return "!" + paren(term_to_string(t->kids[0]));
  case TermKind::Assign: return paren(term_to_string(t->kids[0])) + " := " + paren(term_to_string(t->kids[1]));
  case TermKind::Ref: return "ref " + paren(term_to_string(t->kids[0]));
  case TermKind::App: return paren(term_to_string(t->kids[0])) + " " + paren(term_to_string(t->kids[1]));
  case TermKind::Lambda:
    return "λ" + t->name + ":" + type_to_string(t->binder_type) + ". " + term_to_string(t->kids[0]);
  case TermKind::While:
    return "while " + term_to_string(t->kids[0]) + " do " + paren(term_to_string(t->kids[1]));
  case TermKind::Mkvar:
    return "mkvar(" + term_to_string(t->kids[0]) + ", " + term_to_string(t->kids[1]) + ")";
  case TermKind::Omega: return "Ω";
  case TermKind::Let:
    return "let " + t->name + " = " + term_to_string(t->kids[0]) + " in " + term_to_string(t->kids[1]);
  case TermKind::Seq: return paren(term_to_string(t->kids[0])) + "; " + term_to_string(t->kids[1]);
  case TermKind::IntEq: return paren(term_to_string(t->kids[0])) + " = " + paren(term_to_string(t->kids[1]));
  }
  return "?";
}

} // namespace rmleq

#include <json.hpp>

namespace rmleq {

static nlohmann::json term_json(const TermPtr& t) {
  static const char* names[] = {"unit",   "lit",    "var",   "succ",  "pred",  "cond",
                                "deref",  "assign", "ref",   "app",   "lambda", "while",
                                "mkvar",  "omega",  "let",   "seq",   "inteq"};
  nlohmann::json j;
  j["kind"] = names[(int)t->kind];
  if (t->kind == TermKind::Lit) j["value"] = t->lit;
  if (!t->name.empty()) j["name"] = t->name;
  if (t->binder_type) j["binder_type"] = type_to_string(t->binder_type);
  if (t->type) j["type"] = type_to_string(t->type);
  if (!t->kids.empty()) {
    nlohmann::json kids = nlohmann::json::array();
    for (auto& k : t->kids) kids.push_back(term_json(k));
    j["kids"] = kids;
  }
  return j;
}

std::string term_to_json(const TermPtr& t) { return term_json(t).dump(2); }

} // namespace rmleq
