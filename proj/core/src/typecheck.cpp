#include "rmleq/typecheck.hpp"

#include <map>

namespace rmleq {

namespace {

class Checker {
public:
  Checker(const Context& ctx, int k) : k_(k) {
    if (k < 2) throw TypeError("int modulus k must be >= 2", 0, 0);
    for (auto& [name, ty] : ctx) {
      if (env_.count(name)) throw TypeError("duplicate context name " + name, 0, 0);
      env_[name] = ty;
    }
  }

  TermPtr check(const TermPtr& t, const TypePtr& expect) {
    TermPtr r = check_inner(t, expect);
    if (expect && !type_equal(r->type, expect))
      throw TypeError("expected " + type_to_string(expect) + " but found " + type_to_string(r->type),
                      t->line, t->col);
    return r;
  }

private:
  TermPtr check_inner(const TermPtr& t, const TypePtr& expect) {
    switch (t->kind) {
    case TermKind::Unit:
      return typed(t, TermKind::Unit, {}, RmlType::unit_t());
    case TermKind::Lit:
      if (t->lit < 0 || t->lit >= k_)
        throw TypeError("integer literal " + std::to_string(t->lit) + " out of range 0.." +
                            std::to_string(k_ - 1), t->line, t->col);
      return lit(t->lit, t);
    case TermKind::Var: {
      auto it = env_.find(t->name);
      if (it == env_.end()) throw TypeError("unbound variable " + t->name, t->line, t->col);
      auto n = typed(t, TermKind::Var, {}, it->second);
      std::const_pointer_cast<Term>(n)->name = t->name;
      return n;
    }
    case TermKind::Succ:
    case TermKind::Pred: {
      TermPtr a = check(t->kids[0], RmlType::int_t());
      return typed(t, t->kind, {a}, RmlType::int_t());
    }
    case TermKind::Cond: {
      TermPtr g = check(t->kids[0], RmlType::int_t());
      TermPtr th = check(t->kids[1], expect);
      TermPtr el = check(t->kids[2], th->type);
      return typed(t, TermKind::Cond, {g, th, el}, th->type);
    }
    case TermKind::Deref: {
      TermPtr r = check(t->kids[0], RmlType::intref_t());
      return typed(t, TermKind::Deref, {r}, RmlType::int_t());
    }
    case TermKind::Assign: {
      TermPtr r = check(t->kids[0], RmlType::intref_t());
      TermPtr v = check(t->kids[1], RmlType::int_t());
      return typed(t, TermKind::Assign, {r, v}, RmlType::unit_t());
    }
    case TermKind::Ref: {
      TermPtr v = check(t->kids[0], RmlType::int_t());
      return typed(t, TermKind::Ref, {v}, RmlType::intref_t());
    }
    case TermKind::App: {
      TermPtr f = check(t->kids[0], nullptr);
      if (!f->type->is_arrow())
        throw TypeError("cannot apply a non-function of type " + type_to_string(f->type),
                        t->line, t->col);
      TermPtr a = check(t->kids[1], f->type->dom);
      return typed(t, TermKind::App, {f, a}, f->type->cod);
    }
    case TermKind::Lambda: {
      TypePtr body_expect = nullptr;
      if (expect && expect->is_arrow() && type_equal(expect->dom, t->binder_type))
        body_expect = expect->cod;
      env_scope scope(*this, t->name, t->binder_type);
      TermPtr body = check(t->kids[0], body_expect);
      auto n = typed(t, TermKind::Lambda, {body}, RmlType::arrow(t->binder_type, body->type));
      auto m = std::const_pointer_cast<Term>(n);
      m->name = t->name;
      m->binder_type = t->binder_type;
      return n;
    }
    case TermKind::While: {
      TermPtr g = check(t->kids[0], RmlType::int_t());
      TermPtr b = check(t->kids[1], RmlType::unit_t());
      return typed(t, TermKind::While, {g, b}, RmlType::unit_t());
    }
    case TermKind::Mkvar: {
      TermPtr r = check(t->kids[0], RmlType::arrow(RmlType::unit_t(), RmlType::int_t()));
      TermPtr w = check(t->kids[1], RmlType::arrow(RmlType::int_t(), RmlType::unit_t()));
      return typed(t, TermKind::Mkvar, {r, w}, RmlType::intref_t());
    }
    case TermKind::Omega: {
      TypePtr ty = expect ? expect : RmlType::unit_t();
      if (ty->kind == TypeKind::Unit) return with_pos(t, diverge_unit());
      if (ty->kind == TypeKind::Int) return with_pos(t, diverge_int());
      throw TypeError("Ω is only admitted at base types, needed " + type_to_string(ty),
                      t->line, t->col);
    }
    case TermKind::Let: {
      // let x = M in N  ~>  (λx.N) M
      TermPtr bound = check(t->kids[0], nullptr);
      TermPtr lam;
      {
        env_scope scope(*this, t->name, bound->type);
        TermPtr body = check(t->kids[1], expect);
        lam = mk_lambda(t->name, bound->type, body);
      }
      return typed(t, TermKind::App, {lam, bound}, lam->type->cod);
    }
    case TermKind::Seq: {
      TermPtr first = check(t->kids[0], nullptr);
      std::string fresh = "_seq" + std::to_string(fresh_++);
      TermPtr lam;
      {
        env_scope scope(*this, fresh, first->type);
        TermPtr second = check(t->kids[1], expect);
        lam = mk_lambda(fresh, first->type, second);
      }
      return typed(t, TermKind::App, {lam, first}, lam->type->cod);
    }
    case TermKind::IntEq: {
      // Finite case split: let a = M in let b = N in E_0(a, b).
      TermPtr lhs = check(t->kids[0], RmlType::int_t());
      TermPtr rhs = check(t->kids[1], RmlType::int_t());
      std::string a = "_eqa" + std::to_string(fresh_);
      std::string b = "_eqb" + std::to_string(fresh_);
      fresh_++;
      TermPtr body = eq_body(var(a), var(b), 0);
      TermPtr inner = typed_app(mk_lambda(b, RmlType::int_t(), body), rhs);
      TermPtr outer = typed_app(mk_lambda(a, RmlType::int_t(), inner), lhs);
      return with_pos(t, outer);
    }
    }
    throw TypeError("malformed term", t->line, t->col);
  }

  // E_j(a,b) = if a then (if b then E_{j+1}(pred a, pred b) else 0)
  //            else (if b then 0 else 1); both-nonzero is unreachable at j=k-1.
  TermPtr eq_body(TermPtr ta, TermPtr tb, int j) {
    TermPtr then_inner;
    if (j == k_ - 1) {
      then_inner = lit(0, nullptr);
    } else {
      then_inner = eq_body(typed(nullptr, TermKind::Pred, {ta}, RmlType::int_t()),
                           typed(nullptr, TermKind::Pred, {tb}, RmlType::int_t()), j + 1);
    }
    TermPtr then_b = typed(nullptr, TermKind::Cond, {tb, then_inner, lit(0, nullptr)}, RmlType::int_t());
    TermPtr else_b = typed(nullptr, TermKind::Cond, {tb, lit(0, nullptr), lit(1, nullptr)}, RmlType::int_t());
    return typed(nullptr, TermKind::Cond, {ta, then_b, else_b}, RmlType::int_t());
  }

  TermPtr diverge_unit() {
    return typed(nullptr, TermKind::While, {lit(1, nullptr), unitv()}, RmlType::unit_t());
  }
  TermPtr diverge_int() {
    std::string fresh = "_om" + std::to_string(fresh_++);
    TermPtr lam = mk_lambda(fresh, RmlType::unit_t(), lit(0, nullptr));
    return typed(nullptr, TermKind::App, {lam, diverge_unit()}, RmlType::int_t());
  }

  TermPtr var(const std::string& name) {
    auto n = typed(nullptr, TermKind::Var, {}, RmlType::int_t());
    std::const_pointer_cast<Term>(n)->name = name;
    return n;
  }
  TermPtr lit(int v, const TermPtr& pos) {
    auto n = typed(pos, TermKind::Lit, {}, RmlType::int_t());
    std::const_pointer_cast<Term>(n)->lit = v;
    return n;
  }
  TermPtr unitv() { return typed(nullptr, TermKind::Unit, {}, RmlType::unit_t()); }

  TermPtr mk_lambda(const std::string& name, TypePtr binder, TermPtr body) {
    auto n = typed(nullptr, TermKind::Lambda, {body}, RmlType::arrow(binder, body->type));
    auto m = std::const_pointer_cast<Term>(n);
    m->name = name;
    m->binder_type = binder;
    return n;
  }
  TermPtr typed_app(TermPtr f, TermPtr a) {
    return typed(nullptr, TermKind::App, {f, a}, f->type->cod);
  }

  static TermPtr typed(const TermPtr& pos, TermKind k, std::vector<TermPtr> kids, TypePtr ty) {
    auto n = mk_term(k, std::move(kids));
    auto m = std::const_pointer_cast<Term>(n);
    m->type = std::move(ty);
    if (pos) { m->line = pos->line; m->col = pos->col; }
    return n;
  }
  static TermPtr with_pos(const TermPtr& pos, TermPtr n) {
    auto m = std::const_pointer_cast<Term>(n);
    m->line = pos->line;
    m->col = pos->col;
    return n;
  }

  struct env_scope {
    Checker& c;
    std::string name;
    TypePtr saved;
    bool had;
    env_scope(Checker& c, const std::string& n, TypePtr ty) : c(c), name(n) {
      auto it = c.env_.find(n);
      had = it != c.env_.end();
      if (had) saved = it->second;
      c.env_[n] = std::move(ty);
    }
    ~env_scope() {
      if (had) c.env_[name] = saved;
      else c.env_.erase(name);
    }
  };

  int k_;
  int fresh_ = 0;
  std::map<std::string, TypePtr> env_;
};

} // namespace

TermPtr typecheck(const TermPtr& t, const Context& ctx, int k) {
  Checker c(ctx, k);
  return c.check(t, nullptr);
}

} // namespace rmleq
