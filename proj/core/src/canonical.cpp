#include "rmleq/canonical.hpp"

#include <functional>
#include <map>
#include <set>

namespace rmleq {

namespace {

CanPtr mk_can(CanKind k, TypePtr ty, std::vector<CanPtr> kids = {}) {
  auto c = std::make_shared<CanTerm>();
  c->kind = k;
  c->type = std::move(ty);
  c->kids = std::move(kids);
  return c;
}
std::shared_ptr<CanTerm> mut(const CanPtr& c) { return std::const_pointer_cast<CanTerm>(c); }

TermPtr mk_typed(TermKind k, std::vector<TermPtr> kids, TypePtr ty) {
  auto t = mk_term(k, std::move(kids));
  std::const_pointer_cast<Term>(t)->type = std::move(ty);
  return t;
}

TermPtr mk_var_term(const std::string& name, TypePtr ty) {
  auto t = mk_typed(TermKind::Var, {}, std::move(ty));
  std::const_pointer_cast<Term>(t)->name = name;
  return t;
}

bool is_value_form(const TermPtr& t) {
  switch (t->kind) {
  case TermKind::Unit: case TermKind::Lit: case TermKind::Var: case TermKind::Lambda:
    return true;
  default:
    return false;
  }
}

class Canonicalizer {
public:
  Canonicalizer(const Context& ctx) {
    for (auto& [n, ty] : ctx) { (void)ty; consumed_.insert(n); }
  }

  CanPtr run(const TermPtr& t) {
    collect_free(t, {});
    TermPtr f = freshen(t, {});
    return canon_term(f);
  }

  const std::set<std::string>& free_names() const { return consumed_; }

private:
  using Use = std::function<CanPtr(const TermPtr&)>; // argument is a syntactic value

  // ---- alpha-freshening: make every binder globally unique ----------------

  void collect_free(const TermPtr& t, std::set<std::string> bound) {
    if (t->kind == TermKind::Var && !bound.count(t->name)) consumed_.insert(t->name);
    if (t->kind == TermKind::Lambda) bound.insert(t->name);
    for (auto& k : t->kids) collect_free(k, bound);
  }

  TermPtr freshen(const TermPtr& t, std::map<std::string, std::string> ren) {
    auto n = std::make_shared<Term>(*t);
    if (t->kind == TermKind::Var) {
      auto it = ren.find(t->name);
      if (it != ren.end()) n->name = it->second;
      return n;
    }
    if (t->kind == TermKind::Lambda) {
      std::string nn = claim(t->name);
      ren[t->name] = nn;
      n->name = nn;
    }
    for (auto& k : n->kids) k = freshen(k, ren);
    return n;
  }

  std::string claim(const std::string& base) {
    if (!consumed_.count(base)) {
      consumed_.insert(base);
      return base;
    }
    for (int i = 1;; ++i) {
      std::string cand = base + "_" + std::to_string(i);
      if (!consumed_.count(cand)) {
        consumed_.insert(cand);
        return cand;
      }
    }
  }

  std::string fresh(const char* base) { return claim(base); }

  // ---- substitution of a value term for a variable ------------------------

  TermPtr subst(const TermPtr& t, const std::string& name, const TermPtr& v) {
    if (t->kind == TermKind::Var) return t->name == name ? v : t;
    if (t->kind == TermKind::Lambda && t->name == name) return t; // unique binders: unreachable
    auto n = std::make_shared<Term>(*t);
    for (auto& k : n->kids) k = subst(k, name, v);
    return n;
  }

  // ---- canonical construction ---------------------------------------------

  CanPtr canon_term(const TermPtr& t) {
    switch (t->kind) {
    case TermKind::Unit:
      return mk_can(CanKind::Unit, t->type);
    case TermKind::Lit: {
      auto c = mk_can(CanKind::Lit, t->type);
      mut(c)->lit = t->lit;
      return c;
    }
    case TermKind::Var:
      return handle_to_can(t);
    case TermKind::Lambda: {
      auto c = mk_can(CanKind::Lambda, t->type, {canon_term(t->kids[0])});
      mut(c)->binder = t->name;
      mut(c)->binder_type = t->binder_type;
      return c;
    }
    case TermKind::Succ:
    case TermKind::Pred:
      return bind_base(t->kids[0], [&](const std::string& v) {
        auto c = mk_can(t->kind == TermKind::Succ ? CanKind::Succ : CanKind::Pred, t->type);
        mut(c)->var = v;
        return c;
      });
    case TermKind::Cond:
      return bind_base(t->kids[0], [&](const std::string& g) {
        auto c = mk_can(CanKind::Cond, t->type, {canon_term(t->kids[1]), canon_term(t->kids[2])});
        mut(c)->var = g;
        return c;
      });
    case TermKind::Deref:
      return canon_use(t->kids[0], [&](const TermPtr& h) { return deref_handle(h); });
    case TermKind::Assign:
      return canon_use(t->kids[0], [&](const TermPtr& h) {
        return bind_base(t->kids[1], [&](const std::string& y) { return assign_handle(h, y); });
      });
    case TermKind::While:
      return mk_can(CanKind::While, t->type, {canon_term(t->kids[0]), canon_term(t->kids[1])});
    case TermKind::Mkvar:
    case TermKind::Ref:
    case TermKind::App:
      return canon_use(t, [&](const TermPtr& h) { return handle_to_can(h); });
    default:
      throw UnsupportedConstruct("construct not supported by canonicalization");
    }
  }

  CanPtr canon_use(const TermPtr& t, const Use& use) {
    if (is_value_form(t)) return use(t);
    switch (t->kind) {
    case TermKind::Mkvar:
      return canon_use(t->kids[0], [&](const TermPtr& r) {
        return canon_use(t->kids[1], [&](const TermPtr& w) {
          return use(mk_typed(TermKind::Mkvar, {as_lambda(r), as_lambda(w)}, t->type));
        });
      });
    case TermKind::Cond:
      return bind_base(t->kids[0], [&](const std::string& g) {
        auto c = mk_can(CanKind::Cond, use_type_probe(t), // filled below
                        {canon_use(t->kids[1], use), canon_use(t->kids[2], use)});
        mut(c)->var = g;
        mut(c)->type = c->kids[0]->type;
        return c;
      });
    case TermKind::App:
      return canon_app(t->kids[0], t->kids[1], use);
    case TermKind::Ref: {
      const TermPtr& init = t->kids[0];
      std::string x = fresh("r");
      TermPtr xvar = mk_var_term(x, RmlType::intref_t());
      if (init->kind == TermKind::Lit && init->lit == 0) {
        auto c = mk_can(CanKind::RefLet, nullptr, {use(xvar)});
        mut(c)->binder = x;
        mut(c)->type = c->kids[0]->type;
        return c;
      }
      return bind_base(init, [&](const std::string& v) {
        // let x = ref 0 in (x := v); ...
        CanPtr wr = mk_can(CanKind::Assign, RmlType::unit_t());
        mut(wr)->var = x;
        mut(wr)->var2 = v;
        CanPtr cont = use(xvar);
        CanPtr seq = mk_can(CanKind::LetBase, cont->type, {wr, cont});
        mut(seq)->binder = fresh("t");
        mut(seq)->binder_type = RmlType::unit_t();
        auto c = mk_can(CanKind::RefLet, cont->type, {seq});
        mut(c)->binder = x;
        return c;
      });
    }
    case TermKind::Succ:
    case TermKind::Pred:
      return bind_base(t->kids[0], [&](const std::string& v) {
        auto op = mk_can(t->kind == TermKind::Succ ? CanKind::Succ : CanKind::Pred, t->type);
        mut(op)->var = v;
        return name_and_use(op, t->type, use);
      });
    case TermKind::Deref:
      return canon_use(t->kids[0], [&](const TermPtr& rh) {
        return name_and_use(deref_handle(rh), t->type, use);
      });
    case TermKind::Assign:
      return canon_use(t->kids[0], [&](const TermPtr& rh) {
        return bind_base(t->kids[1], [&](const std::string& y) {
          return name_and_use(assign_handle(rh, y), t->type, use);
        });
      });
    case TermKind::While:
      return name_and_use(canon_term(t), t->type, use);
    default:
      throw UnsupportedConstruct("construct not supported by canonicalization");
    }
  }

  static TypePtr use_type_probe(const TermPtr&) { return nullptr; }

  CanPtr canon_app(const TermPtr& f, const TermPtr& a, const Use& use) {
    return canon_use(f, [&](const TermPtr& fh) -> CanPtr {
      if (fh->kind == TermKind::Lambda) {
        if (fh->binder_type->is_base()) {
          return bind_base(a, [&](const std::string& y) {
            return canon_use(subst(fh->kids[0], fh->name, mk_var_term(y, fh->binder_type)), use);
          });
        }
        return canon_use(a, [&](const TermPtr& ah) {
          return canon_use(subst(fh->kids[0], fh->name, ah), use);
        });
      }
      if (fh->kind == TermKind::Var) {
        const std::string z = fh->name;
        TypePtr res = fh->type->cod;
        TypePtr dom = fh->type->dom;
        if (dom->is_base()) {
          return bind_base(a, [&](const std::string& y) {
            std::string x = fresh("r");
            CanPtr body = use(mk_var_term(x, res));
            auto c = mk_can(CanKind::LetAppBase, body->type, {body});
            mut(c)->binder = x;
            mut(c)->var = z;
            mut(c)->var2 = y;
            mut(c)->binder_type = res;
            return c;
          });
        }
        if (dom->kind == TypeKind::IntRef) {
          return canon_use(a, [&](const TermPtr& ah) {
            auto [u, rbody, v, wbody] = mkvar_parts(ah);
            std::string x = fresh("r");
            CanPtr body = use(mk_var_term(x, res));
            auto c = mk_can(CanKind::LetAppMkvar, body->type, {rbody, wbody, body});
            mut(c)->binder = x;
            mut(c)->var = z;
            mut(c)->aux1 = u;
            mut(c)->aux2 = v;
            mut(c)->binder_type = res;
            return c;
          });
        }
        return canon_use(a, [&](const TermPtr& ah0) {
          TermPtr ah = as_lambda(ah0);
          std::string x = fresh("r");
          CanPtr body = use(mk_var_term(x, res));
          auto c = mk_can(CanKind::LetAppFn, body->type, {canon_term(ah->kids[0]), body});
          mut(c)->binder = x;
          mut(c)->var = z;
          mut(c)->aux1 = ah->name;
          mut(c)->binder_type = ah->binder_type;
          return c;
        });
      }
      throw UnsupportedConstruct("application head is not a function value");
    });
  }

  // bind a computed base value to a fresh name and continue
  CanPtr name_and_use(const CanPtr& bound, const TypePtr& ty, const Use& use) {
    std::string x = fresh("t");
    CanPtr body = use(mk_var_term(x, ty));
    auto c = mk_can(CanKind::LetBase, body->type, {bound, body});
    mut(c)->binder = x;
    mut(c)->binder_type = ty;
    return c;
  }

  CanPtr bind_base(const TermPtr& t, const std::function<CanPtr(const std::string&)>& k) {
    if (t->kind == TermKind::Var) return k(t->name);
    return canon_use(t, [&](const TermPtr& h) {
      if (h->kind == TermKind::Var) return k(h->name);
      std::string x = fresh("t");
      CanPtr body = k(x);
      auto c = mk_can(CanKind::LetBase, body->type, {handle_to_can(h), body});
      mut(c)->binder = x;
      mut(c)->binder_type = t->type;
      return c;
    });
  }

  // Turn a syntactic value of function type into a lambda.
  TermPtr as_lambda(const TermPtr& h) {
    if (h->kind == TermKind::Lambda) return h;
    if (h->kind == TermKind::Var && h->type->is_arrow()) {
      std::string w = fresh("w");
      TermPtr body = mk_typed(TermKind::App, {h, mk_var_term(w, h->type->dom)}, h->type->cod);
      auto lam = mk_typed(TermKind::Lambda, {body}, h->type);
      auto m = std::const_pointer_cast<Term>(lam);
      m->name = w;
      m->binder_type = h->type->dom;
      return lam;
    }
    throw UnsupportedConstruct("expected a function value");
  }

  // Read/write methods of an intref value: binder + canonical body each.
  std::tuple<std::string, CanPtr, std::string, CanPtr> mkvar_parts(const TermPtr& h) {
    if (h->kind == TermKind::Mkvar) {
      const TermPtr& r = h->kids[0];
      const TermPtr& w = h->kids[1];
      return {r->name, canon_term(r->kids[0]), w->name, canon_term(w->kids[0])};
    }
    if (h->kind == TermKind::Var) {
      std::string u = fresh("u"), v = fresh("v");
      CanPtr rd = mk_can(CanKind::Deref, RmlType::int_t());
      mut(rd)->var = h->name;
      CanPtr wr = mk_can(CanKind::Assign, RmlType::unit_t());
      mut(wr)->var = h->name;
      mut(wr)->var2 = v;
      return {u, rd, v, wr};
    }
    throw UnsupportedConstruct("expected an int ref value");
  }

  CanPtr deref_handle(const TermPtr& h) {
    if (h->kind == TermKind::Var) {
      auto c = mk_can(CanKind::Deref, RmlType::int_t());
      mut(c)->var = h->name;
      return c;
    }
    // !mkvar(λu.R, λv.W) runs R with u = ()
    auto [u, rbody, v, wbody] = mkvar_parts(h);
    (void)v;
    (void)wbody;
    auto c = mk_can(CanKind::LetBase, RmlType::int_t(), {mk_can(CanKind::Unit, RmlType::unit_t()), rbody});
    mut(c)->binder = u;
    mut(c)->binder_type = RmlType::unit_t();
    return c;
  }

  CanPtr assign_handle(const TermPtr& h, const std::string& y) {
    if (h->kind == TermKind::Var) {
      auto c = mk_can(CanKind::Assign, RmlType::unit_t());
      mut(c)->var = h->name;
      mut(c)->var2 = y;
      return c;
    }
    // mkvar(λu.R, λv.W) := y runs W with v = y
    auto [u, rbody, v, wbody] = mkvar_parts(h);
    (void)u;
    (void)rbody;
    CanPtr yv = mk_can(CanKind::Var, RmlType::int_t());
    mut(yv)->var = y;
    auto c = mk_can(CanKind::LetBase, RmlType::unit_t(), {yv, wbody});
    mut(c)->binder = v;
    mut(c)->binder_type = RmlType::int_t();
    return c;
  }

  // Tail position: realize a value handle as a canonical term.
  CanPtr handle_to_can(const TermPtr& h) {
    switch (h->kind) {
    case TermKind::Unit:
      return mk_can(CanKind::Unit, h->type);
    case TermKind::Lit: {
      auto c = mk_can(CanKind::Lit, h->type);
      mut(c)->lit = h->lit;
      return c;
    }
    case TermKind::Var: {
      if (h->type->is_base()) {
        auto c = mk_can(CanKind::Var, h->type);
        mut(c)->var = h->name;
        return c;
      }
      if (h->type->kind == TypeKind::IntRef) {
        auto [u, rd, v, wr] = mkvar_parts(h);
        auto c = mk_can(CanKind::Mkvar, h->type, {rd, wr});
        mut(c)->aux1 = u;
        mut(c)->aux2 = v;
        return c;
      }
      return canon_term(as_lambda(h));
    }
    case TermKind::Lambda:
      return canon_term(h);
    case TermKind::Mkvar: {
      auto [u, rd, v, wr] = mkvar_parts(h);
      auto c = mk_can(CanKind::Mkvar, h->type, {rd, wr});
      mut(c)->aux1 = u;
      mut(c)->aux2 = v;
      return c;
    }
    default:
      throw UnsupportedConstruct("not a value");
    }
  }

  std::set<std::string> consumed_;
};

// drop trivial reflections: let x = C in x computes exactly C
CanPtr simplify_can(const CanPtr& c) {
  auto r = std::make_shared<CanTerm>(*c);
  for (auto& k : r->kids) k = simplify_can(k);
  if (r->kind == CanKind::LetBase && r->kids[1]->kind == CanKind::Var &&
      r->kids[1]->var == r->binder)
    return r->kids[0];
  return r;
}

// deterministic binder names; output is stable across re-canonicalization
class AlphaNorm {
public:
  explicit AlphaNorm(std::set<std::string> avoid) : avoid_(std::move(avoid)) {}

  CanPtr walk(const CanPtr& c, std::map<std::string, std::string> ren) {
    auto r = std::make_shared<CanTerm>(*c);
    auto use = [&](const std::string& v) {
      auto it = ren.find(v);
      return it == ren.end() ? v : it->second;
    };
    r->var = use(c->var);
    r->var2 = use(c->var2);
    auto bind = [&](std::string& binder, std::map<std::string, std::string>& scope) {
      if (binder.empty()) return;
      std::string nn = next_name();
      scope[binder] = nn;
      binder = nn;
    };
    switch (c->kind) {
    case CanKind::Lambda:
    case CanKind::RefLet: {
      auto scope = ren;
      bind(r->binder, scope);
      r->kids[0] = walk(c->kids[0], scope);
      break;
    }
    case CanKind::Mkvar: {
      auto s1 = ren, s2 = ren;
      bind(r->aux1, s1);
      bind(r->aux2, s2);
      r->kids[0] = walk(c->kids[0], s1);
      r->kids[1] = walk(c->kids[1], s2);
      break;
    }
    case CanKind::LetBase: {
      r->kids[0] = walk(c->kids[0], ren);
      auto scope = ren;
      bind(r->binder, scope);
      r->kids[1] = walk(c->kids[1], scope);
      break;
    }
    case CanKind::LetAppBase: {
      auto scope = ren;
      bind(r->binder, scope);
      r->kids[0] = walk(c->kids[0], scope);
      break;
    }
    case CanKind::LetAppMkvar: {
      auto s1 = ren, s2 = ren, sb = ren;
      bind(r->aux1, s1);
      bind(r->aux2, s2);
      bind(r->binder, sb);
      r->kids[0] = walk(c->kids[0], s1);
      r->kids[1] = walk(c->kids[1], s2);
      r->kids[2] = walk(c->kids[2], sb);
      break;
    }
    case CanKind::LetAppFn: {
      auto s1 = ren, sb = ren;
      bind(r->aux1, s1);
      bind(r->binder, sb);
      r->kids[0] = walk(c->kids[0], s1);
      r->kids[1] = walk(c->kids[1], sb);
      break;
    }
    default:
      for (size_t i = 0; i < r->kids.size(); ++i) r->kids[i] = walk(c->kids[i], ren);
      break;
    }
    return r;
  }

private:
  std::string next_name() {
    for (;;) {
      std::string cand = "x" + std::to_string(n_++);
      if (!avoid_.count(cand)) return cand;
    }
  }
  std::set<std::string> avoid_;
  int n_ = 0;
};

} // namespace

CanPtr canonicalize(const TermPtr& t, const Context& ctx) {
  Canonicalizer c(ctx);
  CanPtr raw = simplify_can(c.run(t));
  std::set<std::string> avoid;
  for (auto& [n, ty] : ctx) {
    (void)ty;
    avoid.insert(n);
  }
  AlphaNorm norm(std::move(avoid));
  return norm.walk(raw, {});
}

// ---- validation of raw terms against the canonical grammar ----------------

namespace {

using Env = std::map<std::string, TypePtr>;

TypePtr validate_rec(const TermPtr& t, Env env);

TypePtr var_type(const TermPtr& t, const Env& env) {
  if (t->kind != TermKind::Var) return nullptr;
  auto it = env.find(t->name);
  return it == env.end() ? nullptr : it->second;
}

bool is_base_var(const TermPtr& t, const Env& env, TypeKind k) {
  TypePtr ty = var_type(t, env);
  return ty && ty->kind == k;
}

TypePtr validate_rec(const TermPtr& t, Env env) {
  switch (t->kind) {
  case TermKind::Unit: return RmlType::unit_t();
  case TermKind::Lit: return RmlType::int_t();
  case TermKind::Var: {
    TypePtr ty = var_type(t, env);
    return (ty && ty->is_base()) ? ty : nullptr;
  }
  case TermKind::Succ:
  case TermKind::Pred:
    return is_base_var(t->kids[0], env, TypeKind::Int) ? RmlType::int_t() : nullptr;
  case TermKind::Cond: {
    if (!is_base_var(t->kids[0], env, TypeKind::Int)) return nullptr;
    TypePtr a = validate_rec(t->kids[1], env);
    TypePtr b = validate_rec(t->kids[2], env);
    return (a && b && type_equal(a, b)) ? a : nullptr;
  }
  case TermKind::Assign:
    return (is_base_var(t->kids[0], env, TypeKind::IntRef) &&
            is_base_var(t->kids[1], env, TypeKind::Int))
               ? RmlType::unit_t()
               : nullptr;
  case TermKind::Deref:
    return is_base_var(t->kids[0], env, TypeKind::IntRef) ? RmlType::int_t() : nullptr;
  case TermKind::Lambda: {
    if (!t->binder_type) return nullptr;
    env[t->name] = t->binder_type;
    TypePtr b = validate_rec(t->kids[0], env);
    return b ? RmlType::arrow(t->binder_type, b) : nullptr;
  }
  case TermKind::Mkvar: {
    const TermPtr& r = t->kids[0];
    const TermPtr& w = t->kids[1];
    if (r->kind != TermKind::Lambda || w->kind != TermKind::Lambda) return nullptr;
    if (!r->binder_type || r->binder_type->kind != TypeKind::Unit) return nullptr;
    if (!w->binder_type || w->binder_type->kind != TypeKind::Int) return nullptr;
    Env er = env, ew = env;
    er[r->name] = RmlType::unit_t();
    ew[w->name] = RmlType::int_t();
    TypePtr rt = validate_rec(r->kids[0], er);
    TypePtr wt = validate_rec(w->kids[0], ew);
    if (!rt || rt->kind != TypeKind::Int || !wt || wt->kind != TypeKind::Unit) return nullptr;
    return RmlType::intref_t();
  }
  case TermKind::While: {
    TypePtr g = validate_rec(t->kids[0], env);
    TypePtr b = validate_rec(t->kids[1], env);
    return (g && g->kind == TypeKind::Int && b && b->kind == TypeKind::Unit) ? RmlType::unit_t()
                                                                             : nullptr;
  }
  case TermKind::Let: {
    const TermPtr& bound = t->kids[0];
    // let x = ref 0 in C
    if (bound->kind == TermKind::Ref) {
      if (bound->kids[0]->kind != TermKind::Lit || bound->kids[0]->lit != 0) return nullptr;
      env[t->name] = RmlType::intref_t();
      return validate_rec(t->kids[1], env);
    }
    // let x = z <arg> in C
    if (bound->kind == TermKind::App) {
      TypePtr zt = var_type(bound->kids[0], env);
      if (!zt || !zt->is_arrow()) return nullptr;
      const TermPtr& arg = bound->kids[1];
      bool ok = false;
      if (arg->kind == TermKind::Var) {
        TypePtr at = var_type(arg, env);
        ok = at && at->is_base() && type_equal(at, zt->dom);
      } else if (arg->kind == TermKind::Mkvar) {
        ok = zt->dom->kind == TypeKind::IntRef && validate_rec(arg, env) != nullptr;
      } else if (arg->kind == TermKind::Lambda) {
        TypePtr at = validate_rec(arg, env);
        ok = at && type_equal(at, zt->dom);
      }
      if (!ok) return nullptr;
      env[t->name] = zt->cod;
      return validate_rec(t->kids[1], env);
    }
    // let x : β = C in C
    TypePtr bt = validate_rec(bound, env);
    if (!bt || !bt->is_base()) return nullptr;
    env[t->name] = bt;
    return validate_rec(t->kids[1], env);
  }
  default:
    return nullptr;
  }
}

} // namespace

bool validate_canonical(const TermPtr& t, const Context& ctx) {
  Env env;
  for (auto& [n, ty] : ctx) env[n] = ty;
  return validate_rec(t, env) != nullptr;
}

// ---- embedding and printing ------------------------------------------------

TermPtr embed_canonical(const CanPtr& c) {
  auto var = [](const std::string& n) {
    auto t = mk_term(TermKind::Var);
    std::const_pointer_cast<Term>(t)->name = n;
    return t;
  };
  auto lam = [](const std::string& b, TypePtr ty, TermPtr body) {
    auto t = mk_term(TermKind::Lambda, {std::move(body)});
    auto m = std::const_pointer_cast<Term>(t);
    m->name = b;
    m->binder_type = std::move(ty);
    return t;
  };
  auto let = [](const std::string& b, TermPtr bound, TermPtr body) {
    auto t = mk_term(TermKind::Let, {std::move(bound), std::move(body)});
    std::const_pointer_cast<Term>(t)->name = b;
    return t;
  };
  switch (c->kind) {
  case CanKind::Unit: return mk_term(TermKind::Unit);
  case CanKind::Lit: {
    auto t = mk_term(TermKind::Lit);
    std::const_pointer_cast<Term>(t)->lit = c->lit;
    return t;
  }
  case CanKind::Var: return var(c->var);
  case CanKind::Succ: return mk_term(TermKind::Succ, {var(c->var)});
  case CanKind::Pred: return mk_term(TermKind::Pred, {var(c->var)});
  case CanKind::Cond:
    return mk_term(TermKind::Cond, {var(c->var), embed_canonical(c->kids[0]), embed_canonical(c->kids[1])});
  case CanKind::Assign: return mk_term(TermKind::Assign, {var(c->var), var(c->var2)});
  case CanKind::Deref: return mk_term(TermKind::Deref, {var(c->var)});
  case CanKind::Lambda: return lam(c->binder, c->binder_type, embed_canonical(c->kids[0]));
  case CanKind::Mkvar:
    return mk_term(TermKind::Mkvar, {lam(c->aux1, RmlType::unit_t(), embed_canonical(c->kids[0])),
                                     lam(c->aux2, RmlType::int_t(), embed_canonical(c->kids[1]))});
  case CanKind::RefLet: {
    auto zero = mk_term(TermKind::Lit);
    return let(c->binder, mk_term(TermKind::Ref, {zero}), embed_canonical(c->kids[0]));
  }
  case CanKind::While:
    return mk_term(TermKind::While, {embed_canonical(c->kids[0]), embed_canonical(c->kids[1])});
  case CanKind::LetBase:
    return let(c->binder, embed_canonical(c->kids[0]), embed_canonical(c->kids[1]));
  case CanKind::LetAppBase:
    return let(c->binder, mk_term(TermKind::App, {var(c->var), var(c->var2)}),
               embed_canonical(c->kids[0]));
  case CanKind::LetAppMkvar: {
    auto mv = mk_term(TermKind::Mkvar, {lam(c->aux1, RmlType::unit_t(), embed_canonical(c->kids[0])),
                                        lam(c->aux2, RmlType::int_t(), embed_canonical(c->kids[1]))});
    return let(c->binder, mk_term(TermKind::App, {var(c->var), mv}), embed_canonical(c->kids[2]));
  }
  case CanKind::LetAppFn: {
    auto fn = lam(c->aux1, c->binder_type, embed_canonical(c->kids[0]));
    return let(c->binder, mk_term(TermKind::App, {var(c->var), fn}), embed_canonical(c->kids[1]));
  }
  }
  throw UnsupportedConstruct("bad canonical node");
}

std::string canonical_to_string(const CanPtr& c) { return term_to_string(embed_canonical(c)); }

} // namespace rmleq
