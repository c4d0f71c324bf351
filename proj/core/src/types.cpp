#include "rmleq/types.hpp"

#include <algorithm>

namespace rmleq {

static TypePtr make(TypeKind k) {
  auto t = std::make_shared<RmlType>();
  t->kind = k;
  return t;
}

TypePtr RmlType::unit_t() {
  static TypePtr t = make(TypeKind::Unit);
  return t;
}
TypePtr RmlType::int_t() {
  static TypePtr t = make(TypeKind::Int);
  return t;
}
TypePtr RmlType::intref_t() {
  static TypePtr t = make(TypeKind::IntRef);
  return t;
}
TypePtr RmlType::arrow(TypePtr a, TypePtr b) {
  auto t = std::make_shared<RmlType>();
  t->kind = TypeKind::Arrow;
  t->dom = std::move(a);
  t->cod = std::move(b);
  return t;
}

int type_order(const TypePtr& t) {
  switch (t->kind) {
  case TypeKind::Unit:
  case TypeKind::Int: return 0;
  case TypeKind::IntRef: return 1;
  case TypeKind::Arrow: return std::max(type_order(t->dom) + 1, type_order(t->cod));
  }
  return 0;
}

int type_arity(const TypePtr& t) {
  switch (t->kind) {
  case TypeKind::Unit:
  case TypeKind::Int: return 0;
  case TypeKind::IntRef: return 1;
  case TypeKind::Arrow: return type_arity(t->cod) + 1;
  }
  return 0;
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  if (a->kind != TypeKind::Arrow) return true;
  return type_equal(a->dom, b->dom) && type_equal(a->cod, b->cod);
}

std::string type_to_string(const TypePtr& t) {
  switch (t->kind) {
  case TypeKind::Unit: return "unit";
  case TypeKind::Int: return "int";
  case TypeKind::IntRef: return "int ref";
  case TypeKind::Arrow: {
    std::string d = type_to_string(t->dom);
    if (t->dom->is_arrow()) d = "(" + d + ")";
    return d + " -> " + type_to_string(t->cod);
  }
  }
  return "?";
}

std::vector<TypePtr> argument_types(const TypePtr& t) {
  std::vector<TypePtr> args;
  TypePtr cur = t;
  while (cur->is_arrow()) {
    args.push_back(cur->dom);
    cur = cur->cod;
  }
  return args;
}

TypePtr result_type(const TypePtr& t) {
  TypePtr cur = t;
  while (cur->is_arrow()) cur = cur->cod;
  return cur;
}

std::string sequent_to_string(const TypeSequent& s) {
  std::string out;
  for (size_t i = 0; i < s.context.size(); ++i) {
    if (i) out += ", ";
    out += s.context[i].first + " : " + type_to_string(s.context[i].second);
  }
  out += " |- " + type_to_string(s.subject);
  return out;
}

} // namespace rmleq
