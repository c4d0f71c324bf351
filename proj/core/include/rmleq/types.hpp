// types.hpp -- finitary RML types: unit, int, int ref, arrows.
#pragma once

#include <memory>
#include <string>
#include <vector>

namespace rmleq {

enum class TypeKind { Unit, Int, IntRef, Arrow };

class RmlType;
using TypePtr = std::shared_ptr<const RmlType>;

class RmlType {
public:
  TypeKind kind;
  TypePtr dom, cod; // Arrow only

  static TypePtr unit_t();
  static TypePtr int_t();
  static TypePtr intref_t();
  static TypePtr arrow(TypePtr a, TypePtr b);

  bool is_base() const { return kind == TypeKind::Unit || kind == TypeKind::Int; }
  bool is_arrow() const { return kind == TypeKind::Arrow; }
};

int type_order(const TypePtr& t);
int type_arity(const TypePtr& t);
bool type_equal(const TypePtr& a, const TypePtr& b);
std::string type_to_string(const TypePtr& t);

// Full uncurrying: t = a1 -> ... -> an -> r with r not an arrow.
std::vector<TypePtr> argument_types(const TypePtr& t);
TypePtr result_type(const TypePtr& t);

struct TypeSequent {
  std::vector<std::pair<std::string, TypePtr>> context; // ordered, distinct names
  TypePtr subject;
};

std::string sequent_to_string(const TypeSequent& s);

} // namespace rmleq
