#include "rmleq/classify.hpp"

namespace rmleq {

std::string reason_to_string(UndecidableReason r) {
  switch (r) {
  case UndecidableReason::ThirdOrder: return "third-order type";
  case UndecidableReason::TwoFirstOrderArgs: return "two first-order arguments";
  case UndecidableReason::NonFinalFirstOrderArg: return "non-final first-order argument";
  case UndecidableReason::LhsFourthOrder: return "context type encodes an undecidable instance";
  }
  return "?";
}

bool is_theta0(const TypePtr& t) { return t->is_base(); }

bool is_theta1(const TypePtr& t) {
  if (is_theta0(t)) return true;
  if (t->kind == TypeKind::IntRef) return true;
  if (t->is_arrow()) return is_theta0(t->dom) && is_theta1(t->cod);
  return false;
}

bool is_theta1_hat(const TypePtr& t) {
  if (is_theta0(t)) return true;
  if (t->kind == TypeKind::IntRef) return true;
  if (t->is_arrow()) return is_theta1(t->dom) && is_theta0(t->cod);
  return false;
}

bool is_theta1_1(const TypePtr& t) {
  if (is_theta0(t)) return true;
  if (t->kind == TypeKind::IntRef) return true;
  if (t->is_arrow()) return is_theta0(t->dom) && is_theta0(t->cod);
  return false;
}

bool is_theta2_1(const TypePtr& t) {
  if (is_theta1(t)) return true;
  if (t->is_arrow()) return is_theta1_1(t->dom) && is_theta2_1(t->cod);
  return false;
}

namespace {

std::optional<UndecidableReason> rhs_undecidable(const TypePtr& t) {
  int ord = type_order(t);
  if (ord >= 3) return UndecidableReason::ThirdOrder;
  if (ord == 2) {
    auto args = argument_types(t);
    int first_order = 0;
    for (auto& a : args)
      if (type_order(a) == 1) first_order++;
    if (first_order >= 2) return UndecidableReason::TwoFirstOrderArgs;
    if (args.size() >= 2)
      for (size_t i = 0; i + 1 < args.size(); ++i)
        if (type_order(args[i]) == 1) return UndecidableReason::NonFinalFirstOrderArg;
  }
  return std::nullopt;
}

bool lhs_undecidable(const TypePtr& t) {
  if (type_order(t) >= 4) return true;
  for (auto& a : argument_types(t))
    if (rhs_undecidable(a)) return true;
  return false;
}

} // namespace

FragmentClass classify(const TypeSequent& seq) {
  FragmentClass fc;
  if (auto r = rhs_undecidable(seq.subject)) {
    fc.undecidable_reason = r;
    return fc;
  }
  for (auto& [name, ty] : seq.context) {
    (void)name;
    if (lhs_undecidable(ty)) {
      fc.undecidable_reason = UndecidableReason::LhsFourthOrder;
      return fc;
    }
  }
  bool subject_ok = is_theta1(seq.subject);
  fc.in_pstrict = subject_ok;
  fc.in_rforml = subject_ok;
  for (auto& [name, ty] : seq.context) {
    (void)name;
    if (!is_theta1_hat(ty)) fc.in_pstrict = false;
    if (!is_theta2_1(ty)) fc.in_rforml = false;
  }
  fc.unknown = !fc.in_pstrict && !fc.in_rforml;
  return fc;
}

} // namespace rmleq
