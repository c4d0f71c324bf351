// classify.hpp -- fragment membership and undecidability screening for
// type sequents.
#pragma once

#include <optional>

#include "rmleq/types.hpp"

namespace rmleq {

enum class UndecidableReason {
  ThirdOrder,            // subject of order >= 3
  TwoFirstOrderArgs,     // 2nd-order subject taking two or more 1st-order arguments
  NonFinalFirstOrderArg, // 2nd-order subject (arity >= 2) with a non-final 1st-order argument
  LhsFourthOrder,        // context type of order >= 4, or with an argument matching one of the above
};

std::string reason_to_string(UndecidableReason r);

struct FragmentClass {
  bool in_pstrict = false;
  bool in_rforml = false;
  bool unknown = false;
  std::optional<UndecidableReason> undecidable_reason;
};

// Type-class predicates used by the two fragments.
bool is_theta0(const TypePtr& t);     // unit | int
bool is_theta1(const TypePtr& t);     // theta0 | theta0 -> theta1 | intref
bool is_theta1_hat(const TypePtr& t); // theta0 | theta1 -> theta0 | intref
bool is_theta1_1(const TypePtr& t);   // theta0 | theta0 -> theta0 | intref
bool is_theta2_1(const TypePtr& t);   // theta1 | theta1_1 -> theta2_1

FragmentClass classify(const TypeSequent& seq);

} // namespace rmleq
