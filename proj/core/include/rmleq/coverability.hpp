// coverability.hpp -- emptiness of WNDCMA via backward coverability, and a
// forward witness search over canonical data words.
#pragma once

#include <cstdint>
#include <optional>

#include "rmleq/ndcma.hpp"

namespace rmleq {

// A state-labelled tree with canonically sorted children.
struct CfgTree {
  State label;
  std::vector<CfgTree> children;
};
using CfgForest = std::vector<CfgTree>;

struct AbstractConfig {
  State q = 0;
  CfgForest forest;
};

void normalize(CfgTree& t);
void normalize(CfgForest& f);
int compare(const CfgTree& a, const CfgTree& b);

// Label-exact, parent-preserving, injective forest embedding.
bool forest_embed(const CfgForest& a, const CfgForest& b);
bool embed_leq(const AbstractConfig& a, const AbstractConfig& b);

struct EmptinessResult {
  enum Verdict { Empty, NonEmpty, Unknown } verdict = Unknown;
  uint64_t explored = 0;
};

constexpr uint64_t kDefaultBudget = 1'000'000;

EmptinessResult is_empty(const Wndcma& a, uint64_t budget = kDefaultBudget);

std::optional<DataWord> find_witness(const Wndcma& a, int max_len,
                                     uint64_t budget = kDefaultBudget);

// Minimal basis of configurations from which a final control state is
// coverable; exposed for reachability pruning. nullopt when over budget.
std::optional<std::vector<AbstractConfig>> backward_basis(const Wndcma& a, uint64_t budget);

} // namespace rmleq
