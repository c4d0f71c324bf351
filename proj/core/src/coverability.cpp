#include "rmleq/coverability.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

namespace rmleq {

int compare(const CfgTree& a, const CfgTree& b) {
  if (a.label != b.label) return a.label < b.label ? -1 : 1;
  if (a.children.size() != b.children.size())
    return a.children.size() < b.children.size() ? -1 : 1;
  for (size_t i = 0; i < a.children.size(); ++i)
    if (int c = compare(a.children[i], b.children[i])) return c;
  return 0;
}

void normalize(CfgTree& t) {
  for (auto& c : t.children) normalize(c);
  std::sort(t.children.begin(), t.children.end(),
            [](const CfgTree& x, const CfgTree& y) { return compare(x, y) < 0; });
}

void normalize(CfgForest& f) {
  for (auto& t : f) normalize(t);
  std::sort(f.begin(), f.end(),
            [](const CfgTree& x, const CfgTree& y) { return compare(x, y) < 0; });
}

namespace {

bool tree_embed(const CfgTree& a, const CfgTree& b);

// Injective matching of forest a into forest b (backtracking).
bool match_from(const CfgForest& a, const CfgForest& b, size_t i, std::vector<char>& used) {
  if (i == a.size()) return true;
  for (size_t j = 0; j < b.size(); ++j) {
    if (used[j] || !tree_embed(a[i], b[j])) continue;
    used[j] = 1;
    if (match_from(a, b, i + 1, used)) return true;
    used[j] = 0;
  }
  return false;
}

bool tree_embed(const CfgTree& a, const CfgTree& b) {
  if (a.label != b.label) return false;
  if (a.children.size() > b.children.size()) return false;
  std::vector<char> used(b.children.size(), 0);
  return match_from(a.children, b.children, 0, used);
}

} // namespace

bool forest_embed(const CfgForest& a, const CfgForest& b) {
  if (a.size() > b.size()) return false;
  std::vector<char> used(b.size(), 0);
  return match_from(a, b, 0, used);
}

bool embed_leq(const AbstractConfig& a, const AbstractConfig& b) {
  return a.q == b.q && forest_embed(a.forest, b.forest);
}

namespace {

// All predecessor candidates of (t.src fires entry `e`) covering basis
// element b. The mapped slice of b's forest is the part that lands on the
// rewritten value chain.
void pre_candidates(const Trans& e, const AbstractConfig& b, std::vector<AbstractConfig>& out) {
  int width = (int)e.sig.size();
  int m = -1; // last non-BOT slot of the signature
  for (int i = 0; i < width; ++i) {
    if (e.sig[i] != BOT) {
      if (i != m + 1) return; // BOT entries must form a suffix
      m = i;
    }
  }

  // chain(j..m) of sigma labels wrapped around the given grafts
  auto build_chain = [&](int upto, const std::vector<CfgForest>& grafts) {
    CfgTree node{e.sig[upto], grafts.size() > (size_t)upto ? grafts[upto] : CfgForest{}};
    for (int j = upto - 1; j >= 0; --j) {
      CfgTree up{e.sig[j], grafts.size() > (size_t)j ? grafts[j] : CfgForest{}};
      up.children.push_back(std::move(node));
      node = std::move(up);
    }
    return node;
  };

  // Option: no part of b's forest sits on the chain.
  {
    AbstractConfig c{e.src, b.forest};
    if (m >= 0) c.forest.push_back(build_chain(m, {}));
    normalize(c.forest);
    out.push_back(std::move(c));
  }

  // Option: a root of b's forest maps onto chain node 0, with a descending
  // path x_0 .. x_d along the chain.
  for (size_t r = 0; r < b.forest.size(); ++r) {
    if (b.forest[r].label != e.upd[0]) continue;
    CfgForest rest;
    for (size_t i = 0; i < b.forest.size(); ++i)
      if (i != r) rest.push_back(b.forest[i]);

    // walk(d, x_d, grafts so far)
    std::function<void(int, const CfgTree&, std::vector<CfgForest>&)> walk =
        [&](int d, const CfgTree& x, std::vector<CfgForest>& grafts) {
          // stop the path at x (depth d): remaining children become grafts
          bool stop_ok = d <= m || x.children.empty();
          if (stop_ok) {
            std::vector<CfgForest> g = grafts;
            if (d <= m) {
              g.resize(std::max<size_t>(g.size(), d + 1));
              g[d] = x.children;
            }
            AbstractConfig c{e.src, rest};
            if (m >= 0) c.forest.push_back(build_chain(m, g));
            normalize(c.forest);
            out.push_back(std::move(c));
          }
          if (d + 1 >= width) return;
          for (size_t ci = 0; ci < x.children.size(); ++ci) {
            const CfgTree& next = x.children[ci];
            if (next.label != e.upd[d + 1]) continue;
            bool extend_ok = d <= m || x.children.size() == 1;
            if (!extend_ok) continue;
            std::vector<CfgForest> g = grafts;
            if (d <= m) {
              g.resize(std::max<size_t>(g.size(), d + 1));
              CfgForest others;
              for (size_t cj = 0; cj < x.children.size(); ++cj)
                if (cj != ci) others.push_back(x.children[cj]);
              g[d] = std::move(others);
            }
            walk(d + 1, next, g);
          }
        };
    std::vector<CfgForest> grafts;
    walk(0, b.forest[r], grafts);
  }
}

} // namespace

std::optional<std::vector<AbstractConfig>> backward_basis(const Wndcma& a, uint64_t budget) {
  std::vector<AbstractConfig> basis;
  std::deque<AbstractConfig> queue;
  uint64_t explored = 0;

  auto insert = [&](AbstractConfig&& c) {
    for (const AbstractConfig& e : basis)
      if (embed_leq(e, c)) return; // already covered
    std::vector<AbstractConfig> kept;
    for (auto& e : basis)
      if (!embed_leq(c, e)) kept.push_back(std::move(e));
    basis = std::move(kept);
    basis.push_back(c);
    queue.push_back(std::move(c));
  };

  for (State q = 0; q < a.num_states(); ++q)
    if (a.is_final(q)) insert(AbstractConfig{q, {}});

  while (!queue.empty()) {
    // processing elements later dropped from the basis is redundant but sound
    AbstractConfig b = queue.front();
    queue.pop_front();
    for (const Trans& e : a.trans) {
      if (e.dst != b.q) continue;
      std::vector<AbstractConfig> cands;
      pre_candidates(e, b, cands);
      for (auto& c : cands) {
        if (++explored > budget) return std::nullopt;
        insert(std::move(c));
      }
    }
  }
  return basis;
}

EmptinessResult is_empty(const Wndcma& a, uint64_t budget) {
  EmptinessResult r;
  auto basis = backward_basis(a, budget);
  if (!basis) {
    r.verdict = EmptinessResult::Unknown;
    return r;
  }
  for (const AbstractConfig& b : *basis) {
    if (b.q == a.initial && b.forest.empty()) {
      r.verdict = EmptinessResult::NonEmpty;
      return r;
    }
  }
  r.verdict = EmptinessResult::Empty;
  return r;
}

namespace {

struct SearchNode {
  Configuration cfg;
  std::vector<int> parent; // value forest of the word so far
  DataWord word;
};

AbstractConfig abstract_of(const Configuration& cfg, const std::vector<int>& parent, State q) {
  // build trees over the values (all read values have non-BOT memory)
  size_t n = parent.size();
  std::vector<CfgTree> nodes(n);
  for (size_t v = 0; v < n; ++v) nodes[v].label = cfg.mem[v];
  AbstractConfig out{q, {}};
  std::vector<std::vector<int>> kids(n);
  std::vector<int> roots;
  for (size_t v = 0; v < n; ++v)
    if (parent[v] >= 0) kids[parent[v]].push_back((int)v);
    else roots.push_back((int)v);
  std::function<CfgTree(int)> build = [&](int v) {
    CfgTree t{cfg.mem[v], {}};
    for (int c : kids[v]) t.children.push_back(build(c));
    return t;
  };
  for (int rt : roots) out.forest.push_back(build(rt));
  normalize(out.forest);
  return out;
}

} // namespace

std::optional<DataWord> find_witness(const Wndcma& a, int max_len, uint64_t budget) {
  std::deque<SearchNode> queue;
  queue.push_back(SearchNode{{a.initial, {}}, {}, {}});
  // visited abstract configs per control; prune a new node embedding into a
  // visited one (the larger config covers every future of the smaller)
  std::map<State, std::vector<CfgForest>> visited;
  uint64_t explored = 0;

  auto try_prune = [&](const AbstractConfig& ac) {
    for (const CfgForest& f : visited[ac.q])
      if (forest_embed(ac.forest, f)) return true;
    visited[ac.q].push_back(ac.forest);
    return false;
  };

  {
    AbstractConfig ac0{a.initial, {}};
    try_prune(ac0);
  }
  if (a.is_final(a.initial)) return DataWord{};

  while (!queue.empty()) {
    SearchNode n = queue.front();
    queue.pop_front();
    if ((int)n.word.positions.size() >= max_len) continue;
    // target value choices: existing values, a fresh child of each value
    // whose level allows one, and a fresh root
    std::vector<int> choices;
    int nvals = (int)n.parent.size();
    for (int v = 0; v < nvals; ++v) choices.push_back(v);
    choices.push_back(-1); // fresh root marker
    for (int v = 0; v < nvals; ++v) choices.push_back(nvals + 1 + v); // fresh child of v

    for (int letter = 0; letter < (int)a.letters.size(); ++letter) {
      for (int choice : choices) {
        std::vector<int> parent = n.parent;
        int value;
        if (choice >= 0 && choice < nvals) {
          value = choice;
        } else if (choice == -1) {
          value = nvals;
          parent.push_back(-1);
        } else {
          int pv = choice - nvals - 1;
          DataWord probe;
          probe.parent = n.parent;
          if (probe.value_level(pv) + 1 > a.level) continue;
          value = nvals;
          parent.push_back(pv);
        }
        Configuration c = n.cfg;
        c.mem.resize(parent.size(), BOT);
        for (Configuration& succ : step(a, c, letter, value, parent)) {
          if (++explored > budget) return std::nullopt;
          SearchNode s;
          s.cfg = std::move(succ);
          s.parent = parent;
          s.word = n.word;
          s.word.parent = parent;
          s.word.positions.push_back({letter, value});
          if (a.is_final(s.cfg.q)) return s.word;
          AbstractConfig ac = abstract_of(s.cfg, s.parent, s.cfg.q);
          if (!try_prune(ac)) queue.push_back(std::move(s));
        }
      }
    }
  }
  return std::nullopt;
}

} // namespace rmleq
