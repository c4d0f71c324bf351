#include "rmleq/arena.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>

namespace rmleq {

namespace {

struct Builder {
  std::vector<Move>& moves;
  int k;

  int add(const std::string& name, bool opp, bool question, int comp,
          std::optional<int> payload, const std::vector<int>& enablers) {
    Move m;
    m.id = (int)moves.size();
    m.name = name;
    m.opp = opp;
    m.question = question;
    m.comp = comp;
    m.payload = payload;
    m.enablers = enablers;
    if (!enablers.empty()) {
      const Move& e = moves[enablers[0]];
      m.level = question ? e.level + 1 : e.level;
      for (int eid : enablers) {
        int lv = question ? moves[eid].level + 1 : moves[eid].level;
        if (lv != m.level) throw std::logic_error("inconsistent move level");
      }
    }
    moves.push_back(m);
    return m.id;
  }

  // Value-shaped moves of type t (one per int payload, else a single move).
  std::vector<int> emit_values(const TypePtr& t, const std::string& name, bool opp, bool question,
                               int comp, const std::vector<int>& enablers,
                               const std::string& suffix) {
    std::vector<int> out;
    if (t->kind == TypeKind::Int) {
      for (int j = 0; j < k; ++j)
        out.push_back(add(name + "(" + std::to_string(j) + ")" + suffix, opp, question, comp, j,
                          enablers));
    } else {
      out.push_back(add(name + suffix, opp, question, comp, std::nullopt, enablers));
    }
    return out;
  }

  // Build the structure hanging below the given value moves of type t.
  // `opp_values` is the owner of the value moves; prefix/suffix feed naming;
  // depth is the spine position of the next argument.
  std::shared_ptr<TypeView> build_below(const TypePtr& t, std::vector<int> values, bool opp_values,
                                        int comp, const std::string& prefix,
                                        const std::string& suffix, int depth) {
    auto v = std::make_shared<TypeView>();
    v->type = t;
    v->values = values;
    if (t->kind == TypeKind::Arrow) {
      std::string qname = prefix + "q" + std::to_string(depth);
      v->arg_questions = emit_values(t->dom, qname, !opp_values, true, comp, values, suffix);
      if (!t->dom->is_base()) {
        v->arg_view = build_below(t->dom, v->arg_questions, !opp_values, comp, qname + ".", suffix, 1);
      }
      std::string aname = prefix + "a" + std::to_string(depth);
      std::vector<int> answers =
          emit_values(t->cod, aname, opp_values, false, comp, v->arg_questions, suffix);
      v->rest_view = build_below(t->cod, answers, opp_values, comp, prefix, suffix, depth + 1);
    } else if (t->kind == TypeKind::IntRef) {
      v->read_q = add(prefix + "read" + suffix, !opp_values, true, comp, std::nullopt, values);
      for (int j = 0; j < k; ++j) {
        v->write_q.push_back(add(prefix + "write(" + std::to_string(j) + ")" + suffix, !opp_values,
                                 true, comp, j, values));
        v->read_a.push_back(add(prefix + "val(" + std::to_string(j) + ")" + suffix, opp_values,
                                false, comp, j, {v->read_q}));
      }
      v->write_a = add(prefix + "ok" + suffix, opp_values, false, comp, std::nullopt, v->write_q);
    }
    return v;
  }
};

} // namespace

Arena arena_of_type(const TypePtr& t, int k) {
  Arena a;
  Builder b{a.moves, k};
  // Arena values are P-answers; initial moves are exactly the values.
  std::vector<int> values = b.emit_values(t, "a0", false, false, -1, {}, "");
  for (int id : values) {
    a.moves[id].initial = true;
    a.initials.push_back(id);
  }
  b.build_below(t, values, false, -1, "", "", 1);
  return a;
}

std::shared_ptr<Prearena> prearena_of_sequent(const TypeSequent& seq, int k) {
  auto p = std::make_shared<Prearena>();
  p->seq = seq;
  p->k = k;
  Builder b{p->moves, k};

  // Initial tuples: one per assignment of values to int-typed context vars.
  std::vector<int> int_vars;
  for (size_t i = 0; i < seq.context.size(); ++i)
    if (seq.context[i].second->kind == TypeKind::Int) int_vars.push_back((int)i);
  std::vector<int> payload(int_vars.size(), 0);
  for (;;) {
    std::string name = "q0";
    if (!payload.empty()) {
      name += "(";
      for (size_t i = 0; i < payload.size(); ++i)
        name += (i ? "," : "") + std::to_string(payload[i]);
      name += ")";
    }
    int id = b.add(name, true, true, -2, std::nullopt, {});
    p->moves[id].initial = true;
    p->initials.push_back(id);
    p->initial_by_payload[payload] = id;
    // advance odometer
    int pos = (int)payload.size() - 1;
    while (pos >= 0 && ++payload[pos] == k) payload[pos--] = 0;
    if (pos < 0) break;
  }

  // Context components: their values are merged into the tuple; deeper moves
  // are enabled by every initial move.
  for (size_t i = 0; i < seq.context.size(); ++i) {
    const auto& [vname, vtype] = seq.context[i];
    auto view = b.build_below(vtype, p->initials, true, (int)i, "", "_" + vname, 1);
    view->values.clear(); // merged into q0
    p->ctx_views.push_back(view);
  }

  // RHS: values enabled by every initial move.
  std::vector<int> rhs_values = b.emit_values(seq.subject, "a0", false, false, -1, p->initials, "");
  p->rhs_view = b.build_below(seq.subject, rhs_values, false, -1, "", "", 1);
  return p;
}

bool is_pstrict(const Prearena& p) {
  // children[m] = moves enabled by m
  std::vector<std::vector<int>> children(p.moves.size());
  for (const Move& m : p.moves)
    for (int e : m.enablers) children[e].push_back(m.id);
  std::function<bool(int)> reaches_pq = [&](int m) {
    for (int c : children[m]) {
      const Move& mc = p.moves[c];
      if (!mc.opp && mc.question) return true;
      if (reaches_pq(c)) return true;
    }
    return false;
  };
  for (const Move& m : p.moves)
    if (!m.opp && m.question && reaches_pq(m.id)) return false;
  return true;
}

int question_depth(const Prearena& p) {
  int d = 0;
  for (const Move& m : p.moves)
    if (m.question && m.level > d) d = m.level;
  return d;
}

std::vector<std::string> Prearena::letter_names() const {
  std::vector<std::string> out;
  out.reserve(moves.size());
  for (const Move& m : moves) out.push_back(m.name);
  return out;
}

std::string Prearena::dump_dot() const {
  std::ostringstream os;
  os << "digraph prearena {\n  rankdir = TB;\n";
  for (const Move& m : moves) {
    os << "  m" << m.id << " [label=\"" << m.name << "\\n" << (m.opp ? "O" : "P")
       << (m.question ? "Q" : "A") << " lv" << m.level << "\"";
    if (m.initial) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (const Move& m : moves)
    for (int e : m.enablers) os << "  m" << e << " -> m" << m.id << ";\n";
  os << "}\n";
  return os.str();
}

void map_views(const TypeView& a, const TypeView& b, std::vector<int>& m) {
  if (a.values.size() != b.values.size() || a.arg_questions.size() != b.arg_questions.size())
    throw std::logic_error("map_views: shape mismatch");
  for (size_t i = 0; i < a.values.size(); ++i) m[a.values[i]] = b.values[i];
  for (size_t i = 0; i < a.arg_questions.size(); ++i) m[a.arg_questions[i]] = b.arg_questions[i];
  if ((a.arg_view != nullptr) != (b.arg_view != nullptr))
    throw std::logic_error("map_views: arg shape mismatch");
  if (a.arg_view) map_views(*a.arg_view, *b.arg_view, m);
  if ((a.rest_view != nullptr) != (b.rest_view != nullptr))
    throw std::logic_error("map_views: rest shape mismatch");
  if (a.rest_view) map_views(*a.rest_view, *b.rest_view, m);
  if (a.read_q >= 0) {
    m[a.read_q] = b.read_q;
    for (size_t j = 0; j < a.write_q.size(); ++j) {
      m[a.write_q[j]] = b.write_q[j];
      m[a.read_a[j]] = b.read_a[j];
    }
    m[a.write_a] = b.write_a;
  }
}

} // namespace rmleq
