#include "ucst/explore.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace ucst {

const char* to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Reachable: return "REACHABLE";
    case Verdict::Kind::NotWithinBound: return "NOT-WITHIN-BOUND";
    case Verdict::Kind::Unreachable: return "UNREACHABLE";
  }
  return "?";
}

namespace {

// Explicit-state graph discovered by BFS; node 0.. in discovery order.
struct Graph {
  struct Node {
    Configuration config;
    int parent = -1;
    StepLabel label;
    std::size_t depth = 0;
  };
  std::vector<Node> nodes;
  std::unordered_map<Configuration, int, ConfigurationHash> index;

  // Returns (id, fresh).
  std::pair<int, bool> intern(const Configuration& c, int parent, const StepLabel& l, std::size_t depth) {
    auto [it, fresh] = index.emplace(c, static_cast<int>(nodes.size()));
    if (fresh) nodes.push_back({c, parent, l, depth});
    return {it->second, fresh};
  }

  Run path_to(int id) const {
    std::vector<int> chain;
    for (int i = id; i >= 0; i = nodes[i].parent) chain.push_back(i);
    std::reverse(chain.begin(), chain.end());
    Run run;
    run.start = nodes[chain.front()].config;
    for (std::size_t k = 1; k < chain.size(); ++k)
      run.steps.push_back({nodes[chain[k]].label, nodes[chain[k]].config});
    return run;
  }
};

bool within(const Configuration& c, std::size_t k) { return c.u.size() <= k && c.v.size() <= k; }

}  // namespace

Verdict bounded_reach(const ReachInstance& inst, const Bound& bound, Mode mode) {
  const Ucst& s = inst.system;
  const std::size_t K = bound.max_channel_len;
  bool pruned = has_word_longer_than(inst.U, K) || has_word_longer_than(inst.V, K);
  const auto us = enumerate_words(inst.U, K);
  const auto vs = enumerate_words(inst.V, K);
  const Dfa up = determinize(inst.Up), vp = determinize(inst.Vp);
  auto is_target = [&](const Configuration& c) {
    return c.p == inst.p_fi && c.q == inst.q_fi && up.accepts(c.u) && vp.accepts(c.v);
  };

  Graph g;
  std::deque<int> queue;
  for (auto& u : us)
    for (auto& v : vs) {
      auto [id, fresh] = g.intern({inst.p_in, inst.q_in, u, v}, -1, {}, 0);
      if (fresh) queue.push_back(id);
    }

  Verdict out;
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    const Configuration cur = g.nodes[id].config;
    const std::size_t depth = g.nodes[id].depth;
    if (is_target(cur)) {
      out.kind = Verdict::Kind::Reachable;
      out.witness = g.path_to(id);
      out.explored = g.nodes.size();
      return out;
    }
    if (bound.max_steps && depth >= bound.max_steps) {
      pruned = true;
      continue;
    }
    for (auto& st : successors(s, cur, mode)) {
      if (!within(st.result, K)) {
        pruned = true;
        continue;
      }
      if (bound.max_states && g.nodes.size() >= bound.max_states && !g.index.count(st.result)) {
        pruned = true;
        continue;
      }
      auto [nid, fresh] = g.intern(st.result, id, st.label, depth + 1);
      if (fresh) queue.push_back(nid);
    }
  }
  out.kind = pruned ? Verdict::Kind::NotWithinBound : Verdict::Kind::Unreachable;
  out.explored = g.nodes.size();
  return out;
}

std::set<Configuration> bounded_coreach(const Ucst& s,
                                        const std::function<bool(const Configuration&)>& target,
                                        const Bound& bound, Mode mode) {
  const std::size_t K = bound.max_channel_len;
  const auto words = enumerate_words(Nfa::universal(s.alphabet), K);
  std::vector<Configuration> all;
  std::unordered_map<Configuration, int, ConfigurationHash> index;
  for (StateId p = 0; p < static_cast<StateId>(s.sender_states.size()); ++p)
    for (StateId q = 0; q < static_cast<StateId>(s.receiver_states.size()); ++q)
      for (auto& u : words)
        for (auto& v : words) {
          index.emplace(Configuration{p, q, u, v}, static_cast<int>(all.size()));
          all.push_back({p, q, u, v});
        }
  std::vector<std::vector<int>> rev(all.size());
  for (std::size_t i = 0; i < all.size(); ++i)
    for (auto& st : successors(s, all[i], mode)) {
      auto it = index.find(st.result);
      if (it != index.end()) rev[it->second].push_back(static_cast<int>(i));
    }
  std::vector<char> seen(all.size(), 0);
  std::vector<int> stack;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (target(all[i])) seen[i] = 1, stack.push_back(static_cast<int>(i));
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (int j : rev[i])
      if (!seen[j]) seen[j] = 1, stack.push_back(j);
  }
  std::set<Configuration> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (seen[i]) out.insert(all[i]);
  return out;
}

PostResult bounded_post(const Ucst& s, const std::vector<Configuration>& starts, const Bound& bound,
                        Mode mode) {
  PostResult res;
  std::deque<Configuration> queue;
  for (auto& c : starts)
    if (res.configs.insert(c).second) queue.push_back(c);
  while (!queue.empty()) {
    const Configuration cur = queue.front();
    queue.pop_front();
    for (auto& st : successors(s, cur, mode)) {
      if (!within(st.result, bound.max_channel_len) ||
          (bound.max_states && res.configs.size() >= bound.max_states && !res.configs.count(st.result))) {
        res.pruned = true;
        continue;
      }
      if (res.configs.insert(st.result).second) queue.push_back(st.result);
    }
  }
  return res;
}

RecurrentResult bounded_recurrent(const Ucst& s, StateId p_in, StateId q_in, StateId p, StateId q,
                                  const Bound& bound, Mode mode) {
  RecurrentResult res;
  const std::size_t K = bound.max_channel_len;
  bool pruned = false;
  Graph g;
  std::vector<std::vector<std::pair<int, StepLabel>>> adj;
  std::deque<int> queue;
  g.intern({p_in, q_in, {}, {}}, -1, {}, 0);
  adj.emplace_back();
  queue.push_back(0);
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    const Configuration cur = g.nodes[id].config;
    for (auto& st : successors(s, cur, mode)) {
      if (!within(st.result, K)) {
        pruned = true;
        continue;
      }
      if (bound.max_states && g.nodes.size() >= bound.max_states && !g.index.count(st.result)) {
        pruned = true;
        continue;
      }
      auto [nid, fresh] = g.intern(st.result, id, st.label, g.nodes[id].depth + 1);
      if (fresh) {
        adj.emplace_back();
        queue.push_back(nid);
      }
      adj[id].emplace_back(nid, st.label);
    }
  }
  res.explored = g.nodes.size();

  // Iterative Tarjan.
  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  for (int root = 0; root < n; ++root) {
    if (idx[root] >= 0) continue;
    std::vector<std::pair<int, std::size_t>> call{{root, 0}};
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, ei] = call.back();
      if (ei < adj[v].size()) {
        int w = adj[v][ei++].first;
        if (idx[w] < 0) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
      } else {
        int vv = v;
        call.pop_back();
        if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[vv]);
        if (low[vv] == idx[vv]) {
          for (;;) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = ncomp;
            if (w == vv) break;
          }
          ++ncomp;
        }
      }
    }
  }
  std::vector<int> comp_size(ncomp, 0);
  std::vector<char> comp_loop(ncomp, 0);
  for (int v = 0; v < n; ++v) {
    ++comp_size[comp[v]];
    for (auto& e : adj[v])
      if (e.first == v) comp_loop[comp[v]] = 1;
  }
  for (int x = 0; x < n; ++x) {
    const auto& c = g.nodes[x].config;
    if (c.p != p || c.q != q) continue;
    if (comp_size[comp[x]] < 2 && !comp_loop[comp[x]]) continue;
    // Shortest cycle x ->+ x inside the component.
    std::vector<int> par(n, -2);
    std::vector<StepLabel> via(n);
    std::deque<int> bq;
    int hit_from = -1;
    StepLabel hit_label;
    for (auto& e : adj[x]) {
      if (comp[e.first] != comp[x]) continue;
      if (e.first == x) {
        hit_from = x;
        hit_label = e.second;
        break;
      }
      if (par[e.first] == -2) par[e.first] = x, via[e.first] = e.second, bq.push_back(e.first);
    }
    while (hit_from < 0 && !bq.empty()) {
      int v = bq.front();
      bq.pop_front();
      for (auto& e : adj[v]) {
        if (comp[e.first] != comp[x]) continue;
        if (e.first == x) {
          hit_from = v;
          hit_label = e.second;
          break;
        }
        if (par[e.first] == -2) par[e.first] = v, via[e.first] = e.second, bq.push_back(e.first);
      }
    }
    if (hit_from < 0) throw InternalError("component without a cycle through its member");
    std::vector<int> chain;
    for (int v = hit_from; v != x; v = par[v]) chain.push_back(v);
    std::reverse(chain.begin(), chain.end());
    LassoWitness w;
    w.stem = g.path_to(x);
    w.cycle.start = c;
    for (int v : chain) w.cycle.steps.push_back({via[v], g.nodes[v].config});
    w.cycle.steps.push_back({hit_label, c});
    res.lasso = std::move(w);
    return res;
  }
  res.exhaustive = !pruned;
  return res;
}

ReachOracle make_bounded_oracle(Bound bound, Mode mode, bool strict) {
  return [bound, mode, strict](const ReachInstance& inst) {
    Verdict v = bounded_reach(inst, bound, mode);
    if (v.reachable()) return OracleAnswer::Yes;
    if (v.kind == Verdict::Kind::Unreachable || !strict) return OracleAnswer::No;
    return OracleAnswer::Inconclusive;
  };
}

namespace {
bool on_cycle(StateId start, const std::vector<Rule>& rules, bool nop_only) {
  std::vector<char> seen(1024, 0);
  std::vector<StateId> stack;
  auto push = [&](StateId t) {
    if (static_cast<std::size_t>(t) >= seen.size()) seen.resize(t + 1, 0);
    if (!seen[t]) seen[t] = 1, stack.push_back(t);
  };
  for (auto& r : rules)
    if (r.source == start && (!nop_only || r.is_nop())) push(r.target);
  while (!stack.empty()) {
    StateId v = stack.back();
    stack.pop_back();
    if (v == start) return true;
    for (auto& r : rules)
      if (r.source == v && (!nop_only || r.is_nop())) push(r.target);
  }
  return false;
}
}  // namespace

bool ucs_recurrent_decide(const Ucst& s, StateId p_in, StateId q_in, StateId p, StateId q,
                          const ReachOracle& oracle) {
  if (!classify_tests(s).tests.empty())
    throw InputError("recurrent reachability decision requires a system without tests");
  ReachInstance inst = ReachInstance::empty_empty(s, p_in, q_in, p, q);
  inst.Up = inst.Vp = Nfa::universal(s.alphabet);
  switch (oracle(inst)) {
    case OracleAnswer::No: return false;
    case OracleAnswer::Inconclusive: throw OracleInconclusive("reachability oracle inconclusive");
    case OracleAnswer::Yes: break;
  }
  return on_cycle(p, s.sender_rules, false) || on_cycle(q, s.receiver_rules, true);
}

}  // namespace ucst
