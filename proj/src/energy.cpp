#include "mocseg/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "mocseg/errors.hpp"

namespace mocseg {

namespace {

// Dinic maximum flow on real capacities.
class FlowNetwork {
 public:
  explicit FlowNetwork(int n) : adj_(static_cast<std::size_t>(n)), level_(n), it_(n) {}

  void add_edge(int from, int to, double cap) {
    if (!(cap > 0.0)) return;
    adj_[from].push_back({to, cap, static_cast<int>(adj_[to].size())});
    adj_[to].push_back({from, 0.0, static_cast<int>(adj_[from].size()) - 1});
  }

  double max_flow(int s, int t, double eps) {
    eps_ = eps;
    double flow = 0.0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      for (double f; (f = dfs(s, t, std::numeric_limits<double>::infinity())) > eps_;) flow += f;
    }
    return flow;
  }

  /// Nodes reachable from s in the residual graph after max_flow.
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& e : adj_[v])
        if (e.cap > eps_ && !seen[e.to]) {
          seen[e.to] = 1;
          stack.push_back(e.to);
        }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    double cap;
    int rev;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const auto& e : adj_[v])
        if (e.cap > eps_ && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          q.push(e.to);
        }
    }
    return level_[t] >= 0;
  }

  double dfs(int v, int t, double pushed) {
    if (v == t) return pushed;
    for (int& i = it_[v]; i < static_cast<int>(adj_[v].size()); ++i) {
      Edge& e = adj_[v][i];
      if (e.cap <= eps_ || level_[e.to] != level_[v] + 1) continue;
      const double got = dfs(e.to, t, std::min(pushed, e.cap));
      if (got > eps_) {
        e.cap -= got;
        adj_[e.to][e.rev].cap += got;
        return got;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<Edge>> adj_;
  std::vector<int> level_;
  std::vector<int> it_;
  double eps_ = 0.0;
};

// Pseudo-boolean energy over binary nodes, x = 1 meaning sink side.
class BinaryEnergy {
 public:
  explicit BinaryEnergy(int n) : e0_(static_cast<std::size_t>(n), 0.0), e1_(static_cast<std::size_t>(n), 0.0) {}

  int add_node() {
    e0_.push_back(0.0);
    e1_.push_back(0.0);
    return static_cast<int>(e0_.size()) - 1;
  }
  void unary(int v, double cost0, double cost1) {
    e0_[v] += cost0;
    e1_[v] += cost1;
  }
  // Cost c when v is on the source side and w on the sink side.
  void source_sink(int v, int w, double c) { pairs_.push_back({v, w, c}); }
  void pairwise(int i, int j, double a, double b, double c, double d) {
    unary(i, 0.0, c - a);
    unary(j, 0.0, d - c);
    source_sink(i, j, b + c - a - d);
  }

  std::vector<char> minimize(double eps) {
    const int n = static_cast<int>(e0_.size());
    FlowNetwork net(n + 2);
    const int s = n, t = n + 1;
    for (int v = 0; v < n; ++v) {
      const double m = std::min(e0_[v], e1_[v]);
      net.add_edge(s, v, e1_[v] - m);
      net.add_edge(v, t, e0_[v] - m);
    }
    for (const auto& p : pairs_) net.add_edge(p.v, p.w, p.c);
    net.max_flow(s, t, eps);
    const auto side = net.source_side(s);
    std::vector<char> x(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) x[v] = side[v] ? 0 : 1;
    return x;
  }

 private:
  struct Pair {
    int v, w;
    double c;
  };
  std::vector<double> e0_, e1_;
  std::vector<Pair> pairs_;
};

bool strictly_lower(double candidate, double current) {
  return candidate < current - 1e-12 * std::max(1.0, std::abs(current));
}

class ExactSearch {
 public:
  ExactSearch(const EnergyProblem& p, std::vector<int> incumbent, double incumbent_energy)
      : p_(p), best_(std::move(incumbent)), best_energy_(incumbent_energy),
        current_(static_cast<std::size_t>(p.n_elements), -1),
        used_(static_cast<std::size_t>(p.n_labels), 0),
        earlier_(static_cast<std::size_t>(p.n_elements)),
        rest_min_(static_cast<std::size_t>(p.n_elements) + 1, 0.0) {
    for (const auto& nb : p.neighbors) {
      const int hi = std::max(nb.a, nb.b), lo = std::min(nb.a, nb.b);
      earlier_[hi].push_back({lo, nb.weight});
    }
    for (int i = p.n_elements - 1; i >= 0; --i) {
      double m = std::numeric_limits<double>::infinity();
      for (int l = 0; l < p.n_labels; ++l) m = std::min(m, p.data(i, l));
      rest_min_[i] = rest_min_[i + 1] + m;
    }
  }

  bool run() {
    improved_ = false;
    descend(0, 0.0);
    return improved_;
  }
  const std::vector<int>& best() const { return best_; }

 private:
  void descend(int i, double partial) {
    if (i == p_.n_elements) {
      if (strictly_lower(partial, best_energy_)) {
        best_energy_ = partial;
        best_ = current_;
        improved_ = true;
      }
      return;
    }
    for (int l = 0; l < p_.n_labels; ++l) {
      double e = partial + p_.data(i, l);
      if (!used_[l]) e += p_.label_cost[l];
      for (const auto& [j, w] : earlier_[i])
        if (current_[j] != l) e += w;
      if (!strictly_lower(e + rest_min_[i + 1], best_energy_)) continue;
      current_[i] = l;
      ++used_[l];
      descend(i + 1, e);
      --used_[l];
      current_[i] = -1;
    }
  }

  const EnergyProblem& p_;
  std::vector<int> best_;
  double best_energy_;
  std::vector<int> current_;
  std::vector<int> used_;
  std::vector<std::vector<std::pair<int, double>>> earlier_;
  std::vector<double> rest_min_;
  bool improved_ = false;
};

}  // namespace

EnergyProblem::EnergyProblem(int n, int m)
    : n_elements(n), n_labels(m),
      data_cost(static_cast<std::size_t>(n) * static_cast<std::size_t>(m), 0.0),
      label_cost(static_cast<std::size_t>(m), 0.0) {}

void EnergyProblem::validate() const {
  if (n_elements < 0 || n_labels < 0) throw DomainError("negative problem size");
  if (data_cost.size() != static_cast<std::size_t>(n_elements) * n_labels)
    throw DomainError("data cost matrix has the wrong size");
  if (label_cost.size() != static_cast<std::size_t>(n_labels))
    throw DomainError("label cost vector has the wrong size");
  for (double v : data_cost)
    if (!std::isfinite(v)) throw DomainError("data costs must be finite");
  for (double h : label_cost)
    if (!std::isfinite(h) || h < 0.0) throw DomainError("label costs must be finite and non-negative");
  std::vector<std::pair<int, int>> seen;
  for (const auto& nb : neighbors) {
    if (nb.a < 0 || nb.b < 0 || nb.a >= n_elements || nb.b >= n_elements)
      throw DomainError("neighbor index out of range");
    if (nb.a == nb.b) throw DomainError("an element cannot neighbor itself");
    if (!std::isfinite(nb.weight) || nb.weight < 0.0)
      throw DomainError("neighbor weights must be finite and non-negative");
    seen.emplace_back(std::min(nb.a, nb.b), std::max(nb.a, nb.b));
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw DomainError("duplicate neighbor pair");
}

double evaluate_energy(const EnergyProblem& problem, std::span<const int> assignment) {
  if (assignment.size() != static_cast<std::size_t>(problem.n_elements))
    throw DomainError("assignment length differs from element count");
  std::vector<char> used(static_cast<std::size_t>(problem.n_labels), 0);
  double e = 0.0;
  for (int i = 0; i < problem.n_elements; ++i) {
    const int l = assignment[i];
    if (l < 0 || l >= problem.n_labels) throw DomainError("unknown label " + std::to_string(l));
    e += problem.data(i, l);
    used[l] = 1;
  }
  for (const auto& nb : problem.neighbors)
    if (assignment[nb.a] != assignment[nb.b]) e += nb.weight;
  for (int l = 0; l < problem.n_labels; ++l)
    if (used[l]) e += problem.label_cost[l];
  return e;
}

Labeling minimize_labeling(const EnergyProblem& problem, const SolverOptions& options) {
  problem.validate();
  if (problem.n_elements < 1 || problem.n_labels < 1)
    throw DomainError("labeling needs at least one element and one label");
  const int n = problem.n_elements;
  const int m = problem.n_labels;

  Labeling out;
  out.assignment.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int l = 1; l < m; ++l)
      if (problem.data(i, l) < problem.data(i, best)) best = l;
    out.assignment[i] = best;
  }
  out.energy = evaluate_energy(problem, out.assignment);
  out.sweep_energies.push_back(out.energy);

  double scale = 1.0;
  for (double v : problem.data_cost) scale += std::abs(v);
  for (const auto& nb : problem.neighbors) scale += nb.weight;
  for (double h : problem.label_cost) scale += h;
  const double infinite = 4.0 * scale;
  const double eps = 1e-14 * scale;

  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
  for (const auto& nb : problem.neighbors) {
    adj[nb.a].push_back({nb.b, nb.weight});
  }

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    bool moved = false;
    for (int alpha = 0; alpha < m; ++alpha) {
      const auto& f = out.assignment;
      BinaryEnergy be(n);
      std::vector<int> members_count(static_cast<std::size_t>(m), 0);
      for (int i = 0; i < n; ++i) ++members_count[f[i]];
      if (members_count[alpha] == n) continue;

      for (int i = 0; i < n; ++i)
        if (f[i] != alpha) be.unary(i, problem.data(i, f[i]), problem.data(i, alpha));
      for (int i = 0; i < n; ++i) {
        for (const auto& [j, w] : adj[i]) {
          const bool fi = f[i] == alpha, fj = f[j] == alpha;
          if (fi && fj) continue;
          if (fi) {
            be.unary(j, w, 0.0);
          } else if (fj) {
            be.unary(i, w, 0.0);
          } else {
            be.pairwise(i, j, f[i] != f[j] ? w : 0.0, w, w, 0.0);
          }
        }
      }
      if (members_count[alpha] == 0 && problem.label_cost[alpha] > 0.0) {
        const int y = be.add_node();
        be.unary(y, 0.0, problem.label_cost[alpha]);
        for (int i = 0; i < n; ++i) be.source_sink(y, i, infinite);
      }
      for (int beta = 0; beta < m; ++beta) {
        if (beta == alpha || members_count[beta] == 0 || problem.label_cost[beta] <= 0.0) continue;
        const int z = be.add_node();
        be.unary(z, problem.label_cost[beta], 0.0);
        for (int i = 0; i < n; ++i)
          if (f[i] == beta) be.source_sink(i, z, infinite);
      }

      const auto x = be.minimize(eps);
      std::vector<int> proposal = f;
      for (int i = 0; i < n; ++i)
        if (f[i] != alpha && x[i]) proposal[i] = alpha;
      const double e = evaluate_energy(problem, proposal);
      if (strictly_lower(e, out.energy)) {
        out.assignment = std::move(proposal);
        out.energy = e;
        moved = true;
      }
    }
    out.sweep_energies.push_back(out.energy);
    if (!moved) break;
  }

  // Exhaustive finish for small instances.
  double space = 1.0;
  for (int i = 0; i < n && space <= static_cast<double>(options.exact_limit); ++i) space *= m;
  if (space <= static_cast<double>(options.exact_limit)) {
    ExactSearch search(problem, out.assignment, out.energy);
    if (search.run()) {
      out.assignment = search.best();
      out.energy = evaluate_energy(problem, out.assignment);
      out.sweep_energies.push_back(out.energy);
    }
  }
  return out;
}

}  // namespace mocseg
