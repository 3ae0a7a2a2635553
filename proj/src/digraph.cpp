#include "ddgd/digraph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "ddgd/errors.hpp"

namespace ddgd {

Digraph::Digraph(int n) : n_(n), in_(n), out_(n) {
  if (n < 1) throw InputError("digraph needs at least one node, got " + std::to_string(n));
  for (int i = 0; i < n; ++i) {
    in_[i].push_back(i + 1);
    out_[i].push_back(i + 1);
  }
}

void Digraph::check_id(int i) const {
  if (i < 1 || i > n_) {
    throw InputError("node id " + std::to_string(i) + " out of range [1, " +
                     std::to_string(n_) + "]");
  }
}

void Digraph::add_edge(int from, int to) {
  check_id(from);
  check_id(to);
  if (from == to) return;
  auto& senders = in_[to - 1];
  auto pos = std::lower_bound(senders.begin(), senders.end(), from);
  if (pos != senders.end() && *pos == from) return;
  senders.insert(pos, from);
  auto& receivers = out_[from - 1];
  receivers.insert(std::lower_bound(receivers.begin(), receivers.end(), to), to);
}

bool Digraph::has_edge(int from, int to) const {
  check_id(from);
  check_id(to);
  const auto& senders = in_[to - 1];
  return std::binary_search(senders.begin(), senders.end(), from);
}

const std::vector<int>& Digraph::in_neighbors(int i) const {
  check_id(i);
  return in_[i - 1];
}

const std::vector<int>& Digraph::out_neighbors(int i) const {
  check_id(i);
  return out_[i - 1];
}

std::vector<std::pair<int, int>> Digraph::edges() const {
  std::vector<std::pair<int, int>> result;
  for (int from = 1; from <= n_; ++from) {
    for (int to : out_[from - 1]) {
      if (to != from) result.emplace_back(from, to);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

int Digraph::edge_count() const {
  int count = 0;
  for (int i = 0; i < n_; ++i) count += static_cast<int>(out_[i].size()) - 1;
  return count;
}

namespace {

// Reachability from node 1 following the given adjacency (1-based lists).
bool reaches_all(const std::vector<std::vector<int>>& adj, int n) {
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w - 1]) {
        seen[w - 1] = 1;
        ++visited;
        stack.push_back(w - 1);
      }
    }
  }
  return visited == n;
}

}  // namespace

bool Digraph::is_strongly_connected() const {
  // Node 1 reaches everyone (forward pass) and everyone reaches node 1
  // (pass over reversed edges, i.e. the in-neighbor lists).
  return reaches_all(out_, n_) && reaches_all(in_, n_);
}

Digraph random_strongly_connected(int n, double extra_edge_prob, std::uint64_t seed) {
  if (n < 1) throw InputError("digraph needs at least one node, got " + std::to_string(n));
  if (extra_edge_prob < 0.0 || extra_edge_prob > 1.0) {
    throw InputError("extra_edge_prob must lie in [0, 1], got " +
                     std::to_string(extra_edge_prob));
  }
  std::mt19937_64 rng(seed);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);

  Digraph g(n);
  for (int t = 0; t < n; ++t) g.add_edge(order[t], order[(t + 1) % n]);

  if (extra_edge_prob > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int from = 1; from <= n; ++from) {
      for (int to = 1; to <= n; ++to) {
        if (from == to) continue;
        if (coin(rng) < extra_edge_prob) g.add_edge(from, to);
      }
    }
  }
  return g;
}

Digraph read_edge_list(std::istream& in) {
  std::string line;
  int n = -1;
  std::vector<std::pair<int, int>> pairs;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (n < 0) {
      if (ls >> n) {
        int junk;
        if (ls >> junk) throw InputError("edge list line 1: expected node count only");
        if (n < 1) throw InputError("edge list: node count must be positive");
      }
      continue;
    }
    int i, j;
    if (!(ls >> i)) continue;  // blank or comment-only line
    if (!(ls >> j)) {
      throw InputError("edge list line " + std::to_string(lineno) +
                       ": expected `i j` (meaning j sends to i)");
    }
    pairs.emplace_back(i, j);
  }
  if (n < 0) throw InputError("edge list: missing node count on first line");
  Digraph g(n);
  for (auto [i, j] : pairs) g.add_edge(j, i);
  return g;
}

void write_edge_list(std::ostream& out, const Digraph& g) {
  out << g.nodes() << "\n";
  for (auto [from, to] : g.edges()) out << to << " " << from << "\n";
}

}  // namespace ddgd
