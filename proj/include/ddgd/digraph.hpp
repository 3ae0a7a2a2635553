#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace ddgd {

/// Directed communication topology over agents 1..n.
///
/// An edge (from, to) means agent `from` sends to agent `to`. Every node
/// carries an implicit self-loop: i is always a member of both its own
/// in- and out-neighborhood. The graph is immutable once built and safe
/// to share read-only across threads.
class Digraph {
 public:
  /// n isolated nodes (self-loops only).
  explicit Digraph(int n);

  int nodes() const { return n_; }

  /// Adds the directed edge from -> to. Self-loops and duplicates are
  /// ignored (self-loops are implicit). Ids are 1-based.
  void add_edge(int from, int to);

  bool has_edge(int from, int to) const;

  /// Agents that send to i, including i itself. Ascending ids.
  const std::vector<int>& in_neighbors(int i) const;

  /// Agents that i sends to, including i itself. Ascending ids.
  const std::vector<int>& out_neighbors(int i) const;

  /// Directed edges excluding the implicit self-loops, sorted (from, to).
  std::vector<std::pair<int, int>> edges() const;

  /// Number of directed edges excluding self-loops.
  int edge_count() const;

  /// True iff every node reaches every node along directed edges.
  bool is_strongly_connected() const;

 private:
  void check_id(int i) const;

  int n_;
  std::vector<std::vector<int>> in_;   // in_[i-1]: senders to i, sorted, incl. i
  std::vector<std::vector<int>> out_;  // out_[i-1]: receivers of i, sorted, incl. i
};

/// Random digraph over n nodes: a seeded random Hamiltonian cycle (which
/// guarantees strong connectivity) plus every remaining ordered pair
/// independently with probability extra_edge_prob. Deterministic for a
/// fixed seed; non-balanced in general.
Digraph random_strongly_connected(int n, double extra_edge_prob, std::uint64_t seed);

/// Edge-list text format: first line `n`, then lines `i j` meaning j sends
/// to i. `#` starts a comment. Self-loops need not be listed.
Digraph read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const Digraph& g);

}  // namespace ddgd
