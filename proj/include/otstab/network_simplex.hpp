#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace otstab {

/// Primal network simplex for the dense transportation problem
///   min sum c_ij x_ij  s.t.  sum_j x_ij = a_i,  sum_i x_ij = b_j,  x >= 0
/// on the complete bipartite graph. Spanning-tree bookkeeping follows the
/// thread/successor representation with an artificial root and block-search
/// pivoting. Costs are row-major, size a.size() * b.size().
class NetworkSimplex {
 public:
  NetworkSimplex(std::vector<double> supply, std::vector<double> demand, std::vector<double> cost);

  /// Runs to optimality. Throws solver_failure if the artificial arcs keep
  /// flow (infeasible) or the pivot budget is exhausted.
  void run();

  std::size_t rows() const noexcept { return n1_; }
  std::size_t cols() const noexcept { return n2_; }
  double flow(std::size_t i, std::size_t j) const { return flow_[i * n2_ + j]; }
  double cost(std::size_t i, std::size_t j) const { return cost_[i * n2_ + j]; }
  double total_cost() const;
  /// Node potentials: reduced cost of arc (i, j) is c_ij + pi(i) - pi(n1 + j).
  double potential(std::size_t node) const { return static_cast<double>(pi_[node]); }
  /// potential(a) - potential(b), formed before rounding to double.
  double potential_difference(std::size_t a, std::size_t b) const {
    return static_cast<double>(pi_[a] - pi_[b]);
  }
  std::size_t pivots() const noexcept { return pivots_; }
  /// Largest flow left on an artificial arc after run().
  double residual_imbalance() const noexcept { return residual_; }

 private:
  int source(std::size_t e) const;
  int target(std::size_t e) const;
  double arc_cost(std::size_t e) const;

  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow(bool change);
  void update_tree_structure();
  void update_potential();
  void recompute_potentials();

  std::size_t n1_, n2_;
  int node_num_;
  std::size_t arc_num_;
  std::size_t all_arc_num_;
  int root_;

  std::vector<double> cost_;
  std::vector<double> flow_;  // real arcs followed by artificial arcs
  std::vector<int> art_source_, art_target_;
  std::vector<double> art_cost_;
  std::vector<std::int8_t> state_;

  std::vector<double> supply_;
  // extended precision: potentials carry the artificial cost offset
  std::vector<long double> pi_;
  std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_;
  std::vector<std::int8_t> pred_dir_;
  std::vector<int> dirty_revs_;

  std::size_t block_size_ = 0;
  std::size_t next_arc_ = 0;
  std::size_t pivots_ = 0;
  double residual_ = 0.0;

  // pivot scratch
  std::size_t in_arc_ = 0;
  int join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  double delta_ = 0.0;
};

}  // namespace otstab
