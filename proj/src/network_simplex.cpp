#include "otstab/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "otstab/error.hpp"

namespace otstab {
namespace {

constexpr std::int8_t kStateTree = 0;
constexpr std::int8_t kStateLower = 1;
constexpr std::int8_t kDirUp = 1;
constexpr std::int8_t kDirDown = -1;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long double kRoundoff = 8 * std::numeric_limits<long double>::epsilon();

}  // namespace

NetworkSimplex::NetworkSimplex(std::vector<double> supply, std::vector<double> demand,
                               std::vector<double> cost)
    : n1_(supply.size()), n2_(demand.size()), cost_(std::move(cost)) {
  if (n1_ == 0 || n2_ == 0) throw Error(ErrorKind::domain, "transport problem needs atoms on both sides");
  if (cost_.size() != n1_ * n2_) throw Error(ErrorKind::domain, "cost matrix has the wrong size");
  node_num_ = static_cast<int>(n1_ + n2_);
  arc_num_ = n1_ * n2_;
  all_arc_num_ = arc_num_ + static_cast<std::size_t>(node_num_);
  root_ = node_num_;

  supply_.resize(node_num_ + 1);
  for (std::size_t i = 0; i < n1_; ++i) supply_[i] = supply[i];
  for (std::size_t j = 0; j < n2_; ++j) supply_[n1_ + j] = -demand[j];
  double sum_supply = 0.0;
  for (int u = 0; u < node_num_; ++u) sum_supply += supply_[u];

  double max_cost = 0.0;
  for (double c : cost_) {
    if (!std::isfinite(c)) throw Error(ErrorKind::domain, "costs must be finite");
    max_cost = std::max(max_cost, std::abs(c));
  }
  const double art_cost = (max_cost + 1.0) * node_num_;

  flow_.assign(all_arc_num_, 0.0);
  state_.assign(all_arc_num_, kStateLower);
  art_source_.resize(node_num_);
  art_target_.resize(node_num_);
  art_cost_.resize(node_num_);

  const int nodes = node_num_ + 1;
  pi_.assign(nodes, 0.0L);
  parent_.assign(nodes, -1);
  pred_.assign(nodes, -1);
  thread_.assign(nodes, 0);
  rev_thread_.assign(nodes, 0);
  succ_num_.assign(nodes, 0);
  last_succ_.assign(nodes, 0);
  pred_dir_.assign(nodes, kDirUp);

  parent_[root_] = -1;
  pred_[root_] = -1;
  thread_[root_] = 0;
  rev_thread_[0] = root_;
  succ_num_[root_] = node_num_ + 1;
  last_succ_[root_] = root_ - 1;
  // the root absorbs the rounding-level imbalance of the two weight vectors
  supply_[root_] = -sum_supply;
  pi_[root_] = 0.0;

  for (int u = 0; u < node_num_; ++u) {
    const std::size_t e = arc_num_ + static_cast<std::size_t>(u);
    parent_[u] = root_;
    pred_[u] = static_cast<int>(e);
    thread_[u] = u + 1;
    rev_thread_[u + 1] = u;
    succ_num_[u] = 1;
    last_succ_[u] = u;
    state_[e] = kStateTree;
    if (supply_[u] >= 0.0) {
      pred_dir_[u] = kDirUp;
      pi_[u] = 0.0;
      art_source_[u] = u;
      art_target_[u] = root_;
      flow_[e] = supply_[u];
      art_cost_[u] = 0.0;
    } else {
      pred_dir_[u] = kDirDown;
      pi_[u] = art_cost;
      art_source_[u] = root_;
      art_target_[u] = u;
      flow_[e] = -supply_[u];
      art_cost_[u] = art_cost;
    }
  }
  block_size_ = std::max<std::size_t>(
      static_cast<std::size_t>(std::sqrt(static_cast<double>(arc_num_))), 10);
}

int NetworkSimplex::source(std::size_t e) const {
  return e < arc_num_ ? static_cast<int>(e / n2_) : art_source_[e - arc_num_];
}

int NetworkSimplex::target(std::size_t e) const {
  return e < arc_num_ ? static_cast<int>(n1_ + e % n2_) : art_target_[e - arc_num_];
}

double NetworkSimplex::arc_cost(std::size_t e) const {
  return e < arc_num_ ? cost_[e] : art_cost_[e - arc_num_];
}

bool NetworkSimplex::find_entering_arc() {
  // only real arcs may enter; artificial arcs start in the tree
  long double min = 0.0L;
  bool found = false;
  std::size_t cnt = block_size_;
  std::size_t e = next_arc_;
  for (std::size_t k = 0; k < arc_num_; ++k, ++e) {
    if (e == arc_num_) e = 0;
    const std::size_t i = e / n2_;
    const long double pj = pi_[n1_ + e % n2_];
    const long double c = state_[e] * (cost_[e] + pi_[i] - pj);
    // ignore reduced costs at the rounding level of the terms
    if (c < min && c < -kRoundoff * (std::abs(cost_[e]) + std::abs(pi_[i]) + std::abs(pj))) {
      min = c;
      in_arc_ = e;
      found = true;
    }
    if (--cnt == 0) {
      if (found) {
        next_arc_ = e + 1 == arc_num_ ? 0 : e + 1;
        return true;
      }
      cnt = block_size_;
    }
  }
  if (found) next_arc_ = in_arc_;
  return found;
}

void NetworkSimplex::find_join_node() {
  int u = source(in_arc_);
  int v = target(in_arc_);
  while (u != v) {
    if (succ_num_[u] < succ_num_[v]) {
      u = parent_[u];
    } else {
      v = parent_[v];
    }
  }
  join_ = u;
}

bool NetworkSimplex::find_leaving_arc() {
  int first, second;
  if (state_[in_arc_] == kStateLower) {
    first = source(in_arc_);
    second = target(in_arc_);
  } else {
    first = target(in_arc_);
    second = source(in_arc_);
  }
  delta_ = kInf;
  int result = 0;
  for (int u = first; u != join_; u = parent_[u]) {
    const double d = pred_dir_[u] == kDirDown ? kInf : flow_[pred_[u]];
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (int u = second; u != join_; u = parent_[u]) {
    const double d = pred_dir_[u] == kDirUp ? kInf : flow_[pred_[u]];
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      result = 2;
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void NetworkSimplex::change_flow(bool change) {
  if (delta_ > 0.0) {
    const double val = state_[in_arc_] * delta_;
    flow_[in_arc_] += val;
    for (int u = source(in_arc_); u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
    for (int u = target(in_arc_); u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
  }
  if (change) {
    state_[in_arc_] = kStateTree;
    const int out = pred_[u_out_];
    flow_[out] = 0.0;
    state_[out] = kStateLower;
  } else {
    state_[in_arc_] = static_cast<std::int8_t>(-state_[in_arc_]);
  }
}

void NetworkSimplex::update_tree_structure() {
  const int old_rev_thread = rev_thread_[u_out_];
  const int old_succ_num = succ_num_[u_out_];
  const int old_last_succ = last_succ_[u_out_];
  v_out_ = parent_[u_out_];
  const int in_arc = static_cast<int>(in_arc_);

  if (u_in_ == u_out_) {
    parent_[u_in_] = v_in_;
    pred_[u_in_] = in_arc;
    pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;
    if (thread_[v_in_] != u_out_) {
      int after = thread_[old_last_succ];
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
      after = thread_[v_in_];
      thread_[v_in_] = u_out_;
      rev_thread_[u_out_] = v_in_;
      thread_[old_last_succ] = after;
      rev_thread_[after] = old_last_succ;
    }
  } else {
    const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
    int stem = u_in_;
    int par_stem = v_in_;
    int last = last_succ_[u_in_];
    int after = thread_[last];
    thread_[v_in_] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      const int next_stem = parent_[stem];
      thread_[last] = next_stem;
      dirty_revs_.push_back(last);
      const int before = rev_thread_[stem];
      thread_[before] = after;
      rev_thread_[after] = before;
      parent_[stem] = par_stem;
      par_stem = stem;
      stem = next_stem;
      last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
      after = thread_[last];
    }
    parent_[u_out_] = par_stem;
    thread_[last] = thread_continue;
    rev_thread_[thread_continue] = last;
    last_succ_[u_out_] = last;
    if (old_rev_thread != v_in_) {
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
    }
    for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

    int tmp_sc = 0;
    const int tmp_ls = last_succ_[u_out_];
    for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
      pred_[u] = pred_[p];
      pred_dir_[u] = static_cast<std::int8_t>(-pred_dir_[p]);
      tmp_sc += succ_num_[u] - succ_num_[p];
      succ_num_[u] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in_] = in_arc;
    pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;
    succ_num_[u_in_] = old_succ_num;
  }

  const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
  const int last_succ_out = last_succ_[u_out_];
  for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) {
    last_succ_[u] = last_succ_out;
  }
  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
      last_succ_[u] = old_rev_thread;
    }
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
      last_succ_[u] = last_succ_out;
    }
  }
  for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
  const long double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * arc_cost(in_arc_);
  const int end = thread_[last_succ_[u_in_]];
  for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

void NetworkSimplex::recompute_potentials() {
  pi_[root_] = 0.0;
  for (int u = thread_[root_]; u != root_; u = thread_[u]) {
    const double c = arc_cost(static_cast<std::size_t>(pred_[u]));
    pi_[u] = pi_[parent_[u]] - pred_dir_[u] * c;
  }
}

void NetworkSimplex::run() {
  const std::size_t max_pivots = 1'000'000'000;
  for (;;) {
    if (!find_entering_arc()) {
      // certify optimality with drift-free potentials
      recompute_potentials();
      if (!find_entering_arc()) break;
    }
    if (++pivots_ > max_pivots) throw Error(ErrorKind::solver_failure, "pivot budget exhausted");
    find_join_node();
    const bool change = find_leaving_arc();
    if (delta_ == kInf) throw Error(ErrorKind::solver_failure, "transport problem is unbounded");
    change_flow(change);
    if (change) {
      update_tree_structure();
      update_potential();
    }
    // refresh potentials now and then to stop rounding drift
    if (pivots_ % 4096 == 0) recompute_potentials();
  }
  residual_ = 0.0;
  double total = 0.0;
  for (int u = 0; u < node_num_; ++u) total += std::abs(supply_[u]);
  for (std::size_t e = arc_num_; e < all_arc_num_; ++e) residual_ = std::max(residual_, flow_[e]);
  if (residual_ > 1e-9 * std::max(1.0, total)) {
    throw Error(ErrorKind::solver_failure, "transport problem is infeasible");
  }
}

double NetworkSimplex::total_cost() const {
  double c = 0.0;
  for (std::size_t e = 0; e < arc_num_; ++e) {
    if (flow_[e] != 0.0) c += flow_[e] * cost_[e];
  }
  return c;
}

}  // namespace otstab
