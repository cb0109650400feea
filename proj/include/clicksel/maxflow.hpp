#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

namespace clicksel {

/// Augmenting-path max-flow with persistent source/sink search trees
/// (Boykov–Kolmogorov). Capacities are nonnegative doubles.
class MaxFlow {
 public:
  explicit MaxFlow(int node_count);

  int node_count() const { return static_cast<int>(tr_cap_.size()); }

  /// Adds capacity from the source to `node` and from `node` to the sink.
  void add_terminal(int node, double source_cap, double sink_cap);
  void add_edge(int from, int to, double cap, double reverse_cap);

  /// Runs to completion and returns the max-flow value.
  double solve();

  /// 1 for nodes reachable from the source in the residual graph. This is
  /// the smallest source side among all minimum cuts, so ties resolve the
  /// same way regardless of augmentation order.
  std::vector<std::uint8_t> source_side() const;

  std::size_t augmentations() const { return augmentations_; }

 private:
  static constexpr int kTerminal = -1;
  static constexpr int kOrphan = -2;
  static constexpr int kFree = -3;

  int sister(int arc) const { return arc ^ 1; }
  void activate(int node);
  int next_active();
  void augment(int middle);
  void adopt_source_orphan(int node);
  void adopt_sink_orphan(int node);
  void make_orphan(int node);

  // Arc storage; arcs 2k and 2k+1 are mutual reverses.
  std::vector<int> head_;
  std::vector<int> next_;
  std::vector<double> rcap_;

  std::vector<int> first_;
  std::vector<double> tr_cap_;  // > 0: residual from source, < 0: residual to sink
  std::vector<int> parent_;
  std::vector<std::uint8_t> is_sink_;
  std::vector<std::uint8_t> active_;
  std::vector<long long> ts_;
  std::vector<int> dist_;

  std::deque<int> queue_;
  std::deque<int> orphans_;
  long long time_ = 0;
  double flow_ = 0.0;
  std::size_t augmentations_ = 0;
};

}  // namespace clicksel
