#include "clicksel/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "clicksel/error.hpp"

namespace clicksel {

MaxFlow::MaxFlow(int node_count)
    : first_(static_cast<std::size_t>(node_count), -1),
      tr_cap_(static_cast<std::size_t>(node_count), 0.0),
      parent_(static_cast<std::size_t>(node_count), kFree),
      is_sink_(static_cast<std::size_t>(node_count), 0),
      active_(static_cast<std::size_t>(node_count), 0),
      ts_(static_cast<std::size_t>(node_count), 0),
      dist_(static_cast<std::size_t>(node_count), 0) {}

void MaxFlow::add_terminal(int node, double source_cap, double sink_cap) {
  if (source_cap < 0 || sink_cap < 0)
    fail(ErrorCode::invalid_argument, "max-flow: negative terminal capacity");
  // Only the difference matters; the common part flows straight through.
  const auto n = static_cast<std::size_t>(node);
  const double common = std::min(source_cap, sink_cap);
  flow_ += common;
  tr_cap_[n] += source_cap - sink_cap;
}

void MaxFlow::add_edge(int from, int to, double cap, double reverse_cap) {
  if (cap < 0 || reverse_cap < 0) fail(ErrorCode::invalid_argument, "max-flow: negative capacity");
  const int a = static_cast<int>(head_.size());
  head_.push_back(to);
  next_.push_back(first_[static_cast<std::size_t>(from)]);
  rcap_.push_back(cap);
  first_[static_cast<std::size_t>(from)] = a;
  head_.push_back(from);
  next_.push_back(first_[static_cast<std::size_t>(to)]);
  rcap_.push_back(reverse_cap);
  first_[static_cast<std::size_t>(to)] = a + 1;
}

void MaxFlow::activate(int node) {
  auto& flag = active_[static_cast<std::size_t>(node)];
  if (flag) return;
  flag = 1;
  queue_.push_back(node);
}

int MaxFlow::next_active() {
  while (!queue_.empty()) {
    const int i = queue_.front();
    queue_.pop_front();
    active_[static_cast<std::size_t>(i)] = 0;
    if (parent_[static_cast<std::size_t>(i)] != kFree) return i;
  }
  return -1;
}

void MaxFlow::make_orphan(int node) {
  parent_[static_cast<std::size_t>(node)] = kOrphan;
  orphans_.push_front(node);
}

void MaxFlow::augment(int middle) {
  double bottleneck = rcap_[static_cast<std::size_t>(middle)];
  // Source side: flow runs from the root down to the middle arc's tail.
  int i = head_[static_cast<std::size_t>(sister(middle))];
  for (;;) {
    const int p = parent_[static_cast<std::size_t>(i)];
    if (p == kTerminal) break;
    bottleneck = std::min(bottleneck, rcap_[static_cast<std::size_t>(sister(p))]);
    i = head_[static_cast<std::size_t>(p)];
  }
  bottleneck = std::min(bottleneck, tr_cap_[static_cast<std::size_t>(i)]);
  // Sink side: flow runs from the middle arc's head up to the sink root.
  i = head_[static_cast<std::size_t>(middle)];
  for (;;) {
    const int p = parent_[static_cast<std::size_t>(i)];
    if (p == kTerminal) break;
    bottleneck = std::min(bottleneck, rcap_[static_cast<std::size_t>(p)]);
    i = head_[static_cast<std::size_t>(p)];
  }
  bottleneck = std::min(bottleneck, -tr_cap_[static_cast<std::size_t>(i)]);

  rcap_[static_cast<std::size_t>(sister(middle))] += bottleneck;
  rcap_[static_cast<std::size_t>(middle)] -= bottleneck;

  i = head_[static_cast<std::size_t>(sister(middle))];
  for (;;) {
    const auto ui = static_cast<std::size_t>(i);
    const int p = parent_[ui];
    if (p == kTerminal) {
      tr_cap_[ui] -= bottleneck;
      if (tr_cap_[ui] <= 0) make_orphan(i);
      break;
    }
    rcap_[static_cast<std::size_t>(p)] += bottleneck;
    rcap_[static_cast<std::size_t>(sister(p))] -= bottleneck;
    const int up = head_[static_cast<std::size_t>(p)];
    if (rcap_[static_cast<std::size_t>(sister(p))] <= 0) make_orphan(i);
    i = up;
  }
  i = head_[static_cast<std::size_t>(middle)];
  for (;;) {
    const auto ui = static_cast<std::size_t>(i);
    const int p = parent_[ui];
    if (p == kTerminal) {
      tr_cap_[ui] += bottleneck;
      if (tr_cap_[ui] >= 0) make_orphan(i);
      break;
    }
    rcap_[static_cast<std::size_t>(sister(p))] += bottleneck;
    rcap_[static_cast<std::size_t>(p)] -= bottleneck;
    const int up = head_[static_cast<std::size_t>(p)];
    if (rcap_[static_cast<std::size_t>(p)] <= 0) make_orphan(i);
    i = up;
  }
  flow_ += bottleneck;
  ++augmentations_;
}

void MaxFlow::adopt_source_orphan(int i) {
  constexpr int kInf = std::numeric_limits<int>::max();
  const auto ui = static_cast<std::size_t>(i);
  int best_arc = -1;
  int best_d = kInf;
  for (int a0 = first_[ui]; a0 >= 0; a0 = next_[static_cast<std::size_t>(a0)]) {
    if (rcap_[static_cast<std::size_t>(sister(a0))] <= 0) continue;
    const int j = head_[static_cast<std::size_t>(a0)];
    if (is_sink_[static_cast<std::size_t>(j)] || parent_[static_cast<std::size_t>(j)] == kFree)
      continue;
    // Walk to the root to check that j still hangs off the source.
    int d = 0;
    for (int jj = j;;) {
      const auto u = static_cast<std::size_t>(jj);
      if (ts_[u] == time_) {
        d += dist_[u];
        break;
      }
      const int a = parent_[u];
      ++d;
      if (a == kTerminal) {
        ts_[u] = time_;
        dist_[u] = 1;
        break;
      }
      if (a == kOrphan) {
        d = kInf;
        break;
      }
      jj = head_[static_cast<std::size_t>(a)];
    }
    if (d == kInf) continue;
    if (d < best_d) {
      best_arc = a0;
      best_d = d;
    }
    for (int jj = j; ts_[static_cast<std::size_t>(jj)] != time_;
         jj = head_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(jj)])]) {
      ts_[static_cast<std::size_t>(jj)] = time_;
      dist_[static_cast<std::size_t>(jj)] = d--;
    }
  }
  if (best_arc >= 0) {
    parent_[ui] = best_arc;
    ts_[ui] = time_;
    dist_[ui] = best_d + 1;
    return;
  }
  for (int a0 = first_[ui]; a0 >= 0; a0 = next_[static_cast<std::size_t>(a0)]) {
    const int j = head_[static_cast<std::size_t>(a0)];
    const auto uj = static_cast<std::size_t>(j);
    const int a = parent_[uj];
    if (is_sink_[uj] || a == kFree) continue;
    if (rcap_[static_cast<std::size_t>(sister(a0))] > 0) activate(j);
    if (a != kTerminal && a != kOrphan && head_[static_cast<std::size_t>(a)] == i) {
      parent_[uj] = kOrphan;
      orphans_.push_back(j);
    }
  }
  parent_[ui] = kFree;
}

void MaxFlow::adopt_sink_orphan(int i) {
  constexpr int kInf = std::numeric_limits<int>::max();
  const auto ui = static_cast<std::size_t>(i);
  int best_arc = -1;
  int best_d = kInf;
  for (int a0 = first_[ui]; a0 >= 0; a0 = next_[static_cast<std::size_t>(a0)]) {
    if (rcap_[static_cast<std::size_t>(a0)] <= 0) continue;
    const int j = head_[static_cast<std::size_t>(a0)];
    if (!is_sink_[static_cast<std::size_t>(j)] || parent_[static_cast<std::size_t>(j)] == kFree)
      continue;
    int d = 0;
    for (int jj = j;;) {
      const auto u = static_cast<std::size_t>(jj);
      if (ts_[u] == time_) {
        d += dist_[u];
        break;
      }
      const int a = parent_[u];
      ++d;
      if (a == kTerminal) {
        ts_[u] = time_;
        dist_[u] = 1;
        break;
      }
      if (a == kOrphan) {
        d = kInf;
        break;
      }
      jj = head_[static_cast<std::size_t>(a)];
    }
    if (d == kInf) continue;
    if (d < best_d) {
      best_arc = a0;
      best_d = d;
    }
    for (int jj = j; ts_[static_cast<std::size_t>(jj)] != time_;
         jj = head_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(jj)])]) {
      ts_[static_cast<std::size_t>(jj)] = time_;
      dist_[static_cast<std::size_t>(jj)] = d--;
    }
  }
  if (best_arc >= 0) {
    parent_[ui] = best_arc;
    ts_[ui] = time_;
    dist_[ui] = best_d + 1;
    return;
  }
  for (int a0 = first_[ui]; a0 >= 0; a0 = next_[static_cast<std::size_t>(a0)]) {
    const int j = head_[static_cast<std::size_t>(a0)];
    const auto uj = static_cast<std::size_t>(j);
    const int a = parent_[uj];
    if (!is_sink_[uj] || a == kFree) continue;
    if (rcap_[static_cast<std::size_t>(a0)] > 0) activate(j);
    if (a != kTerminal && a != kOrphan && head_[static_cast<std::size_t>(a)] == i) {
      parent_[uj] = kOrphan;
      orphans_.push_back(j);
    }
  }
  parent_[ui] = kFree;
}

double MaxFlow::solve() {
  const int n = node_count();
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    parent_[u] = kFree;
    if (tr_cap_[u] != 0.0) {
      is_sink_[u] = tr_cap_[u] < 0.0;
      parent_[u] = kTerminal;
      ts_[u] = 0;
      dist_[u] = 1;
      activate(i);
    }
  }

  int current = -1;
  for (;;) {
    int i = -1;
    if (current >= 0) {
      i = current;
      current = -1;
      active_[static_cast<std::size_t>(i)] = 0;
      if (parent_[static_cast<std::size_t>(i)] == kFree) i = -1;
    }
    if (i < 0) i = next_active();
    if (i < 0) break;
    const auto ui = static_cast<std::size_t>(i);

    int middle = -1;
    if (!is_sink_[ui]) {
      for (int a = first_[ui]; a >= 0; a = next_[static_cast<std::size_t>(a)]) {
        if (rcap_[static_cast<std::size_t>(a)] <= 0) continue;
        const int j = head_[static_cast<std::size_t>(a)];
        const auto uj = static_cast<std::size_t>(j);
        if (parent_[uj] == kFree) {
          is_sink_[uj] = 0;
          parent_[uj] = sister(a);
          ts_[uj] = ts_[ui];
          dist_[uj] = dist_[ui] + 1;
          activate(j);
        } else if (is_sink_[uj]) {
          middle = a;
          break;
        } else if (ts_[uj] <= ts_[ui] && dist_[uj] > dist_[ui]) {
          parent_[uj] = sister(a);
          ts_[uj] = ts_[ui];
          dist_[uj] = dist_[ui] + 1;
        }
      }
    } else {
      for (int a = first_[ui]; a >= 0; a = next_[static_cast<std::size_t>(a)]) {
        if (rcap_[static_cast<std::size_t>(sister(a))] <= 0) continue;
        const int j = head_[static_cast<std::size_t>(a)];
        const auto uj = static_cast<std::size_t>(j);
        if (parent_[uj] == kFree) {
          is_sink_[uj] = 1;
          parent_[uj] = sister(a);
          ts_[uj] = ts_[ui];
          dist_[uj] = dist_[ui] + 1;
          activate(j);
        } else if (!is_sink_[uj]) {
          middle = sister(a);
          break;
        } else if (ts_[uj] <= ts_[ui] && dist_[uj] > dist_[ui]) {
          parent_[uj] = sister(a);
          ts_[uj] = ts_[ui];
          dist_[uj] = dist_[ui] + 1;
        }
      }
    }

    ++time_;
    if (middle < 0) continue;

    // Keep growing from i after the augmentation.
    active_[ui] = 1;
    current = i;
    augment(middle);
    while (!orphans_.empty()) {
      const int o = orphans_.front();
      orphans_.pop_front();
      if (is_sink_[static_cast<std::size_t>(o)])
        adopt_sink_orphan(o);
      else
        adopt_source_orphan(o);
    }
  }
  return flow_;
}

std::vector<std::uint8_t> MaxFlow::source_side() const {
  const int n = node_count();
  std::vector<std::uint8_t> reached(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  for (int i = 0; i < n; ++i)
    if (tr_cap_[static_cast<std::size_t>(i)] > 0) {
      reached[static_cast<std::size_t>(i)] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int a = first_[static_cast<std::size_t>(v)]; a >= 0; a = next_[static_cast<std::size_t>(a)]) {
      const int u = head_[static_cast<std::size_t>(a)];
      if (reached[static_cast<std::size_t>(u)] || !(rcap_[static_cast<std::size_t>(a)] > 0)) continue;
      reached[static_cast<std::size_t>(u)] = 1;
      stack.push_back(u);
    }
  }
  return reached;
}

}  // namespace clicksel
