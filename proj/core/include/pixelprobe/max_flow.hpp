/*
 * Copyright 2026 The PixelProbe Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIXELPROBE_MAX_FLOW_HPP
#define PIXELPROBE_MAX_FLOW_HPP

#include <cstdint>
#include <vector>

namespace pixelprobe::seg {

/// s-t max-flow / min-cut on real capacities (Dinic). Capacities may be
/// +infinity for hard constraints.
class MaxFlowGraph {
 public:
  explicit MaxFlowGraph(int node_count);

  int node_count() const { return nodes_; }

  /// Capacity from the source into `node` and from `node` to the sink.
  void add_terminal_edges(int node, double source_capacity, double sink_capacity);
  /// Directed capacities a->b and b->a.
  void add_edge(int a, int b, double capacity_ab, double capacity_ba);

  /// Returns the maximum flow value.
  double solve();

  /// After solve(): true when `node` is reachable from the source in the
  /// residual graph, i.e. it lies on the source side of a minimum cut.
  bool on_source_side(int node) const { return source_side_[static_cast<std::size_t>(node)] != 0; }

 private:
  struct Edge {
    int to;
    int reverse;
    double residual;
  };

  void push_edge(int from, int to, double capacity, double reverse_capacity);
  bool build_levels();
  double augment();

  int nodes_;
  int source_;
  int sink_;
  double epsilon_ = 0.0;
  double max_capacity_ = 0.0;
  std::vector<std::vector<Edge>> adjacency_;
  std::vector<int> level_;
  std::vector<std::size_t> next_edge_;
  std::vector<std::uint8_t> source_side_;
};

}  // namespace pixelprobe::seg

#endif  // PIXELPROBE_MAX_FLOW_HPP
