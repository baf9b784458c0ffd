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

#include "pixelprobe/max_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "pixelprobe/errors.hpp"

namespace pixelprobe::seg {
namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MaxFlowGraph::MaxFlowGraph(int node_count)
    : nodes_(node_count), source_(node_count), sink_(node_count + 1),
      adjacency_(static_cast<std::size_t>(node_count) + 2) {
  if (node_count < 0) throw ContractViolation("negative node count");
}

void MaxFlowGraph::push_edge(int from, int to, double capacity, double reverse_capacity) {
  if (!(capacity >= 0.0) || !(reverse_capacity >= 0.0)) {
    throw ContractViolation("capacities must be non-negative");
  }
  for (double c : {capacity, reverse_capacity}) {
    if (std::isfinite(c)) max_capacity_ = std::max(max_capacity_, c);
  }
  auto& a = adjacency_[static_cast<std::size_t>(from)];
  auto& b = adjacency_[static_cast<std::size_t>(to)];
  a.push_back({to, static_cast<int>(b.size()), capacity});
  b.push_back({from, static_cast<int>(a.size()) - 1, reverse_capacity});
}

void MaxFlowGraph::add_terminal_edges(int node, double source_capacity, double sink_capacity) {
  if (node < 0 || node >= nodes_) throw ContractViolation("node index out of range");
  if (source_capacity > 0.0) push_edge(source_, node, source_capacity, 0.0);
  if (sink_capacity > 0.0) push_edge(node, sink_, sink_capacity, 0.0);
}

void MaxFlowGraph::add_edge(int a, int b, double capacity_ab, double capacity_ba) {
  if (a < 0 || a >= nodes_ || b < 0 || b >= nodes_ || a == b) {
    throw ContractViolation("invalid edge endpoints");
  }
  if (capacity_ab > 0.0 || capacity_ba > 0.0) push_edge(a, b, capacity_ab, capacity_ba);
}

bool MaxFlowGraph::build_levels() {
  level_.assign(adjacency_.size(), -1);
  std::queue<int> queue;
  level_[static_cast<std::size_t>(source_)] = 0;
  queue.push(source_);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (const auto& e : adjacency_[static_cast<std::size_t>(u)]) {
      if (e.residual > epsilon_ && level_[static_cast<std::size_t>(e.to)] < 0) {
        level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
        queue.push(e.to);
      }
    }
  }
  return level_[static_cast<std::size_t>(sink_)] >= 0;
}

// Blocking flow on the current level graph with an explicit path stack.
double MaxFlowGraph::augment() {
  double total = 0.0;
  std::vector<std::pair<int, std::size_t>> path;  // (node, edge index taken)
  int u = source_;
  while (true) {
    if (u == sink_) {
      double bottleneck = kInf;
      for (const auto& [node, idx] : path) {
        bottleneck = std::min(bottleneck, adjacency_[static_cast<std::size_t>(node)][idx].residual);
      }
      if (!std::isfinite(bottleneck)) {
        throw ContractViolation("source and sink joined by an infinite-capacity path");
      }
      std::size_t retreat = path.size();
      for (std::size_t i = 0; i < path.size(); ++i) {
        auto& e = adjacency_[static_cast<std::size_t>(path[i].first)][path[i].second];
        e.residual -= bottleneck;
        adjacency_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.reverse)].residual +=
            bottleneck;
        if (retreat == path.size() && e.residual <= epsilon_) retreat = i;
      }
      total += bottleneck;
      // Resume from the tail of the first saturated edge.
      if (retreat == path.size()) retreat = 0;
      const int resume = path[retreat].first;
      path.resize(retreat);
      u = resume;
      continue;
    }
    auto& edges = adjacency_[static_cast<std::size_t>(u)];
    auto& it = next_edge_[static_cast<std::size_t>(u)];
    bool advanced = false;
    for (; it < edges.size(); ++it) {
      const auto& e = edges[it];
      if (e.residual > epsilon_ &&
          level_[static_cast<std::size_t>(e.to)] == level_[static_cast<std::size_t>(u)] + 1) {
        path.emplace_back(u, it);
        u = e.to;
        advanced = true;
        break;
      }
    }
    if (advanced) continue;
    // Dead end: prune u from this phase and step back.
    level_[static_cast<std::size_t>(u)] = -1;
    if (path.empty()) break;
    u = path.back().first;
    path.pop_back();
    ++next_edge_[static_cast<std::size_t>(u)];
  }
  return total;
}

double MaxFlowGraph::solve() {
  epsilon_ = 1e-12 * (1.0 + max_capacity_);
  double flow = 0.0;
  while (build_levels()) {
    next_edge_.assign(adjacency_.size(), 0);
    flow += augment();
  }
  // Residual reachability from the source defines the cut.
  source_side_.assign(adjacency_.size(), 0);
  std::queue<int> queue;
  source_side_[static_cast<std::size_t>(source_)] = 1;
  queue.push(source_);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (const auto& e : adjacency_[static_cast<std::size_t>(u)]) {
      if (e.residual > epsilon_ && !source_side_[static_cast<std::size_t>(e.to)]) {
        source_side_[static_cast<std::size_t>(e.to)] = 1;
        queue.push(e.to);
      }
    }
  }
  return flow;
}

}  // namespace pixelprobe::seg
