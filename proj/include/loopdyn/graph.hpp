#pragma once

// Body-joint graph analysis: independent loop count, Grübler mobility and a
// deterministic shortest-cycle basis. Static bodies are rigidly attached to
// the ground, so they are merged into the WORLD vertex.

#include <loopdyn/joint.hpp>
#include <loopdyn/scene_io.hpp>
#include <loopdyn/scene_model.hpp>

#include <algorithm>
#include <map>
#include <queue>
#include <string>
#include <vector>

namespace loopdyn {

struct GraphReport {
  int body_count = 0;
  int movable_body_count = 0;
  int joint_count = 0;
  int vertex_count = 0;  // movable bodies + WORLD
  int component_count = 0;
  int independent_loop_count = 0;
  int gruebler_mobility = 0;
  std::vector<std::vector<std::string>> loops;  // joint ids per basis cycle
};

struct GraphEdge {
  int u = 0;
  int v = 0;
};

struct CycleSpace {
  int components = 0;
  int dimension = 0;
  std::vector<std::vector<int>> basis;  // edge indices, each sorted
};

namespace graph_detail {

// Shortest path u -> v avoiding edge `skip`; returns edge indices or empty.
inline std::vector<int> shortest_path(int vertex_count, const std::vector<GraphEdge>& edges,
                                      const std::vector<std::vector<int>>& incident, int u, int v,
                                      int skip) {
  std::vector<int> via(vertex_count, -1);
  std::vector<char> seen(vertex_count, 0);
  std::queue<int> q;
  q.push(u);
  seen[u] = 1;
  while (!q.empty()) {
    const int x = q.front();
    q.pop();
    if (x == v) break;
    for (int e : incident[x]) {
      if (e == skip) continue;
      const int y = edges[e].u == x ? edges[e].v : edges[e].u;
      if (seen[y]) continue;
      seen[y] = 1;
      via[y] = e;
      q.push(y);
    }
  }
  if (!seen[v]) return {};
  std::vector<int> path;
  for (int x = v; x != u;) {
    const int e = via[x];
    path.push_back(e);
    x = edges[e].u == x ? edges[e].v : edges[e].u;
  }
  return path;
}

// Incremental GF(2) elimination over edge-incidence vectors.
class Gf2Basis {
 public:
  explicit Gf2Basis(int width) : width_(width) {}

  bool insert(const std::vector<int>& cycle) {
    std::vector<char> v(width_, 0);
    for (int e : cycle) v[e] ^= 1;
    for (const auto& [pivot, row] : rows_) {
      if (v[pivot]) {
        for (int k = 0; k < width_; ++k) v[k] ^= row[k];
      }
    }
    for (int k = 0; k < width_; ++k) {
      if (v[k]) {
        rows_.emplace_back(k, std::move(v));
        return true;
      }
    }
    return false;
  }

 private:
  int width_;
  std::vector<std::pair<int, std::vector<char>>> rows_;
};

}  // namespace graph_detail

/// Cycle space of an undirected multigraph (self-loops and parallel edges allowed).
inline CycleSpace cycle_space(int vertex_count, const std::vector<GraphEdge>& edges) {
  CycleSpace out;
  std::vector<std::vector<int>> incident(vertex_count);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].u].push_back(static_cast<int>(e));
    if (edges[e].v != edges[e].u) incident[edges[e].v].push_back(static_cast<int>(e));
  }
  std::vector<int> comp(vertex_count, -1);
  for (int s = 0; s < vertex_count; ++s) {
    if (comp[s] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    comp[s] = out.components;
    while (!q.empty()) {
      const int x = q.front();
      q.pop();
      for (int e : incident[x]) {
        const int y = edges[e].u == x ? edges[e].v : edges[e].u;
        if (comp[y] < 0) {
          comp[y] = out.components;
          q.push(y);
        }
      }
    }
    ++out.components;
  }
  out.dimension = static_cast<int>(edges.size()) - vertex_count + out.components;

  // Candidates: the shortest cycle through each edge, shortest first.
  std::vector<std::vector<int>> candidates;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto ei = static_cast<int>(e);
    if (edges[e].u == edges[e].v) {
      candidates.push_back({ei});
      continue;
    }
    auto path = graph_detail::shortest_path(vertex_count, edges, incident, edges[e].u, edges[e].v, ei);
    if (path.empty()) continue;
    path.push_back(ei);
    std::sort(path.begin(), path.end());
    candidates.push_back(std::move(path));
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  graph_detail::Gf2Basis basis(static_cast<int>(edges.size()));
  for (auto& c : candidates) {
    if (static_cast<int>(out.basis.size()) == out.dimension) break;
    if (basis.insert(c)) out.basis.push_back(c);
  }
  // Fallback: fundamental cycles of a BFS spanning forest always complete the basis.
  if (static_cast<int>(out.basis.size()) < out.dimension) {
    std::vector<char> tree(edges.size(), 0);
    std::vector<char> seen(vertex_count, 0);
    for (int s = 0; s < vertex_count; ++s) {
      if (seen[s]) continue;
      std::queue<int> q;
      q.push(s);
      seen[s] = 1;
      while (!q.empty()) {
        const int x = q.front();
        q.pop();
        for (int e : incident[x]) {
          const int y = edges[e].u == x ? edges[e].v : edges[e].u;
          if (seen[y]) continue;
          seen[y] = 1;
          tree[e] = 1;
          q.push(y);
        }
      }
    }
    std::vector<std::vector<int>> tree_incident(vertex_count);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!tree[e]) continue;
      tree_incident[edges[e].u].push_back(static_cast<int>(e));
      tree_incident[edges[e].v].push_back(static_cast<int>(e));
    }
    for (std::size_t e = 0; e < edges.size() && static_cast<int>(out.basis.size()) < out.dimension; ++e) {
      if (tree[e]) continue;
      auto path = graph_detail::shortest_path(vertex_count, edges, tree_incident, edges[e].u, edges[e].v,
                                              static_cast<int>(e));
      path.push_back(static_cast<int>(e));
      std::sort(path.begin(), path.end());
      if (basis.insert(path)) out.basis.push_back(std::move(path));
    }
  }
  return out;
}

inline GraphReport analyze_graph(const SceneModel& scene) {
  GraphReport r;
  r.body_count = static_cast<int>(scene.bodies.size());
  r.joint_count = static_cast<int>(scene.joints.size());
  std::map<std::string, int> vertex;
  // Vertex 0 is WORLD; movable bodies follow in declaration order.
  int next = 1;
  for (const auto& b : scene.bodies) {
    if (!b.is_static) vertex[b.id] = next++;
  }
  r.movable_body_count = next - 1;
  r.vertex_count = next;
  auto vertex_of = [&](const std::string& id) {
    auto it = vertex.find(id);
    return it == vertex.end() ? 0 : it->second;
  };
  std::vector<GraphEdge> edges;
  int constrained = 0;
  for (const auto& j : scene.joints) {
    edges.push_back({vertex_of(j.parent), vertex_of(j.child)});
    constrained += constraint_dimension(j.kind);
  }
  const CycleSpace cs = cycle_space(r.vertex_count, edges);
  r.component_count = cs.components;
  r.independent_loop_count = cs.dimension;
  r.gruebler_mobility = 6 * r.movable_body_count - constrained;
  for (const auto& cycle : cs.basis) {
    std::vector<std::string> ids;
    for (int e : cycle) ids.push_back(scene.joints[e].id);
    r.loops.push_back(std::move(ids));
  }
  return r;
}

inline json to_json(const GraphReport& r) {
  json j{{"body_count", r.body_count},
         {"movable_body_count", r.movable_body_count},
         {"joint_count", r.joint_count},
         {"vertex_count", r.vertex_count},
         {"component_count", r.component_count},
         {"independent_loop_count", r.independent_loop_count},
         {"gruebler_mobility", r.gruebler_mobility},
         {"loops", r.loops}};
  return j;
}

}  // namespace loopdyn
