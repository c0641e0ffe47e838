#pragma once

#include <vector>

#include "negpr/graph.hpp"
#include "negpr/mat.hpp"

namespace negpr {

// All canonical shortest paths of a graph, grouped by start node. For every
// ordered node pair (u, v) with BFS distance in [1, max_len] there is exactly
// one path, plus a length-0 singleton [v] for every node, so by_start[v] is
// never empty.
struct PathMultiset {
    std::vector<std::vector<std::vector<int>>> by_start;

    int total() const {
        int t = 0;
        for (const auto& ps : by_start) t += static_cast<int>(ps.size());
        return t;
    }
    std::vector<std::vector<int>> all() const;
};

// Canonical rule: the shortest path u..v is reconstructed by repeatedly
// stepping from v to its smallest-index neighbor one BFS level closer to u.
PathMultiset extract_substructures(const GraphInstance& g, int max_len);

// Paths plus the per-path mean node-feature vector, precomputed once per
// graph: paths depend only on topology, so this is static across training.
struct PathData {
    PathMultiset paths;
    std::vector<std::vector<Vec>> mean_feats;  // aligned with paths.by_start
};

PathData build_path_data(const GraphInstance& g, int max_len);
std::vector<PathData> build_all_path_data(const DomainDataset& ds, int max_len);

}  // namespace negpr
