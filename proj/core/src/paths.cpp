#include "negpr/paths.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace negpr {

std::vector<std::vector<int>> PathMultiset::all() const {
    std::vector<std::vector<int>> out;
    out.reserve(total());
    for (const auto& ps : by_start)
        for (const auto& p : ps) out.push_back(p);
    return out;
}

PathMultiset extract_substructures(const GraphInstance& g, int max_len) {
    if (max_len < 1) throw std::invalid_argument("path extraction: max_len must be >= 1");
    const int n = g.num_nodes();
    const auto adj = g.adjacency();

    PathMultiset ps;
    ps.by_start.resize(n);
    std::vector<int> dist(n);
    std::deque<int> queue;
    for (int u = 0; u < n; ++u) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[u] = 0;
        queue.clear();
        queue.push_back(u);
        while (!queue.empty()) {
            const int w = queue.front();
            queue.pop_front();
            if (dist[w] == max_len) continue;
            for (int x : adj[w])
                if (dist[x] < 0) {
                    dist[x] = dist[w] + 1;
                    queue.push_back(x);
                }
        }
        auto& here = ps.by_start[u];
        here.push_back({u});
        for (int v = 0; v < n; ++v) {
            if (dist[v] < 1) continue;
            std::vector<int> path(dist[v] + 1);
            int cur = v;
            for (int step = dist[v]; step > 0; --step) {
                path[step] = cur;
                for (int w : adj[cur])  // sorted, so first hit is smallest index
                    if (dist[w] == step - 1) {
                        cur = w;
                        break;
                    }
            }
            path[0] = u;
            here.push_back(std::move(path));
        }
    }
    return ps;
}

PathData build_path_data(const GraphInstance& g, int max_len) {
    PathData pd;
    pd.paths = extract_substructures(g, max_len);
    const int d = g.feature_dim();
    pd.mean_feats.resize(pd.paths.by_start.size());
    for (size_t v = 0; v < pd.paths.by_start.size(); ++v) {
        for (const auto& path : pd.paths.by_start[v]) {
            Vec mean(d, 0.0);
            for (int node : path)
                for (int c = 0; c < d; ++c) mean[c] += g.node_features(node, c);
            const double inv = 1.0 / static_cast<double>(path.size());
            for (double& x : mean) x *= inv;
            pd.mean_feats[v].push_back(std::move(mean));
        }
    }
    return pd;
}

std::vector<PathData> build_all_path_data(const DomainDataset& ds, int max_len) {
    std::vector<PathData> out;
    out.reserve(ds.size());
    for (const auto& g : ds.graphs) out.push_back(build_path_data(g, max_len));
    return out;
}

}  // namespace negpr
