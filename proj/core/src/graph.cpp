#include "negpr/graph.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace negpr {

std::vector<std::vector<int>> GraphInstance::adjacency() const {
    std::vector<std::vector<int>> adj(num_nodes());
    for (const auto& [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

std::vector<int> DomainDataset::labels() const {
    std::vector<int> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(g.label);
    return out;
}

void validate(const GraphInstance& g, int feature_dim, int num_classes) {
    const int n = g.num_nodes();
    if (n < 1) throw std::invalid_argument("graph: |V| must be >= 1");
    if (g.feature_dim() != feature_dim)
        throw std::invalid_argument("graph: feature dim mismatch");
    for (const auto& [u, v] : g.edges) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (u == v) throw std::invalid_argument("graph: self-loop");
    }
    if (g.label >= num_classes)
        throw std::invalid_argument("graph: label out of range");
}

void validate(const DomainDataset& ds) {
    const int d = ds.feature_dim();
    for (const auto& g : ds.graphs) {
        validate(g, d, ds.num_classes);
        if (ds.domain_tag == DomainTag::source && !g.has_label())
            throw std::invalid_argument("dataset: source graph without label");
    }
}

DensityMetric density_metric_from_string(const std::string& s) {
    if (s == "edge_density") return DensityMetric::edge_density;
    if (s == "node_count") return DensityMetric::node_count;
    if (s == "flux") return DensityMetric::flux;
    throw std::invalid_argument("unknown density metric: " + s);
}

std::string to_string(DensityMetric m) {
    switch (m) {
        case DensityMetric::edge_density: return "edge_density";
        case DensityMetric::node_count: return "node_count";
        case DensityMetric::flux: return "flux";
    }
    return "?";
}

double density_statistic(const GraphInstance& g, DensityMetric metric) {
    const double n = static_cast<double>(g.num_nodes());
    const double e = static_cast<double>(g.num_edges());
    switch (metric) {
        case DensityMetric::edge_density:
            return g.num_nodes() == 1 ? 0.0 : 2.0 * e / (n * (n - 1.0));
        case DensityMetric::node_count: return n;
        case DensityMetric::flux: return e / n;
    }
    return 0.0;
}

std::vector<DomainDataset> partition_by_quantile(const DomainDataset& ds, DensityMetric metric,
                                                 int n_parts) {
    if (n_parts < 2) throw std::invalid_argument("partition: n_parts must be >= 2");
    const size_t n = ds.size();
    if (n < static_cast<size_t>(n_parts))
        throw std::invalid_argument("partition: dataset smaller than n_parts");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<double> stat(n);
    for (size_t i = 0; i < n; ++i) stat[i] = density_statistic(ds.graphs[i], metric);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return stat[a] < stat[b]; });

    const size_t base = n / n_parts;
    const size_t rem = n % n_parts;
    std::vector<DomainDataset> parts;
    parts.reserve(n_parts);
    size_t pos = 0;
    for (int p = 0; p < n_parts; ++p) {
        const size_t sz = base + (static_cast<size_t>(p) < rem ? 1 : 0);
        DomainDataset part;
        part.num_classes = ds.num_classes;
        part.domain_tag = ds.domain_tag;
        part.name = ds.name + std::to_string(p);
        part.graphs.reserve(sz);
        for (size_t i = 0; i < sz; ++i) part.graphs.push_back(ds.graphs[order[pos + i]]);
        pos += sz;
        parts.push_back(std::move(part));
    }
    return parts;
}

}  // namespace negpr
