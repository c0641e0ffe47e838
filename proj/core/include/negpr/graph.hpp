#pragma once

#include <string>
#include <utility>
#include <vector>

#include "negpr/mat.hpp"

namespace negpr {

/// One attributed graph. Edges are undirected, stored once with u < v.
struct GraphInstance {
    Mat node_features;  // |V| x d
    std::vector<std::pair<int, int>> edges;
    int label = -1;  // class index in [0, C), -1 = unlabeled

    int num_nodes() const { return node_features.rows; }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int feature_dim() const { return node_features.cols; }
    bool has_label() const { return label >= 0; }

    /// Sorted neighbor lists. Built on demand; cheap next to a forward pass.
    std::vector<std::vector<int>> adjacency() const;

    bool operator==(const GraphInstance& o) const {
        return node_features == o.node_features && edges == o.edges && label == o.label;
    }
};

enum class DomainTag { source, target };

struct DomainDataset {
    std::vector<GraphInstance> graphs;
    int num_classes = 0;
    DomainTag domain_tag = DomainTag::source;
    std::string name;

    size_t size() const { return graphs.size(); }
    int feature_dim() const { return graphs.empty() ? 0 : graphs.front().feature_dim(); }
    std::vector<int> labels() const;

    bool operator==(const DomainDataset& o) const {
        return graphs == o.graphs && num_classes == o.num_classes && name == o.name;
    }
};

/// Throws std::invalid_argument when a graph violates the structural
/// invariants (endpoint range, self-loop, feature-dim consistency, labels).
void validate(const GraphInstance& g, int feature_dim, int num_classes);
void validate(const DomainDataset& ds);

enum class DensityMetric { edge_density, node_count, flux };

DensityMetric density_metric_from_string(const std::string& s);
std::string to_string(DensityMetric m);

/// edge_density = 2|E| / (|V| (|V|-1)), 0 when |V| = 1;
/// node_count = |V|; flux = |E| / |V|.
double density_statistic(const GraphInstance& g, DensityMetric metric);

/// Sort graphs by (statistic, original index) ascending and cut into
/// n_parts contiguous chunks; the remainder goes to the earliest chunks.
/// Parts are named "<name>0".."<name>{n-1}".
std::vector<DomainDataset> partition_by_quantile(const DomainDataset& ds, DensityMetric metric,
                                                 int n_parts);

}  // namespace negpr
