#pragma once

#include <stdexcept>
#include <string>

#include "negpr/graph.hpp"

namespace negpr {

// Raised for unreadable or malformed dataset files (distinct from config
// problems so the CLI can map it to its own exit code).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses a dataset in TUDataset layout: `root` contains <name>_A.txt
// (comma-separated 1-based edge pairs), <name>_graph_indicator.txt (1-based
// graph id per node line) and <name>_graph_labels.txt. Node features come
// from, in order of preference: <name>_node_attributes.txt (comma-separated
// reals, concatenated after a one-hot of <name>_node_labels.txt when both
// exist), else the one-hot of node labels alone, else a constant 1.0 scalar.
// Graph labels are remapped to 0..C-1 in ascending order of the raw values.
// Edges are undirected and deduplicated; self-loops and edges crossing graph
// boundaries are rejected.
DomainDataset parse_tudataset(const std::string& root, const std::string& name,
                              DomainTag tag = DomainTag::source);

// parse_tudataset with the name taken from the final path component of `dir`.
DomainDataset load_tudataset(const std::string& dir, DomainTag tag = DomainTag::source);

// Writes `ds` as root/<ds.name>_*.txt in the same layout. Features go to
// _node_attributes.txt (full precision), labels to _graph_labels.txt as the
// already-remapped 0-based values, and every edge is emitted in both
// directions with 1-based global node ids. parse(save(ds)) == ds whenever
// every class in [0, num_classes) actually occurs in ds.
void save_tudataset(const DomainDataset& ds, const std::string& root);

}  // namespace negpr
