#include "negpr/tudataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace fs = std::filesystem;

namespace negpr {
namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

int parse_int(const std::string& tok, const std::string& where) {
    const std::string t = trim(tok);
    int value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw DataError("non-integer token '" + tok + "' in " + where);
    return value;
}

double parse_real(const std::string& tok, const std::string& where) {
    const std::string t = trim(tok);
    double value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw DataError("non-numeric token '" + tok + "' in " + where);
    return value;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

}  // namespace

DomainDataset parse_tudataset(const std::string& root, const std::string& name, DomainTag tag) {
    const std::string prefix = (fs::path(root) / (name + "_")).string();

    // Nodes and the graph each belongs to.
    const auto indicator_lines = read_lines(prefix + "graph_indicator.txt");
    const int n_nodes = static_cast<int>(indicator_lines.size());
    if (n_nodes == 0) throw DataError(prefix + "graph_indicator.txt is empty");
    std::vector<int> graph_of(n_nodes);   // 0-based graph id per node
    std::vector<int> local_id(n_nodes);   // node id within its graph
    int n_graphs = 0;
    for (int i = 0; i < n_nodes; ++i) {
        const int gid = parse_int(indicator_lines[i], "graph_indicator");
        if (gid < 1) throw DataError("graph_indicator: ids are 1-based");
        graph_of[i] = gid - 1;
        n_graphs = std::max(n_graphs, gid);
    }
    std::vector<int> nodes_per_graph(n_graphs, 0);
    for (int i = 0; i < n_nodes; ++i) local_id[i] = nodes_per_graph[graph_of[i]]++;
    for (int g = 0; g < n_graphs; ++g)
        if (nodes_per_graph[g] == 0)
            throw DataError("graph_indicator: graph " + std::to_string(g + 1) + " has no nodes");

    // Graph labels, remapped to a contiguous 0-based range.
    const auto label_lines = read_lines(prefix + "graph_labels.txt");
    if (static_cast<int>(label_lines.size()) != n_graphs)
        throw DataError("graph_labels: expected " + std::to_string(n_graphs) + " lines, got " +
                        std::to_string(label_lines.size()));
    std::vector<int> raw_labels(n_graphs);
    std::set<int> distinct;
    for (int g = 0; g < n_graphs; ++g) {
        raw_labels[g] = parse_int(label_lines[g], "graph_labels");
        distinct.insert(raw_labels[g]);
    }
    std::map<int, int> remap;
    int next = 0;
    for (int v : distinct) remap[v] = next++;

    // Edges: both directions are usually listed; keep one copy of each.
    const auto edge_lines = read_lines(prefix + "A.txt");
    std::vector<std::set<std::pair<int, int>>> edge_sets(n_graphs);
    for (const auto& line : edge_lines) {
        const auto toks = split_commas(line);
        if (toks.size() != 2) throw DataError("A.txt: expected 'u, v', got '" + line + "'");
        const int u = parse_int(toks[0], "A.txt");
        const int v = parse_int(toks[1], "A.txt");
        if (u < 1 || v < 1 || u > n_nodes || v > n_nodes)
            throw DataError("A.txt: node id out of range in '" + line + "'");
        if (u == v) throw DataError("A.txt: self-loop on node " + std::to_string(u));
        if (graph_of[u - 1] != graph_of[v - 1])
            throw DataError("A.txt: edge crosses graph boundary in '" + line + "'");
        const int g = graph_of[u - 1];
        const int a = local_id[u - 1];
        const int b = local_id[v - 1];
        edge_sets[g].insert({std::min(a, b), std::max(a, b)});
    }

    // Node features: one-hot node labels and/or raw attributes, else constant.
    std::vector<Vec> features(n_nodes);
    const std::string labels_path = prefix + "node_labels.txt";
    const std::string attrs_path = prefix + "node_attributes.txt";
    if (fs::exists(labels_path)) {
        const auto lines = read_lines(labels_path);
        if (static_cast<int>(lines.size()) != n_nodes)
            throw DataError("node_labels: expected one line per node");
        std::vector<int> raw(n_nodes);
        std::set<int> vals;
        for (int i = 0; i < n_nodes; ++i) {
            raw[i] = parse_int(lines[i], "node_labels");
            vals.insert(raw[i]);
        }
        std::map<int, int> lmap;
        int k = 0;
        for (int v : vals) lmap[v] = k++;
        for (int i = 0; i < n_nodes; ++i) {
            features[i].assign(vals.size(), 0.0);
            features[i][lmap[raw[i]]] = 1.0;
        }
    }
    if (fs::exists(attrs_path)) {
        const auto lines = read_lines(attrs_path);
        if (static_cast<int>(lines.size()) != n_nodes)
            throw DataError("node_attributes: expected one line per node");
        size_t dim = 0;
        for (int i = 0; i < n_nodes; ++i) {
            const auto toks = split_commas(lines[i]);
            if (i == 0) dim = toks.size();
            if (toks.size() != dim)
                throw DataError("node_attributes: inconsistent attribute count");
            for (const auto& t : toks) features[i].push_back(parse_real(t, "node_attributes"));
        }
    }
    if (features[0].empty())
        for (auto& f : features) f.assign(1, 1.0);

    const int d = static_cast<int>(features[0].size());
    DomainDataset ds;
    ds.num_classes = static_cast<int>(distinct.size());
    ds.domain_tag = tag;
    ds.name = name;
    ds.graphs.resize(n_graphs);
    for (int g = 0; g < n_graphs; ++g) {
        GraphInstance& gi = ds.graphs[g];
        gi.node_features = Mat(nodes_per_graph[g], d);
        gi.label = remap[raw_labels[g]];
        gi.edges.assign(edge_sets[g].begin(), edge_sets[g].end());
    }
    for (int i = 0; i < n_nodes; ++i)
        ds.graphs[graph_of[i]].node_features.set_row(local_id[i], features[i]);
    return ds;
}

DomainDataset load_tudataset(const std::string& dir, DomainTag tag) {
    fs::path p = fs::path(dir).lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    return parse_tudataset(p.string(), p.filename().string(), tag);
}

void save_tudataset(const DomainDataset& ds, const std::string& root) {
    fs::create_directories(root);
    const std::string prefix = (fs::path(root) / (ds.name + "_")).string();
    auto open = [](const std::string& path) {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write " + path);
        return out;
    };

    std::ofstream ind = open(prefix + "graph_indicator.txt");
    std::ofstream lab = open(prefix + "graph_labels.txt");
    std::ofstream adj = open(prefix + "A.txt");
    std::ofstream attr = open(prefix + "node_attributes.txt");

    char buf[64];
    int offset = 0;  // global id of the first node of the current graph, 0-based
    for (size_t g = 0; g < ds.graphs.size(); ++g) {
        const GraphInstance& gi = ds.graphs[g];
        lab << gi.label << "\n";
        for (int u = 0; u < gi.num_nodes(); ++u) {
            ind << (g + 1) << "\n";
            for (int c = 0; c < gi.feature_dim(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", gi.node_features(u, c));
                attr << (c ? ", " : "") << buf;
            }
            attr << "\n";
        }
        std::vector<std::pair<int, int>> directed;
        directed.reserve(gi.edges.size() * 2);
        for (const auto& [u, v] : gi.edges) {
            directed.push_back({offset + u + 1, offset + v + 1});
            directed.push_back({offset + v + 1, offset + u + 1});
        }
        std::sort(directed.begin(), directed.end());
        for (const auto& [u, v] : directed) adj << u << ", " << v << "\n";
        offset += gi.num_nodes();
    }
}

}  // namespace negpr
