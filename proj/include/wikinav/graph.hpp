#pragma once
// Sparse directed link graph and the network centralities computed on it.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wikinav {

using NodeId = std::uint32_t;

struct Edge {
    NodeId src = 0;
    NodeId trg = 0;
    auto operator<=>(const Edge&) const = default;
};

// Immutable CSR graph. Edges are unique, sorted by (src, trg), and carry a
// stable index in [0, edge_count()) that edge-aligned value vectors use.
class LinkGraph {
public:
    LinkGraph() = default;

    // Duplicate edges are collapsed; self-loops are kept. Throws MalformedInput
    // if an endpoint is >= node_count. Labels are optional; when given there
    // must be exactly node_count of them.
    static LinkGraph build(std::size_t node_count, std::span<const Edge> edges,
                           std::vector<std::string> labels = {});

    std::size_t node_count() const { return node_count_; }
    std::size_t edge_count() const { return targets_.size(); }
    std::size_t self_loop_count() const { return self_loops_; }
    std::size_t duplicates_collapsed() const { return duplicates_; }

    std::span<const NodeId> out_neighbors(NodeId i) const {
        return {targets_.data() + out_offsets_[i], targets_.data() + out_offsets_[i + 1]};
    }
    std::span<const NodeId> in_neighbors(NodeId j) const {
        return {sources_.data() + in_offsets_[j], sources_.data() + in_offsets_[j + 1]};
    }
    // Edge ids of the in-edges of j, parallel to in_neighbors(j).
    std::span<const std::size_t> in_edge_ids(NodeId j) const {
        return {in_edge_ids_.data() + in_offsets_[j], in_edge_ids_.data() + in_offsets_[j + 1]};
    }
    // Out-edges of i occupy edge ids [out_begin(i), out_end(i)).
    std::size_t out_begin(NodeId i) const { return out_offsets_[i]; }
    std::size_t out_end(NodeId i) const { return out_offsets_[i + 1]; }
    std::size_t out_degree(NodeId i) const { return out_end(i) - out_begin(i); }
    std::size_t in_degree(NodeId j) const { return in_offsets_[j + 1] - in_offsets_[j]; }

    std::optional<std::size_t> edge_id(NodeId src, NodeId trg) const;
    Edge edge(std::size_t id) const;
    NodeId edge_source(std::size_t id) const;
    NodeId edge_target(std::size_t id) const { return targets_[id]; }
    std::vector<Edge> edges() const;

    bool has_labels() const { return !labels_.empty(); }
    const std::string& label(NodeId i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }

    // Hash of node count and edge set; used to check that edge-aligned data
    // belongs to this graph.
    std::uint64_t fingerprint() const { return fingerprint_; }

private:
    std::size_t node_count_ = 0;
    std::size_t self_loops_ = 0;
    std::size_t duplicates_ = 0;
    std::vector<std::size_t> out_offsets_{0};
    std::vector<NodeId> targets_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<NodeId> sources_;
    std::vector<std::size_t> in_edge_ids_;
    std::vector<std::string> labels_;
    std::uint64_t fingerprint_ = 0;
};

LinkGraph build_graph(std::span<const Edge> edges, std::size_t node_count,
                      std::vector<std::string> labels = {});

enum class CentralityKind { in_degree, out_degree, degree, pagerank, kcore };

const char* to_string(CentralityKind kind);

struct CentralityVector {
    CentralityKind kind = CentralityKind::degree;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct DegreeVectors {
    CentralityVector in_degree;
    CentralityVector out_degree;
    CentralityVector degree;
};

DegreeVectors degrees(const LinkGraph& g);

// Core numbers on the undirected projection (self-loops ignored), by
// minimum-degree peeling.
CentralityVector kcore(const LinkGraph& g);

struct PageRankOptions {
    double alpha = 0.85;
    double tol = 1e-10;
    int max_iter = 1000;
};

// Power iteration from the uniform vector. Dangling nodes spread their mass
// uniformly. Throws ConvergenceError (carrying the last iterate) if the L1
// change does not drop to tol within max_iter iterations.
CentralityVector pagerank(const LinkGraph& g, const PageRankOptions& opts = {});

// Text snapshot: header comments, a magic line, node labels and the sorted edge
// list. Readers reject unknown magic or versions.
inline constexpr const char* kGraphMagic = "WIKINAV-GRAPH";
inline constexpr int kGraphFormatVersion = 1;

void write_graph_snapshot(std::ostream& out, const LinkGraph& g, const std::string& header = {});
LinkGraph read_graph_snapshot(std::istream& in);

} // namespace wikinav
