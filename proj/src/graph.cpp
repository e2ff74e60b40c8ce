#include "wikinav/graph.hpp"

#include "wikinav/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace wikinav {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

LinkGraph LinkGraph::build(std::size_t node_count, std::span<const Edge> edges,
                           std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != node_count) {
        throw MalformedInput("label count " + std::to_string(labels.size()) +
                             " does not match node count " + std::to_string(node_count));
    }
    for (const auto& e : edges) {
        if (e.src >= node_count || e.trg >= node_count) {
            throw MalformedInput("edge (" + std::to_string(e.src) + "," + std::to_string(e.trg) +
                                 ") references a node outside [0," + std::to_string(node_count) + ")");
        }
    }

    std::vector<Edge> sorted(edges.begin(), edges.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    LinkGraph g;
    g.node_count_ = node_count;
    g.duplicates_ = edges.size() - sorted.size();
    g.labels_ = std::move(labels);

    g.out_offsets_.assign(node_count + 1, 0);
    g.in_offsets_.assign(node_count + 1, 0);
    g.targets_.reserve(sorted.size());
    for (const auto& e : sorted) {
        ++g.out_offsets_[e.src + 1];
        ++g.in_offsets_[e.trg + 1];
        g.targets_.push_back(e.trg);
        if (e.src == e.trg) ++g.self_loops_;
    }
    std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
    std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(), g.in_offsets_.begin());

    // Reverse CSR. Scanning edges in (src, trg) order keeps each in-list sorted by source.
    g.sources_.resize(sorted.size());
    g.in_edge_ids_.resize(sorted.size());
    std::vector<std::size_t> cursor(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (std::size_t id = 0; id < sorted.size(); ++id) {
        const auto& e = sorted[id];
        const std::size_t slot = cursor[e.trg]++;
        g.sources_[slot] = e.src;
        g.in_edge_ids_[slot] = id;
    }

    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, node_count);
    for (const auto& e : sorted) h = fnv1a(h, (std::uint64_t{e.src} << 32) | e.trg);
    g.fingerprint_ = h;
    return g;
}

std::optional<std::size_t> LinkGraph::edge_id(NodeId src, NodeId trg) const {
    if (src >= node_count_ || trg >= node_count_) return std::nullopt;
    const auto row = out_neighbors(src);
    const auto it = std::lower_bound(row.begin(), row.end(), trg);
    if (it == row.end() || *it != trg) return std::nullopt;
    return out_offsets_[src] + static_cast<std::size_t>(it - row.begin());
}

NodeId LinkGraph::edge_source(std::size_t id) const {
    const auto it = std::upper_bound(out_offsets_.begin(), out_offsets_.end(), id);
    return static_cast<NodeId>(it - out_offsets_.begin() - 1);
}

Edge LinkGraph::edge(std::size_t id) const { return {edge_source(id), targets_[id]}; }

std::vector<Edge> LinkGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId i = 0; i < node_count_; ++i)
        for (NodeId j : out_neighbors(i)) out.push_back({i, j});
    return out;
}

LinkGraph build_graph(std::span<const Edge> edges, std::size_t node_count,
                      std::vector<std::string> labels) {
    return LinkGraph::build(node_count, edges, std::move(labels));
}

const char* to_string(CentralityKind kind) {
    switch (kind) {
    case CentralityKind::in_degree: return "in_degree";
    case CentralityKind::out_degree: return "out_degree";
    case CentralityKind::degree: return "degree";
    case CentralityKind::pagerank: return "pagerank";
    case CentralityKind::kcore: return "kcore";
    }
    return "?";
}

DegreeVectors degrees(const LinkGraph& g) {
    const std::size_t n = g.node_count();
    DegreeVectors d{{CentralityKind::in_degree, std::vector<double>(n)},
                    {CentralityKind::out_degree, std::vector<double>(n)},
                    {CentralityKind::degree, std::vector<double>(n)}};
    for (NodeId i = 0; i < n; ++i) {
        d.in_degree.values[i] = static_cast<double>(g.in_degree(i));
        d.out_degree.values[i] = static_cast<double>(g.out_degree(i));
        d.degree.values[i] = d.in_degree.values[i] + d.out_degree.values[i];
    }
    return d;
}

CentralityVector kcore(const LinkGraph& g) {
    const std::size_t n = g.node_count();

    // Undirected projection: merged in/out neighbor lists without self-loops.
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<NodeId> adj;
    adj.reserve(2 * g.edge_count());
    for (NodeId v = 0; v < n; ++v) {
        const auto out = g.out_neighbors(v);
        const auto in = g.in_neighbors(v);
        const std::size_t start = adj.size();
        std::set_union(out.begin(), out.end(), in.begin(), in.end(), std::back_inserter(adj));
        adj.erase(std::remove(adj.begin() + static_cast<std::ptrdiff_t>(start), adj.end(), v), adj.end());
        offsets[v + 1] = adj.size();
    }

    // Batagelj-Zaversnik bucket peeling.
    std::vector<std::size_t> deg(n);
    std::size_t max_deg = 0;
    for (NodeId v = 0; v < n; ++v) {
        deg[v] = offsets[v + 1] - offsets[v];
        max_deg = std::max(max_deg, deg[v]);
    }
    std::vector<std::size_t> bin(max_deg + 1, 0);
    for (auto d : deg) ++bin[d];
    std::size_t start = 0;
    for (auto& b : bin) {
        const std::size_t count = b;
        b = start;
        start += count;
    }
    std::vector<NodeId> vert(n);
    std::vector<std::size_t> pos(n);
    for (NodeId v = 0; v < n; ++v) {
        pos[v] = bin[deg[v]]++;
        vert[pos[v]] = v;
    }
    for (std::size_t d = max_deg; d >= 1; --d) bin[d] = bin[d - 1];
    if (!bin.empty()) bin[0] = 0;

    for (std::size_t i = 0; i < n; ++i) {
        const NodeId v = vert[i];
        for (std::size_t k = offsets[v]; k < offsets[v + 1]; ++k) {
            const NodeId u = adj[k];
            if (deg[u] > deg[v]) {
                const std::size_t du = deg[u];
                const std::size_t pu = pos[u];
                const std::size_t pw = bin[du];
                const NodeId w = vert[pw];
                if (u != w) {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                ++bin[du];
                --deg[u];
            }
        }
    }

    CentralityVector out{CentralityKind::kcore, std::vector<double>(n)};
    for (NodeId v = 0; v < n; ++v) out.values[v] = static_cast<double>(deg[v]);
    return out;
}

CentralityVector pagerank(const LinkGraph& g, const PageRankOptions& opts) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
        throw PreconditionError("pagerank: alpha must lie in (0,1)");
    if (!(opts.tol > 0.0)) throw PreconditionError("pagerank: tol must be positive");

    const std::size_t n = g.node_count();
    CentralityVector pr{CentralityKind::pagerank, {}};
    if (n == 0) return pr;

    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> x(n, inv_n), next(n), share(n);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double dangling = 0.0;
        for (NodeId i = 0; i < n; ++i) {
            const std::size_t d = g.out_degree(i);
            if (d == 0) {
                dangling += x[i];
                share[i] = 0.0;
            } else {
                share[i] = x[i] / static_cast<double>(d);
            }
        }
        const double base = (1.0 - opts.alpha) * inv_n + opts.alpha * dangling * inv_n;
        double delta = 0.0;
        for (NodeId j = 0; j < n; ++j) {
            double acc = 0.0;
            for (NodeId i : g.in_neighbors(j)) acc += share[i];
            next[j] = base + opts.alpha * acc;
            delta += std::abs(next[j] - x[j]);
        }
        x.swap(next);
        if (delta <= opts.tol) {
            const double total = std::accumulate(x.begin(), x.end(), 0.0);
            for (auto& v : x) v /= total;
            pr.values = std::move(x);
            return pr;
        }
    }
    throw ConvergenceError("pagerank did not converge within " + std::to_string(opts.max_iter) +
                               " iterations",
                           std::move(x));
}

void write_graph_snapshot(std::ostream& out, const LinkGraph& g, const std::string& header) {
    out << header;
    out << kGraphMagic << ' ' << kGraphFormatVersion << '\n';
    out << "nodes\t" << g.node_count() << '\n';
    for (NodeId i = 0; i < g.node_count(); ++i)
        out << (g.has_labels() ? g.label(i) : std::to_string(i)) << '\n';
    out << "edges\t" << g.edge_count() << '\n';
    for (NodeId i = 0; i < g.node_count(); ++i)
        for (NodeId j : g.out_neighbors(i)) out << i << '\t' << j << '\n';
}

LinkGraph read_graph_snapshot(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw MalformedInput(std::string("graph snapshot truncated before ") + what);
        ++line_no;
    };
    do {
        next_line("magic header");
    } while (!line.empty() && line[0] == '#');

    std::istringstream magic(line);
    std::string word;
    int version = 0;
    if (!(magic >> word >> version) || word != kGraphMagic)
        throw MalformedInput("not a wikinav graph snapshot", line_no);
    if (version != kGraphFormatVersion)
        throw MalformedInput("unsupported graph snapshot version " + std::to_string(version), line_no);

    auto read_count = [&](const char* key) {
        next_line(key);
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.substr(0, tab) != key)
            throw MalformedInput(std::string("expected '") + key + "' section", line_no);
        return static_cast<std::size_t>(std::stoull(line.substr(tab + 1)));
    };

    const std::size_t n = read_count("nodes");
    std::vector<std::string> labels(n);
    for (auto& l : labels) {
        next_line("node labels");
        l = line;
    }
    const std::size_t m = read_count("edges");
    std::vector<Edge> edges(m);
    for (auto& e : edges) {
        next_line("edge list");
        std::istringstream row(line);
        std::uint64_t s = 0, t = 0;
        if (!(row >> s >> t)) throw MalformedInput("bad edge row", line_no);
        e = {static_cast<NodeId>(s), static_cast<NodeId>(t)};
    }
    return LinkGraph::build(n, edges, std::move(labels));
}

} // namespace wikinav
