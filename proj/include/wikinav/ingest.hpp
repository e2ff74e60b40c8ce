#pragma once
// Parsing and alignment of edge lists, clickstream transitions and link
// feature files onto dense article ids.

#include "wikinav/graph.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wikinav {

// Article name <-> dense id, in first-seen order.
class NameIndex {
public:
    NameIndex() = default;
    static NameIndex from_labels(const std::vector<std::string>& labels);

    NodeId intern(std::string_view name);
    std::optional<NodeId> find(std::string_view name) const;
    const std::string& name(NodeId id) const { return names_.at(id); }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> ids_;
};

enum class ErrorPolicy { fail_fast, skip_and_report };

struct LineIssue {
    std::size_t line = 0;
    std::string message;
};

struct EdgeListResult {
    std::vector<Edge> edges;
    NameIndex names;
    std::vector<LineIssue> issues;
};

// "src_name<TAB>trg_name" per line. Blank lines and '#' comments are skipped.
// Duplicates pass through; build_graph collapses them.
EdgeListResult parse_edge_list(std::istream& in, ErrorPolicy policy = ErrorPolicy::fail_fast);
void write_edge_list(std::ostream& out, const std::vector<Edge>& edges, const NameIndex& names);

struct TransitionEntry {
    NodeId src = 0;
    NodeId trg = 0;
    std::uint64_t count = 0;
    bool operator==(const TransitionEntry&) const = default;
};

// Observed transitions restricted to graph edges, sorted by (src, trg),
// unique per pair, every count >= threshold.
struct TransitionLog {
    std::vector<TransitionEntry> entries;
    std::uint64_t threshold = 10;

    std::uint64_t total() const;
    std::optional<std::uint64_t> count(NodeId src, NodeId trg) const;
    bool operator==(const TransitionLog&) const = default;
};

// Accounting for every input row. Counts are summed transitions, rows are
// line tallies. input_count == retained_count + the three dropped_*_count.
struct ClickstreamStats {
    std::size_t lines = 0;
    std::size_t rows = 0;
    std::size_t external_rows = 0;
    std::size_t non_edge_rows = 0;
    std::size_t merged_duplicate_rows = 0;
    std::size_t below_threshold_pairs = 0;
    std::size_t retained_pairs = 0;
    std::uint64_t input_count = 0;
    std::uint64_t dropped_external_count = 0;
    std::uint64_t dropped_non_edge_count = 0;
    std::uint64_t dropped_below_threshold_count = 0;
    std::uint64_t retained_count = 0;
    std::vector<LineIssue> issues;
};

struct ClickstreamResult {
    TransitionLog log;
    ClickstreamStats stats;
};

// Tab-separated "referrer, resource, [type,] count". Rows whose referrer is
// not a known article are external traffic; rows that are not graph edges
// are dropped; duplicate pairs are summed before thresholding.
ClickstreamResult parse_clickstream(std::istream& in, const NameIndex& names, const LinkGraph& g,
                                    std::uint64_t threshold = 10,
                                    ErrorPolicy policy = ErrorPolicy::fail_fast);

// Three-column clickstream form of the log (names from the graph labels).
void write_transition_log(std::ostream& out, const TransitionLog& log, const LinkGraph& g,
                          const std::string& header = {});

enum class Region { lead, body, left_body, right_body, infobox, navbox };

const char* to_string(Region r);
std::optional<Region> parse_region(std::string_view s);

struct LinkFeatures {
    NodeId src = 0;
    NodeId trg = 0;
    std::uint64_t transitions = 0;
    double src_degree = 0, trg_degree = 0;
    double src_in_degree = 0, trg_in_degree = 0;
    double src_out_degree = 0, trg_out_degree = 0;
    double src_kcore = 0, trg_kcore = 0;
    double src_pagerank = 0, trg_pagerank = 0;
    double text_sim = 0, topic_sim = 0;
    double x_coord = 0, y_coord = 0;
    Region region = Region::body;
};

struct LinkFeatureTable {
    std::vector<LinkFeatures> rows; // sorted by (src, trg), one per link

    // Row index per graph edge id, nullopt where the table has no row.
    std::vector<std::optional<std::size_t>> rows_by_edge(const LinkGraph& g) const;
};

struct NetworkFeatures {
    DegreeVectors degree;
    CentralityVector kcore;
    CentralityVector pagerank;
};

NetworkFeatures compute_network_features(const LinkGraph& g, const PageRankOptions& pr = {});

// One row per graph edge with network features and transition counts filled;
// semantic and visual fields keep their defaults.
LinkFeatureTable table_from_graph(const LinkGraph& g, const TransitionLog& log,
                                  const NetworkFeatures& net);
void assign_network_features(LinkFeatures& row, const NetworkFeatures& net);

struct FeatureLoadOptions {
    // Take network columns from the graph. When the file has them too, every
    // disagreement is counted in the consistency report.
    bool recompute_network_features = false;
    // text_sim / topic_sim may be absent from the file (filled later from a corpus).
    bool similarities_optional = false;
    char delimiter = '\0'; // '\0' sniffs tab, comma or semicolon from the header
    double consistency_tolerance = 1e-6;
    PageRankOptions pagerank;
};

struct JoinIssue {
    std::size_t line = 0;
    std::string src;
    std::string trg;
    std::string reason;
};

struct ColumnConsistency {
    std::string column;
    std::size_t compared = 0;
    std::size_t mismatched = 0;
    double max_abs_diff = 0;
};

struct FeatureLoadReport {
    std::size_t rows_read = 0;
    std::size_t counts_from_log = 0;
    std::vector<JoinIssue> rejected;
    std::vector<ColumnConsistency> consistency;
};

struct FeatureLoadResult {
    LinkFeatureTable table;
    FeatureLoadReport report;
};

// Joins a delimited feature file (header row with the fixed column names) to
// graph edges and transition counts. Bad rows go to the report;
// a missing mandatory column throws SchemaError.
FeatureLoadResult load_feature_table(std::istream& in, const LinkGraph& g, const NameIndex& names,
                                     const TransitionLog& log, const FeatureLoadOptions& opts = {});

// Loads a feature file on its own: the link graph is the set of (src, trg)
// pairs in the file and counts come from its transitions column.
struct StandaloneFeatureFile {
    LinkGraph graph;
    NameIndex names;
    LinkFeatureTable table;
    FeatureLoadReport report;
};
StandaloneFeatureFile load_feature_file_standalone(std::istream& in, char delimiter = '\0');

void write_feature_table(std::ostream& out, const LinkFeatureTable& table, const LinkGraph& g,
                         const std::string& header = {});

inline const std::vector<std::string>& feature_columns() {
    static const std::vector<std::string> cols = {
        "src", "trg", "transitions", "src_degree", "trg_degree", "src_in_degree", "trg_in_degree",
        "src_out_degree", "trg_out_degree", "src_kcore", "trg_kcore", "src_pagerank", "trg_pagerank",
        "text_sim", "topic_sim", "x_coord", "y_coord", "region"};
    return cols;
}

} // namespace wikinav
