#include "wikinav/ingest.hpp"

#include "textio.hpp"
#include "wikinav/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace wikinav {

using textio::strip_cr;

NameIndex NameIndex::from_labels(const std::vector<std::string>& labels) {
    NameIndex idx;
    for (const auto& l : labels) idx.intern(l);
    return idx;
}

NodeId NameIndex::intern(std::string_view name) {
    const std::string key(name);
    auto [it, inserted] = ids_.try_emplace(key, static_cast<NodeId>(names_.size()));
    if (inserted) names_.push_back(key);
    return it->second;
}

std::optional<NodeId> NameIndex::find(std::string_view name) const {
    const auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

namespace {

void report(ErrorPolicy policy, std::vector<LineIssue>& issues, std::size_t line, std::string msg) {
    if (policy == ErrorPolicy::fail_fast) throw MalformedInput(msg, line);
    issues.push_back({line, std::move(msg)});
}

} // namespace

EdgeListResult parse_edge_list(std::istream& in, ErrorPolicy policy) {
    EdgeListResult res;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = strip_cr(raw);
        if (textio::is_skippable(line)) continue;
        const auto fields = textio::split(line, '\t');
        if (fields.size() != 2) {
            report(policy, res.issues, line_no, "expected 2 tab-separated columns, got " + std::to_string(fields.size()));
            continue;
        }
        if (fields[0].empty() || fields[1].empty()) {
            report(policy, res.issues, line_no, "empty article name");
            continue;
        }
        const NodeId s = res.names.intern(fields[0]);
        const NodeId t = res.names.intern(fields[1]);
        res.edges.push_back({s, t});
    }
    return res;
}

void write_edge_list(std::ostream& out, const std::vector<Edge>& edges, const NameIndex& names) {
    for (const auto& e : edges) out << names.name(e.src) << '\t' << names.name(e.trg) << '\n';
}

std::uint64_t TransitionLog::total() const {
    std::uint64_t t = 0;
    for (const auto& e : entries) t += e.count;
    return t;
}

std::optional<std::uint64_t> TransitionLog::count(NodeId src, NodeId trg) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), Edge{src, trg},
                                     [](const TransitionEntry& a, const Edge& b) {
                                         return std::pair(a.src, a.trg) < std::pair(b.src, b.trg);
                                     });
    if (it == entries.end() || it->src != src || it->trg != trg) return std::nullopt;
    return it->count;
}

ClickstreamResult parse_clickstream(std::istream& in, const NameIndex& names, const LinkGraph& g,
                                    std::uint64_t threshold, ErrorPolicy policy) {
    ClickstreamResult res;
    auto& st = res.stats;
    std::map<std::pair<NodeId, NodeId>, std::uint64_t> sums;

    std::string raw;
    while (std::getline(in, raw)) {
        ++st.lines;
        const auto line = strip_cr(raw);
        if (textio::is_skippable(line)) continue;
        const auto fields = textio::split(line, '\t');
        if (fields.size() != 3 && fields.size() != 4) {
            report(policy, st.issues, st.lines,
                   "expected 3 or 4 tab-separated columns, got " + std::to_string(fields.size()));
            continue;
        }
        const auto count = textio::parse_u64(fields.back());
        if (!count) {
            report(policy, st.issues, st.lines, "non-numeric count '" + std::string(fields.back()) + "'");
            continue;
        }
        ++st.rows;
        st.input_count += *count;

        const auto src = names.find(fields[0]);
        if (!src) {
            ++st.external_rows;
            st.dropped_external_count += *count;
            continue;
        }
        const auto trg = names.find(fields[1]);
        if (!trg || !g.edge_id(*src, *trg)) {
            ++st.non_edge_rows;
            st.dropped_non_edge_count += *count;
            continue;
        }
        auto [it, inserted] = sums.try_emplace({*src, *trg}, 0);
        if (!inserted) ++st.merged_duplicate_rows;
        it->second += *count;
    }

    res.log.threshold = threshold;
    for (const auto& [pair, total] : sums) {
        if (total < threshold) {
            ++st.below_threshold_pairs;
            st.dropped_below_threshold_count += total;
            continue;
        }
        res.log.entries.push_back({pair.first, pair.second, total});
        ++st.retained_pairs;
        st.retained_count += total;
    }
    return res;
}

void write_transition_log(std::ostream& out, const TransitionLog& log, const LinkGraph& g,
                          const std::string& header) {
    out << header;
    out << "# referrer\tresource\tcount (threshold " << log.threshold << ")\n";
    for (const auto& e : log.entries)
        out << g.label(e.src) << '\t' << g.label(e.trg) << '\t' << e.count << '\n';
}

const char* to_string(Region r) {
    switch (r) {
    case Region::lead: return "lead";
    case Region::body: return "body";
    case Region::left_body: return "left-body";
    case Region::right_body: return "right-body";
    case Region::infobox: return "infobox";
    case Region::navbox: return "navbox";
    }
    return "?";
}

std::optional<Region> parse_region(std::string_view s) {
    static constexpr std::array<std::pair<std::string_view, Region>, 8> table{{
        {"lead", Region::lead},
        {"body", Region::body},
        {"left-body", Region::left_body},
        {"left_body", Region::left_body},
        {"right-body", Region::right_body},
        {"right_body", Region::right_body},
        {"infobox", Region::infobox},
        {"navbox", Region::navbox},
    }};
    for (const auto& [name, r] : table)
        if (name == s) return r;
    return std::nullopt;
}

std::vector<std::optional<std::size_t>> LinkFeatureTable::rows_by_edge(const LinkGraph& g) const {
    std::vector<std::optional<std::size_t>> out(g.edge_count());
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (auto id = g.edge_id(rows[r].src, rows[r].trg)) out[*id] = r;
    return out;
}

NetworkFeatures compute_network_features(const LinkGraph& g, const PageRankOptions& pr) {
    return {degrees(g), kcore(g), pagerank(g, pr)};
}

void assign_network_features(LinkFeatures& row, const NetworkFeatures& net) {
    const auto s = row.src, t = row.trg;
    row.src_degree = net.degree.degree[s];
    row.trg_degree = net.degree.degree[t];
    row.src_in_degree = net.degree.in_degree[s];
    row.trg_in_degree = net.degree.in_degree[t];
    row.src_out_degree = net.degree.out_degree[s];
    row.trg_out_degree = net.degree.out_degree[t];
    row.src_kcore = net.kcore[s];
    row.trg_kcore = net.kcore[t];
    row.src_pagerank = net.pagerank[s];
    row.trg_pagerank = net.pagerank[t];
}

LinkFeatureTable table_from_graph(const LinkGraph& g, const TransitionLog& log, const NetworkFeatures& net) {
    LinkFeatureTable table;
    table.rows.reserve(g.edge_count());
    for (const auto& e : g.edges()) {
        LinkFeatures row;
        row.src = e.src;
        row.trg = e.trg;
        row.transitions = log.count(e.src, e.trg).value_or(0);
        assign_network_features(row, net);
        table.rows.push_back(row);
    }
    return table;
}

namespace {

struct NetworkColumn {
    const char* name;
    double LinkFeatures::*field;
};

constexpr std::array<NetworkColumn, 10> kNetworkColumns{{
    {"src_degree", &LinkFeatures::src_degree},
    {"trg_degree", &LinkFeatures::trg_degree},
    {"src_in_degree", &LinkFeatures::src_in_degree},
    {"trg_in_degree", &LinkFeatures::trg_in_degree},
    {"src_out_degree", &LinkFeatures::src_out_degree},
    {"trg_out_degree", &LinkFeatures::trg_out_degree},
    {"src_kcore", &LinkFeatures::src_kcore},
    {"trg_kcore", &LinkFeatures::trg_kcore},
    {"src_pagerank", &LinkFeatures::src_pagerank},
    {"trg_pagerank", &LinkFeatures::trg_pagerank},
}};

char sniff_delimiter(std::string_view header) {
    char best = '\t';
    std::ptrdiff_t best_count = 0;
    for (char c : {'\t', ',', ';'}) {
        const auto n = std::count(header.begin(), header.end(), c);
        if (n > best_count) {
            best = c;
            best_count = n;
        }
    }
    return best;
}

bool close_enough(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

struct HeaderInfo {
    char delim = '\t';
    std::unordered_map<std::string, std::size_t> col;
    std::size_t width = 0;
    std::size_t line_no = 0;
};

HeaderInfo read_header(std::istream& in, char delim_hint) {
    HeaderInfo h;
    std::string raw;
    while (std::getline(in, raw)) {
        ++h.line_no;
        const auto line = strip_cr(raw);
        if (textio::is_skippable(line)) continue;
        h.delim = delim_hint ? delim_hint : sniff_delimiter(line);
        const auto names = textio::split_quoted(line, h.delim);
        h.width = names.size();
        for (std::size_t i = 0; i < names.size(); ++i) h.col.emplace(names[i], i);
        return h;
    }
    throw SchemaError("feature file has no header row");
}

} // namespace

FeatureLoadResult load_feature_table(std::istream& in, const LinkGraph& g, const NameIndex& names,
                                     const TransitionLog& log, const FeatureLoadOptions& opts) {
    HeaderInfo h = read_header(in, opts.delimiter);

    std::vector<std::string> required = {"src", "trg", "x_coord", "y_coord", "region"};
    if (!opts.similarities_optional) {
        required.push_back("text_sim");
        required.push_back("topic_sim");
    }
    if (!opts.recompute_network_features)
        for (const auto& c : kNetworkColumns) required.push_back(c.name);
    std::vector<std::string> missing;
    for (const auto& r : required)
        if (!h.col.count(r)) missing.push_back(r);
    if (!missing.empty()) {
        std::string msg = "feature file is missing mandatory column(s):";
        for (const auto& m : missing) msg += " " + m;
        throw SchemaError(msg);
    }
    auto column = [&](const char* name) -> std::optional<std::size_t> {
        const auto it = h.col.find(name);
        if (it == h.col.end()) return std::nullopt;
        return it->second;
    };

    std::optional<NetworkFeatures> net;
    if (opts.recompute_network_features) net = compute_network_features(g, opts.pagerank);

    FeatureLoadResult res;
    auto& rep = res.report;
    std::vector<ColumnConsistency> consistency;
    if (net) {
        for (const auto& c : kNetworkColumns)
            if (column(c.name)) consistency.push_back({c.name, 0, 0, 0.0});
    }

    std::unordered_set<std::size_t> seen_edges;
    const auto col_src = *column("src"), col_trg = *column("trg");
    const auto col_transitions = column("transitions");
    const auto col_text = column("text_sim"), col_topic = column("topic_sim");
    const auto col_x = *column("x_coord"), col_y = *column("y_coord"), col_region = *column("region");

    std::string raw;
    std::size_t line_no = h.line_no;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = strip_cr(raw);
        if (textio::is_skippable(line)) continue;
        ++rep.rows_read;
        const auto f = textio::split_quoted(line, h.delim);
        auto reject = [&](std::string reason) {
            rep.rejected.push_back({line_no, f.size() > col_src ? f[col_src] : "",
                                    f.size() > col_trg ? f[col_trg] : "", std::move(reason)});
        };
        if (f.size() != h.width) {
            reject("expected " + std::to_string(h.width) + " fields, got " + std::to_string(f.size()));
            continue;
        }
        const auto s = names.find(f[col_src]);
        const auto t = names.find(f[col_trg]);
        if (!s || !t) {
            reject("unknown article");
            continue;
        }
        const auto eid = g.edge_id(*s, *t);
        if (!eid) {
            reject("not an edge of the link graph");
            continue;
        }
        if (!seen_edges.insert(*eid).second) {
            reject("duplicate row for link (first occurrence kept)");
            continue;
        }

        LinkFeatures row;
        row.src = *s;
        row.trg = *t;
        const auto region = parse_region(f[col_region]);
        if (!region) throw SchemaError("line " + std::to_string(line_no) + ": unknown region label '" + f[col_region] + "'");
        row.region = *region;

        bool ok = true;
        auto number = [&](std::size_t idx, const char* name) -> double {
            const auto v = textio::parse_double(f[idx]);
            if (!v || !std::isfinite(*v)) {
                if (ok) reject(std::string("non-numeric ") + name);
                ok = false;
                return 0.0;
            }
            return *v;
        };
        row.x_coord = number(col_x, "x_coord");
        row.y_coord = number(col_y, "y_coord");
        if (col_text) row.text_sim = number(*col_text, "text_sim");
        if (col_topic) row.topic_sim = number(*col_topic, "topic_sim");
        if (ok && (row.text_sim < 0 || row.text_sim > 1 || row.topic_sim < 0 || row.topic_sim > 1)) {
            reject("similarity outside [0,1]");
            ok = false;
        }
        if (col_transitions) {
            const auto c = textio::parse_count(f[*col_transitions]);
            if (!c && ok) {
                reject("bad transitions count");
                ok = false;
            }
            row.transitions = c.value_or(0);
        } else if (auto c = log.count(*s, *t)) {
            row.transitions = *c;
            ++rep.counts_from_log;
        }
        if (net) {
            assign_network_features(row, *net);
            for (auto& cc : consistency) {
                const auto idx = *column(cc.column.c_str());
                const auto file_value = textio::parse_double(f[idx]);
                const auto field = std::find_if(kNetworkColumns.begin(), kNetworkColumns.end(),
                                                [&](const NetworkColumn& c) { return cc.column == c.name; })->field;
                ++cc.compared;
                const double ours = row.*field;
                if (!file_value || !close_enough(*file_value, ours, opts.consistency_tolerance)) {
                    ++cc.mismatched;
                    if (file_value) cc.max_abs_diff = std::max(cc.max_abs_diff, std::abs(*file_value - ours));
                }
            }
        } else {
            for (const auto& c : kNetworkColumns) row.*(c.field) = number(*column(c.name), c.name);
        }
        if (!ok) continue;
        res.table.rows.push_back(row);
    }
    std::sort(res.table.rows.begin(), res.table.rows.end(), [](const LinkFeatures& a, const LinkFeatures& b) {
        return std::pair(a.src, a.trg) < std::pair(b.src, b.trg);
    });
    rep.consistency = std::move(consistency);
    return res;
}

StandaloneFeatureFile load_feature_file_standalone(std::istream& in, char delimiter) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    StandaloneFeatureFile out;
    std::vector<Edge> edges;
    {
        std::istringstream pass(content);
        HeaderInfo h = read_header(pass, delimiter);
        delimiter = h.delim;
        if (!h.col.count("src") || !h.col.count("trg"))
            throw SchemaError("feature file is missing mandatory column(s): src trg");
        const auto cs = h.col.at("src"), ct = h.col.at("trg");
        std::string raw;
        while (std::getline(pass, raw)) {
            const auto line = strip_cr(raw);
            if (textio::is_skippable(line)) continue;
            const auto f = textio::split_quoted(line, h.delim);
            if (f.size() != h.width) continue; // reported by the second pass
            const NodeId s = out.names.intern(f[cs]);
            const NodeId t = out.names.intern(f[ct]);
            edges.push_back({s, t});
        }
    }
    out.graph = LinkGraph::build(out.names.size(), edges, out.names.names());
    std::istringstream pass(content);
    FeatureLoadOptions opts;
    opts.delimiter = delimiter;
    auto loaded = load_feature_table(pass, out.graph, out.names, TransitionLog{}, opts);
    out.table = std::move(loaded.table);
    out.report = std::move(loaded.report);
    return out;
}

void write_feature_table(std::ostream& out, const LinkFeatureTable& table, const LinkGraph& g,
                         const std::string& header) {
    using textio::format_double;
    out << header;
    const auto& cols = feature_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "\t" : "") << cols[i];
    out << '\n';
    for (const auto& r : table.rows) {
        out << g.label(r.src) << '\t' << g.label(r.trg) << '\t' << r.transitions;
        for (double v : {r.src_degree, r.trg_degree, r.src_in_degree, r.trg_in_degree, r.src_out_degree,
                         r.trg_out_degree, r.src_kcore, r.trg_kcore, r.src_pagerank, r.trg_pagerank, r.text_sim,
                         r.topic_sim, r.x_coord, r.y_coord})
            out << '\t' << format_double(v);
        out << '\t' << to_string(r.region) << '\n';
    }
}

} // namespace wikinav
