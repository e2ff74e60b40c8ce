#include "wikinav/pipeline.hpp"

#include "wikinav/attention.hpp"
#include "wikinav/error.hpp"
#include "wikinav/graph.hpp"
#include "wikinav/hurdle.hpp"
#include "wikinav/hyptrails.hpp"
#include "wikinav/ingest.hpp"
#include "wikinav/semantics.hpp"
#include "wikinav/wpr.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace wikinav {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Artifact names inside the output directory and the command producing each.
constexpr const char* kGraph = "graph.txt";
constexpr const char* kTransitions = "transitions.tsv";
constexpr const char* kIngestReport = "ingest_report.tsv";
constexpr const char* kFeatures = "features.tsv";
constexpr const char* kJoinReport = "join_report.tsv";
constexpr const char* kProjectionCache = "projection.bin";
constexpr const char* kSample = "sample.tsv";
constexpr const char* kManifest = "manifest.json";

const std::map<std::string, std::string>& producers() {
    static const std::map<std::string, std::string> p = {
        {kGraph, "build"}, {kTransitions, "build"}, {kFeatures, "features"}};
    return p;
}

std::string hex(const unsigned char* data, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        s += digits[data[i] >> 4];
        s += digits[data[i] & 15];
    }
    return s;
}

std::string sha256_bytes(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    return hex(md, len);
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        body(out);
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

fs::path artifact(const RunConfig& cfg, const char* name) {
    const fs::path p = cfg.out / name;
    if (!fs::exists(p)) {
        const std::string producer = producers().at(name);
        throw DependencyError(p.string() + " not found; run `wikinav " + producer + "` first", producer);
    }
    return p;
}

std::string header(const std::string& command, const RunConfig& cfg) {
    std::ostringstream h;
    h << "# wikinav " << kToolVersion << '\n';
    h << "# command: " << command << '\n';
    h << "# config_hash: " << config_hash(cfg) << '\n';
    h << "# seeds: projection=" << cfg.projection_seed << " sample=" << cfg.sample_seed << '\n';
    return h.str();
}

ErrorPolicy policy(const RunConfig& cfg) {
    return cfg.fail_fast ? ErrorPolicy::fail_fast : ErrorPolicy::skip_and_report;
}

struct Loaded {
    LinkGraph graph;
    NameIndex names;
    TransitionLog log;
};

Loaded load_graph_and_log(const RunConfig& cfg) {
    Loaded l;
    {
        auto in = open_input(artifact(cfg, kGraph));
        l.graph = read_graph_snapshot(in);
    }
    l.names = NameIndex::from_labels(l.graph.labels());
    auto in = open_input(artifact(cfg, kTransitions));
    l.log = parse_clickstream(in, l.names, l.graph, cfg.threshold, ErrorPolicy::fail_fast).log;
    return l;
}

LinkFeatureTable load_features(const RunConfig& cfg, const Loaded& l, const char* name = kFeatures) {
    auto in = open_input(artifact(cfg, name));
    auto res = load_feature_table(in, l.graph, l.names, l.log);
    if (!res.report.rejected.empty()) {
        throw MalformedInput(std::string(name) + " has " + std::to_string(res.report.rejected.size()) +
                             " rows that do not join; rerun `wikinav features`");
    }
    return std::move(res.table);
}

std::vector<HypothesisMatrix> hypotheses(const Loaded& l, const LinkFeatureTable& table) {
    const auto kc = kcore_hypothesis(l.graph, kcore(l.graph));
    const auto vis = visual_hypothesis(l.graph, table);
    const auto ts = textsim_hypothesis(l.graph, table);
    auto comb = [](std::initializer_list<HypothesisMatrix> parts) {
        const std::vector<HypothesisMatrix> v(parts);
        return combine(v);
    };
    return {kc, vis, ts, comb({ts, kc}), comb({ts, vis}), comb({kc, vis}), comb({kc, vis, ts})};
}

struct StageSpec {
    std::vector<std::pair<std::string, fs::path>> inputs; // logical name -> file
    std::vector<std::string> outputs;
    std::function<void(const RunConfig&, CommandResult&)> run;
};

void write_key_values(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& kv) {
    out << "key\tvalue\n";
    for (const auto& [k, v] : kv) out << k << '\t' << v << '\n';
}

void cmd_build(const RunConfig& cfg, CommandResult& res) {
    const std::string hdr = header("build", cfg);
    EdgeListResult el;
    {
        auto in = open_input(cfg.edges);
        el = parse_edge_list(in, policy(cfg));
    }
    const LinkGraph g = build_graph(el.edges, el.names.size(), el.names.names());
    ClickstreamResult cs;
    {
        auto in = open_input(cfg.clickstream);
        cs = parse_clickstream(in, el.names, g, cfg.threshold, policy(cfg));
    }
    write_atomic(cfg.out / kGraph, [&](std::ostream& o) { write_graph_snapshot(o, g, hdr); });
    write_atomic(cfg.out / kTransitions, [&](std::ostream& o) { write_transition_log(o, cs.log, g, hdr); });
    write_atomic(cfg.out / kIngestReport, [&](std::ostream& o) {
        const auto& s = cs.stats;
        o << hdr;
        write_key_values(o, {
                                {"articles", std::to_string(g.node_count())},
                                {"links", std::to_string(g.edge_count())},
                                {"self_loops", std::to_string(g.self_loop_count())},
                                {"duplicate_links_collapsed", std::to_string(g.duplicates_collapsed())},
                                {"edge_list_issues", std::to_string(el.issues.size())},
                                {"clickstream_rows", std::to_string(s.rows)},
                                {"external_rows", std::to_string(s.external_rows)},
                                {"non_edge_rows", std::to_string(s.non_edge_rows)},
                                {"merged_duplicate_rows", std::to_string(s.merged_duplicate_rows)},
                                {"below_threshold_pairs", std::to_string(s.below_threshold_pairs)},
                                {"retained_pairs", std::to_string(s.retained_pairs)},
                                {"input_count", std::to_string(s.input_count)},
                                {"dropped_external_count", std::to_string(s.dropped_external_count)},
                                {"dropped_non_edge_count", std::to_string(s.dropped_non_edge_count)},
                                {"dropped_below_threshold_count", std::to_string(s.dropped_below_threshold_count)},
                                {"retained_count", std::to_string(s.retained_count)},
                                {"clickstream_issues", std::to_string(s.issues.size())},
                            });
        for (const auto& i : el.issues) o << "# edges line " << i.line << ": " << i.message << '\n';
        for (const auto& i : s.issues) o << "# clickstream line " << i.line << ": " << i.message << '\n';
    });
    res.notes.push_back(std::to_string(g.node_count()) + " articles, " + std::to_string(g.edge_count()) + " links, " +
                        std::to_string(cs.log.entries.size()) + " used links");
    if (!el.issues.empty() || !cs.stats.issues.empty())
        res.notes.push_back(std::to_string(el.issues.size() + cs.stats.issues.size()) +
                            " malformed lines skipped (see ingest_report.tsv)");
}

void fill_similarities(const RunConfig& cfg, const Loaded& l, LinkFeatureTable& table, CommandResult& res) {
    DocumentCorpus corpus;
    {
        auto tokens = open_input(cfg.tokens);
        if (cfg.categories.empty()) {
            corpus = read_corpus(tokens);
        } else {
            auto cats = open_input(cfg.categories);
            corpus = read_corpus(tokens, &cats);
        }
    }
    const auto vectors = tfidf(corpus);
    const std::uint64_t hash = corpus.content_hash();
    const fs::path cache_path = cfg.out / kProjectionCache;
    std::optional<ProjectedVectors> pv;
    if (fs::exists(cache_path)) {
        std::ifstream in(cache_path, std::ios::binary);
        pv = read_projection_cache(in, cfg.projection_dim, cfg.projection_seed, hash);
    }
    if (!pv) {
        pv = project(vectors, cfg.projection_dim, cfg.projection_seed, corpus.vocabulary_size());
        write_atomic(cache_path, [&](std::ostream& o) { write_projection_cache(o, *pv, hash); });
    } else {
        res.notes.push_back("reused projection cache");
    }

    std::size_t missing = 0;
    for (auto& row : table.rows) {
        const auto a = corpus.find(l.graph.label(row.src));
        const auto b = corpus.find(l.graph.label(row.trg));
        if (a && b) {
            row.text_sim = text_similarity(*pv, *a, *b);
            row.topic_sim = topic_similarity(corpus, *a, *b);
        } else {
            row.text_sim = 0;
            row.topic_sim = 0;
            ++missing;
        }
    }
    if (missing) res.notes.push_back(std::to_string(missing) + " links lack corpus text for an endpoint; similarity 0");
}

void cmd_features(const RunConfig& cfg, CommandResult& res) {
    const std::string hdr = header("features", cfg);
    const Loaded l = load_graph_and_log(cfg);
    LinkFeatureTable table;
    FeatureLoadReport report;
    if (!cfg.features.empty()) {
        FeatureLoadOptions opts;
        opts.recompute_network_features = cfg.recompute_network_features;
        opts.similarities_optional = !cfg.tokens.empty();
        auto in = open_input(cfg.features);
        auto loaded = load_feature_table(in, l.graph, l.names, l.log, opts);
        table = std::move(loaded.table);
        report = std::move(loaded.report);
    } else {
        table = table_from_graph(l.graph, l.log, compute_network_features(l.graph));
        res.notes.push_back("no feature file: visual fields default to region body at (0, 0)");
    }
    if (!cfg.tokens.empty()) fill_similarities(cfg, l, table, res);

    write_atomic(cfg.out / kFeatures, [&](std::ostream& o) { write_feature_table(o, table, l.graph, hdr); });
    write_atomic(cfg.out / kJoinReport, [&](std::ostream& o) {
        o << hdr;
        o << "# rows_read " << report.rows_read << ", rows kept " << table.rows.size() << ", counts filled from log "
          << report.counts_from_log << '\n';
        for (const auto& c : report.consistency)
            o << "# consistency " << c.column << ": compared " << c.compared << ", mismatched " << c.mismatched
              << ", max_abs_diff " << c.max_abs_diff << '\n';
        o << "line\tsrc\ttrg\treason\n";
        for (const auto& r : report.rejected) o << r.line << '\t' << r.src << '\t' << r.trg << '\t' << r.reason << '\n';
    });
    res.notes.push_back(std::to_string(table.rows.size()) + " feature rows, " + std::to_string(report.rejected.size()) +
                        " rejected");
}

void cmd_sample(const RunConfig& cfg, CommandResult& res) {
    const std::string hdr = header("sample", cfg);
    const Loaded l = load_graph_and_log(cfg);
    const LinkFeatureTable table = load_features(cfg, l);
    std::vector<NodeId> eligible;
    for (const auto& t : l.log.entries)
        if (eligible.empty() || eligible.back() != t.src) eligible.push_back(t.src);
    if (cfg.sample_size > eligible.size()) {
        throw PreconditionError("sample size " + std::to_string(cfg.sample_size) + " exceeds the " +
                                std::to_string(eligible.size()) + " articles with at least one used out-link");
    }
    // Partial Fisher-Yates with an explicit index draw keeps the selection
    // identical across standard library implementations.
    std::mt19937_64 rng(cfg.sample_seed);
    for (std::size_t i = 0; i < cfg.sample_size; ++i) {
        const std::uint64_t span = eligible.size() - i;
        const std::size_t j = i + static_cast<std::size_t>(rng() % span);
        std::swap(eligible[i], eligible[j]);
    }
    const std::set<NodeId> chosen(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(cfg.sample_size));
    LinkFeatureTable sample;
    for (const auto& r : table.rows)
        if (chosen.count(r.src)) sample.rows.push_back(r);
    write_atomic(cfg.out / kSample, [&](std::ostream& o) { write_feature_table(o, sample, l.graph, hdr); });
    res.notes.push_back(std::to_string(chosen.size()) + " articles, " + std::to_string(sample.rows.size()) + " links");
}

void cmd_attention(const RunConfig& cfg, CommandResult& res) {
    const std::string hdr = header("attention", cfg);
    const Loaded l = load_graph_and_log(cfg);
    const auto hist = transition_histogram(l.log);
    const auto [wiki, trans] = outdegree_comparison(l.graph, l.log);
    const auto gs = article_gini(l.graph, l.log);
    write_atomic(cfg.out / "attention_transitions.tsv", [&](std::ostream& o) { write_transition_histogram(o, hist, hdr); });
    write_atomic(cfg.out / "attention_outdegree.tsv", [&](std::ostream& o) { write_degree_comparison(o, wiki, trans, hdr); });
    write_atomic(cfg.out / "attention_gini.tsv", [&](std::ostream& o) { write_gini_histogram(o, gs, hdr); });

    std::vector<std::uint64_t> counts;
    for (const auto& t : l.log.entries) counts.push_back(t.count);
    write_atomic(cfg.out / "attention_fits.tsv", [&](std::ostream& o) {
        try {
            const auto report = fit_distributions(counts, l.log.threshold);
            write_fit_report(o, "transitions per used link", report, hdr);
            if (report.winner) res.notes.push_back(std::string("best family: ") + to_string(*report.winner));
        } catch (const InsufficientData& e) {
            o << hdr << "# not fitted: " << e.what() << '\n';
            res.notes.push_back(std::string("distribution fit skipped: ") + e.what());
        } catch (const DegenerateInput& e) {
            o << hdr << "# not fitted: " << e.what() << '\n';
            res.notes.push_back(std::string("distribution fit skipped: ") + e.what());
        }
    });
}

void cmd_hurdle(const RunConfig& cfg, CommandResult& res) {
    const std::string hdr = header("hurdle", cfg);
    const Loaded l = load_graph_and_log(cfg);
    const LinkFeatureTable table = load_features(cfg, l);
    const auto battery = default_feature_battery();
    const auto reports = run_feature_battery(table, cfg.threshold, battery, cfg.threads);
    write_atomic(cfg.out / "hurdle.tsv", [&](std::ostream& o) { write_hurdle_report(o, reports, cfg.threshold, hdr); });
    std::size_t failed = 0;
    for (const auto& r : reports) failed += !r.binomial.ok + !r.ztnb.ok;
    if (failed) res.notes.push_back(std::to_string(failed) + " stage fits failed (see status column)");
}

void cmd_hyptrails(const RunConfig& cfg, CommandResult& res) {
    const std::string hdr = header("hyptrails", cfg);
    const Loaded l = load_graph_and_log(cfg);
    const LinkFeatureTable table = load_features(cfg, l);
    const auto base = structural_hypothesis(l.graph);
    std::vector<HypothesisMatrix> hyps{base};
    for (auto& h : hypotheses(l, table)) hyps.push_back(std::move(h));
    const auto kappas = cfg.kappas.empty() ? default_kappa_grid(l.graph) : cfg.kappas;
    const auto counts = edge_counts(l.graph, l.log);
    const auto curves = bayes_factor_curve(l.graph, hyps, base, counts, kappas, cfg.threads);
    write_atomic(cfg.out / "hyptrails.tsv", [&](std::ostream& o) { write_evidence_curves(o, curves, hdr); });
    if (hyps[3].missing_filled) {
        res.notes.push_back(std::to_string(hyps[3].missing_filled) + " links without text similarity filled with 0");
    }
}

void cmd_pagerank(const RunConfig& cfg, CommandResult&) {
    const std::string hdr = header("pagerank", cfg);
    const Loaded l = load_graph_and_log(cfg);
    const LinkFeatureTable table = load_features(cfg, l);
    const auto hyps = hypotheses(l, table);
    EvaluationOptions opts;
    opts.alphas = cfg.alphas;
    opts.restrict_to_viewed = cfg.restrict_to_viewed;
    opts.threads = cfg.threads;
    const auto evals = evaluate_all(l.graph, hyps, l.log, opts);
    write_atomic(cfg.out / "pagerank.tsv", [&](std::ostream& o) { write_rank_evaluations(o, evals, hdr); });
}

StageSpec stage_for(const std::string& command, const RunConfig& cfg) {
    const fs::path graph = cfg.out / kGraph, trans = cfg.out / kTransitions, feats = cfg.out / kFeatures;
    auto upstream = [&](bool with_features) {
        std::vector<std::pair<std::string, fs::path>> in{{kGraph, graph}, {kTransitions, trans}};
        if (with_features) in.emplace_back(kFeatures, feats);
        return in;
    };
    if (command == "build")
        return {{{"edges", cfg.edges}, {"clickstream", cfg.clickstream}}, {kGraph, kTransitions, kIngestReport}, cmd_build};
    if (command == "features") {
        auto in = upstream(false);
        if (!cfg.features.empty()) in.emplace_back("features", cfg.features);
        if (!cfg.tokens.empty()) in.emplace_back("tokens", cfg.tokens);
        if (!cfg.categories.empty()) in.emplace_back("categories", cfg.categories);
        return {in, {kFeatures, kJoinReport}, cmd_features};
    }
    if (command == "sample") return {upstream(true), {kSample}, cmd_sample};
    if (command == "attention")
        return {upstream(false),
                {"attention_transitions.tsv", "attention_outdegree.tsv", "attention_gini.tsv", "attention_fits.tsv"},
                cmd_attention};
    if (command == "hurdle") return {upstream(true), {"hurdle.tsv"}, cmd_hurdle};
    if (command == "hyptrails") return {upstream(true), {"hyptrails.tsv"}, cmd_hyptrails};
    if (command == "pagerank") return {upstream(true), {"pagerank.tsv"}, cmd_pagerank};
    throw PreconditionError("unknown command '" + command + "'");
}

json read_manifest(const fs::path& path) {
    if (!fs::exists(path)) return json::object();
    std::ifstream in(path);
    try {
        json m = json::parse(in);
        return m.is_object() ? m : json::object();
    } catch (const json::exception&) {
        return json::object(); // unreadable manifest: treat every command as stale
    }
}

} // namespace

std::string sha256_file(const fs::path& path) {
    auto in = open_input(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_bytes(buf.str());
}

const std::vector<std::string>& pipeline_commands() {
    static const std::vector<std::string> c = {"build", "features", "sample", "attention", "hurdle", "hyptrails", "pagerank"};
    return c;
}

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"config must be a JSON object"});

    RunConfig cfg;
    std::vector<std::string> problems;
    auto get = [&](const json& obj, const std::string& prefix, const std::string& key, auto& target) {
        if (!obj.contains(key)) return;
        try {
            obj.at(key).get_to(target);
        } catch (const json::exception&) {
            problems.push_back("'" + prefix + key + "' has the wrong type");
        }
    };
    auto path = [&](const json& obj, const std::string& prefix, const std::string& key, fs::path& target) {
        std::string s;
        if (!obj.contains(key)) return;
        if (!obj.at(key).is_string()) {
            problems.push_back("'" + prefix + key + "' must be a path string");
            return;
        }
        s = obj.at(key).get<std::string>();
        target = s.empty() ? fs::path() : resolve(base_dir, s);
    };
    auto check_keys = [&](const json& obj, const std::string& prefix, std::initializer_list<const char*> known) {
        for (const auto& [k, v] : obj.items()) {
            if (std::none_of(known.begin(), known.end(), [&](const char* n) { return k == n; }))
                problems.push_back("unknown key '" + prefix + k + "'");
        }
    };

    check_keys(j, "",
               {"inputs", "out", "threshold", "alphas", "kappas", "projection", "sample", "restrict_to_viewed",
                "fail_fast", "recompute_network_features", "threads"});
    if (j.contains("inputs")) {
        const json& in = j.at("inputs");
        if (!in.is_object()) {
            problems.push_back("'inputs' must be an object");
        } else {
            check_keys(in, "inputs.", {"edges", "clickstream", "features", "tokens", "categories"});
            path(in, "inputs.", "edges", cfg.edges);
            path(in, "inputs.", "clickstream", cfg.clickstream);
            path(in, "inputs.", "features", cfg.features);
            path(in, "inputs.", "tokens", cfg.tokens);
            path(in, "inputs.", "categories", cfg.categories);
        }
    }
    path(j, "", "out", cfg.out);
    get(j, "", "threshold", cfg.threshold);
    get(j, "", "alphas", cfg.alphas);
    get(j, "", "kappas", cfg.kappas);
    get(j, "", "restrict_to_viewed", cfg.restrict_to_viewed);
    get(j, "", "fail_fast", cfg.fail_fast);
    get(j, "", "recompute_network_features", cfg.recompute_network_features);
    get(j, "", "threads", cfg.threads);
    for (const char* section : {"projection", "sample"}) {
        if (!j.contains(section)) continue;
        const json& s = j.at(section);
        const std::string prefix = std::string(section) + ".";
        if (!s.is_object()) {
            problems.push_back("'" + std::string(section) + "' must be an object");
            continue;
        }
        check_keys(s, prefix, {std::string(section) == "projection" ? "dim" : "size", "seed"});
        if (std::string(section) == "projection") {
            get(s, prefix, "dim", cfg.projection_dim);
            get(s, prefix, "seed", cfg.projection_seed);
        } else {
            get(s, prefix, "size", cfg.sample_size);
            get(s, prefix, "seed", cfg.sample_seed);
        }
    }
    if (!problems.empty()) throw ConfigError(problems);
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file " + path.string()});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

std::vector<std::string> validate(const RunConfig& cfg, const std::string& command) {
    std::vector<std::string> p;
    const auto& cmds = pipeline_commands();
    if (std::find(cmds.begin(), cmds.end(), command) == cmds.end()) p.push_back("unknown command '" + command + "'");
    auto need = [&](const fs::path& path, const char* what) {
        if (path.empty()) p.push_back(std::string(what) + " is required for `" + command + "`");
    };
    if (command == "build") {
        need(cfg.edges, "inputs.edges");
        need(cfg.clickstream, "inputs.clickstream");
    }
    const std::pair<const fs::path*, const char*> paths[] = {{&cfg.edges, "inputs.edges"},
                                                             {&cfg.clickstream, "inputs.clickstream"},
                                                             {&cfg.features, "inputs.features"},
                                                             {&cfg.tokens, "inputs.tokens"},
                                                             {&cfg.categories, "inputs.categories"}};
    for (const auto& [path, name] : paths)
        if (!path->empty() && !fs::is_regular_file(*path))
            p.push_back(std::string(name) + ": file not found: " + path->string());
    if (!cfg.categories.empty() && cfg.tokens.empty()) p.push_back("inputs.categories requires inputs.tokens");
    if (cfg.out.empty()) p.push_back("out must name an output directory");
    if (cfg.threshold < 1) p.push_back("threshold must be >= 1");
    if (cfg.alphas.empty()) p.push_back("alphas must not be empty");
    for (double a : cfg.alphas)
        if (!(a > 0 && a < 1)) p.push_back("alpha " + std::to_string(a) + " is outside (0, 1)");
    for (double k : cfg.kappas)
        if (!(k > 0) || !std::isfinite(k)) p.push_back("kappa " + std::to_string(k) + " must be positive");
    if (cfg.projection_dim < 1) p.push_back("projection.dim must be >= 1");
    if (cfg.sample_size < 1) p.push_back("sample.size must be >= 1");
    if (cfg.threads < 1) p.push_back("threads must be >= 1");
    return p;
}

std::string config_hash(const RunConfig& cfg) {
    const json j = {{"threshold", cfg.threshold},
                    {"alphas", cfg.alphas},
                    {"kappas", cfg.kappas},
                    {"projection", {{"dim", cfg.projection_dim}, {"seed", cfg.projection_seed}}},
                    {"sample", {{"size", cfg.sample_size}, {"seed", cfg.sample_seed}}},
                    {"restrict_to_viewed", cfg.restrict_to_viewed},
                    {"fail_fast", cfg.fail_fast},
                    {"recompute_network_features", cfg.recompute_network_features}};
    return sha256_bytes(j.dump()).substr(0, 16);
}

CommandResult run_command(const std::string& command, const RunConfig& cfg) {
    if (auto problems = validate(cfg, command); !problems.empty()) throw ConfigError(problems);
    const StageSpec stage = stage_for(command, cfg);
    fs::create_directories(cfg.out);

    json inputs = json::object();
    for (const auto& [name, path] : stage.inputs) {
        if (!fs::exists(path)) {
            const auto it = producers().find(name);
            if (it != producers().end())
                throw DependencyError(path.string() + " not found; run `wikinav " + it->second + "` first", it->second);
            throw Error("input " + name + " not found: " + path.string());
        }
        inputs[name] = sha256_file(path);
    }

    CommandResult res;
    res.command = command;
    for (const auto& o : stage.outputs) res.outputs.push_back(cfg.out / o);

    const fs::path manifest_path = cfg.out / kManifest;
    json manifest = read_manifest(manifest_path);
    const std::string hash = config_hash(cfg);
    if (manifest.contains("commands") && manifest["commands"].contains(command)) {
        const json& prev = manifest["commands"][command];
        bool hit = prev.value("config_hash", "") == hash && prev.value("inputs", json::object()) == inputs &&
                   prev.value("tool_version", "") == kToolVersion;
        const json outs = prev.value("outputs", json::object());
        for (const auto& o : stage.outputs) {
            if (!hit) break;
            const fs::path p = cfg.out / o;
            hit = outs.contains(o) && fs::exists(p) && outs[o] == sha256_file(p);
        }
        if (hit) {
            res.cache_hit = true;
            res.notes.push_back("cache hit: inputs and config unchanged");
            return res;
        }
    }

    stage.run(cfg, res);

    json outputs = json::object();
    for (const auto& o : stage.outputs) outputs[o] = sha256_file(cfg.out / o);
    manifest["tool_version"] = kToolVersion;
    manifest["commands"][command] = {
        {"tool_version", kToolVersion}, {"config_hash", hash}, {"inputs", inputs}, {"outputs", outputs}};
    write_atomic(manifest_path, [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
    return res;
}

} // namespace wikinav
