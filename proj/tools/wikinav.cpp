#include "wikinav/error.hpp"
#include "wikinav/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> threshold;
    bool fail_fast = false;
    bool recompute = false;
    std::string edges, clickstream, features, tokens, categories;
};

wikinav::RunConfig resolve(const Overrides& o) {
    wikinav::RunConfig cfg = o.config.empty() ? wikinav::RunConfig{} : wikinav::load_config(o.config);
    if (!o.out.empty()) cfg.out = o.out;
    if (o.threads) cfg.threads = *o.threads;
    if (o.seed) {
        cfg.projection_seed = *o.seed;
        cfg.sample_seed = *o.seed;
    }
    if (o.threshold) cfg.threshold = *o.threshold;
    if (o.fail_fast) cfg.fail_fast = true;
    if (o.recompute) cfg.recompute_network_features = true;
    if (!o.edges.empty()) cfg.edges = o.edges;
    if (!o.clickstream.empty()) cfg.clickstream = o.clickstream;
    if (!o.features.empty()) cfg.features = o.features;
    if (!o.tokens.empty()) cfg.tokens = o.tokens;
    if (!o.categories.empty()) cfg.categories = o.categories;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link success analysis over a link graph and clickstream transitions"};
    app.set_version_flag("--version", std::string(wikinav::kToolVersion));
    app.require_subcommand(1);

    Overrides o;
    app.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "Output directory");
    app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "Seed for projection and sampling");
    app.add_option("--threshold", o.threshold, "Minimum transition count per link");
    app.add_flag("--fail-fast", o.fail_fast, "Stop at the first malformed input line");
    app.add_flag("--recompute-network-features", o.recompute, "Recompute network columns from the graph");
    app.add_option("--edges", o.edges, "Edge list (src<TAB>trg)");
    app.add_option("--clickstream", o.clickstream, "Clickstream (referrer<TAB>resource<TAB>[type<TAB>]count)");
    app.add_option("--features", o.features, "Precomputed link feature file");
    app.add_option("--tokens", o.tokens, "Article text corpus (name<TAB>text...)");
    app.add_option("--categories", o.categories, "Article categories (name<TAB>category...)");

    const std::pair<const char*, const char*> commands[] = {
        {"build", "Parse inputs into the graph and transition log"},
        {"features", "Assemble the link feature table"},
        {"sample", "Seeded sample of source articles with all their links"},
        {"attention", "Transition histograms, out-degree comparison, Gini, distribution fits"},
        {"hurdle", "Per-feature hurdle regressions with likelihood-ratio tests"},
        {"hyptrails", "Bayes factors of navigation hypotheses over a kappa grid"},
        {"pagerank", "Hypothesis-weighted PageRank against observed views"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const auto cfg = resolve(o);
        const auto result = wikinav::run_command(command, cfg);
        std::cout << command << ": " << (result.cache_hit ? "cache hit" : "done") << '\n';
        for (const auto& n : result.notes) std::cout << "  " << n << '\n';
        for (const auto& p : result.outputs) std::cout << "  wrote " << p.string() << '\n';
        return 0;
    } catch (const wikinav::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const wikinav::DependencyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
