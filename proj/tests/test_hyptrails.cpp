#include "support.hpp"
#include "wikinav/error.hpp"
#include "wikinav/hyptrails.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace wikinav;

namespace {

// Sequential predictive product: observation k of category j has probability
// (alpha_j + seen_j) / (A + seen).
double polya_urn(const LinkGraph& g, const std::vector<double>& alpha, const std::vector<std::vector<std::size_t>>& draws) {
    double lp = 0;
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const auto out = g.out_neighbors(i);
        if (out.empty()) continue;
        std::vector<double> a;
        for (auto j : out) a.push_back(alpha[*g.edge_id(i, j)]);
        double total = 0;
        for (double v : a) total += v;
        for (std::size_t k : draws[i]) {
            lp += std::log(a[k] / total);
            a[k] += 1;
            total += 1;
        }
    }
    return lp;
}

std::vector<double> draws_to_counts(const LinkGraph& g, const std::vector<std::vector<std::size_t>>& draws) {
    std::vector<double> c(g.edge_count(), 0);
    for (NodeId i = 0; i < g.node_count(); ++i)
        for (std::size_t k : draws[i]) c[*g.edge_id(i, g.out_neighbors(i)[k])] += 1;
    return c;
}

LinkFeatureTable table_with(const LinkGraph& g, std::vector<Region> regions, std::vector<double> sims) {
    LinkFeatureTable t;
    const auto e = g.edges();
    for (std::size_t k = 0; k < e.size(); ++k) {
        LinkFeatures r;
        r.src = e[k].src;
        r.trg = e[k].trg;
        r.region = regions[k];
        r.text_sim = sims[k];
        t.rows.push_back(r);
    }
    return t;
}

LinkGraph toy() { return build_graph(std::vector<Edge>{{0, 1}, {0, 2}, {1, 0}, {1, 2}, {1, 3}, {2, 3}}, 4); }

} // namespace

TEST_CASE("structural and kcore hypotheses") {
    const auto g = toy();
    const auto s = structural_hypothesis(g);
    CHECK(s.beliefs == std::vector<double>(6, 1.0));
    CHECK(s.graph_fingerprint == g.fingerprint());
    CentralityVector k;
    k.values = {4, 1, 0, 9};
    const auto h = kcore_hypothesis(g, k);
    CHECK(h.smoothed);
    // edges (0,1) (0,2) (1,0) (1,2) (1,3) (2,3)
    CHECK(h.beliefs == std::vector<double>{2.0, 2.0, 1.5, 2.0, 1 + 1.0 / 3, 1 + 1.0 / 3});
}

TEST_CASE("text and visual hypotheses") {
    const auto g = toy();
    const std::vector<double> sims{0, 1, 0.25, std::nan(""), 0.5, 0.75};
    const auto t = textsim_hypothesis(g, sims);
    CHECK(t.beliefs == std::vector<double>{1, 2, 1.25, 1, 1.5, 1.75});
    CHECK(t.missing_filled == 1);
    const auto table = table_with(
        g, {Region::navbox, Region::lead, Region::left_body, Region::infobox, Region::right_body, Region::body},
        {0, 1, 0.25, 0, 0.5, 0.75});
    CHECK(textsim_hypothesis(g, table).beliefs == std::vector<double>{1, 2, 1.25, 1, 1.5, 1.75});
    CHECK(visual_hypothesis(g, table).beliefs == std::vector<double>{1, 2, 2, 2, 1, 1});

    auto partial = table;
    partial.rows.erase(partial.rows.begin() + 1);
    const auto v = visual_hypothesis(g, partial);
    CHECK(v.missing_filled == 1);
    CHECK(v.beliefs[1] == 1);

    // all body: visual equals structural after row normalization
    const auto body = table_with(g, std::vector<Region>(6, Region::body), std::vector<double>(6, 0));
    CHECK(elicit_prior(visual_hypothesis(g, body), g, 3.0) == elicit_prior(structural_hypothesis(g), g, 3.0));
}

TEST_CASE("combine") {
    const auto g = toy();
    const auto s = structural_hypothesis(g);
    CentralityVector k;
    k.values = {4, 1, 0, 9};
    const auto kc = kcore_hypothesis(g, k);
    const std::vector<HypothesisMatrix> pair{kc, s};
    const auto c = combine(pair);
    CHECK(c.name == kc.name + "+" + s.name);
    for (std::size_t e = 0; e < 6; ++e) CHECK(c.beliefs[e] == kc.beliefs[e] + 1);
    const std::vector<HypothesisMatrix> twice{s, s};
    const auto ss = elicit_prior(combine(twice), g, 5.0);
    const auto s1 = elicit_prior(s, g, 5.0);
    for (std::size_t e = 0; e < 6; ++e) CHECK(ss[e] == doctest::Approx(s1[e]).epsilon(1e-15));
    CHECK_THROWS_AS(combine(std::span<const HypothesisMatrix>{}), PreconditionError);
    const auto other = build_graph(std::vector<Edge>{{0, 1}}, 2);
    const std::vector<HypothesisMatrix> mixed{s, structural_hypothesis(other)};
    CHECK_THROWS_AS(combine(mixed), AlignmentError);
}

TEST_CASE("prior elicitation") {
    const auto two = build_graph(std::vector<Edge>{{0, 1}, {0, 2}}, 3);
    CHECK(elicit_prior(structural_hypothesis(two), two, 4.0) == std::vector<double>{3, 3});
    HypothesisMatrix h{"b", {3, 1}, two.fingerprint(), false, 0};
    CHECK(elicit_prior(h, two, 8.0) == std::vector<double>{7, 3});
    for (double a : elicit_prior(h, two, 1e-12)) CHECK(a == doctest::Approx(1.0).epsilon(1e-11));
    CHECK_THROWS_AS(elicit_prior(h, two, 0.0), PreconditionError);
    HypothesisMatrix zero{"z", {0, 0}, two.fingerprint(), false, 0};
    CHECK_THROWS_AS(elicit_prior(zero, two, 1.0), PreconditionError);
}

TEST_CASE("log evidence examples") {
    const auto two = build_graph(std::vector<Edge>{{0, 1}, {0, 2}}, 3);
    const std::vector<double> a{1, 1}, n{1, 1}, zero{0, 0};
    CHECK(log_evidence(two, a, n) == doctest::Approx(std::log(1.0 / 6)).epsilon(1e-14));
    CHECK(log_evidence(two, a, zero) == 0);
}

TEST_CASE("log evidence equals the sequential predictive product") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::size_t> states(2, 4), obs(0, 10);
    std::uniform_real_distribution<double> prior(0.05, 5.0);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = states(rng);
        const auto g = testing::random_out_graph(n, 1, n - 1, rng);
        std::vector<double> alpha(g.edge_count());
        for (double& v : alpha) v = prior(rng);
        std::vector<std::vector<std::size_t>> draws(n);
        for (NodeId i = 0; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> k(0, g.out_degree(i) - 1);
            for (std::size_t m = obs(rng); m > 0; --m) draws[i].push_back(k(rng));
        }
        const auto counts = draws_to_counts(g, draws);
        CHECK(std::abs(log_evidence(g, alpha, counts) - polya_urn(g, alpha, draws)) <= 1e-9);
        CHECK(log_evidence(g, alpha, counts, 3) == log_evidence(g, alpha, counts, 1));
    }
}

TEST_CASE("log evidence matches a Monte Carlo average over Dirichlet draws") {
    // 3-state chain with every transition allowed except self-loops
    const auto g = build_graph(std::vector<Edge>{{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}, 3);
    const std::vector<double> alpha{2.0, 0.5, 1.0, 3.0, 1.5, 1.5};
    const std::vector<double> counts{3, 1, 0, 2, 4, 4};
    std::mt19937_64 rng(99);
    const int draws = 1'000'000;
    for (NodeId i = 0; i < 3; ++i) {
        const std::size_t e0 = 2 * i;
        std::gamma_distribution<double> ga(alpha[e0], 1.0), gb(alpha[e0 + 1], 1.0);
        double sum = 0, sum2 = 0;
        for (int d = 0; d < draws; ++d) {
            const double x = ga(rng), y = gb(rng);
            const double p = x / (x + y);
            const double lik = std::pow(p, counts[e0]) * std::pow(1 - p, counts[e0 + 1]);
            sum += lik;
            sum2 += lik * lik;
        }
        const double mean = sum / draws;
        const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
        std::vector<double> row_counts(6, 0);
        row_counts[e0] = counts[e0];
        row_counts[e0 + 1] = counts[e0 + 1];
        const double exact = std::exp(log_evidence(g, alpha, row_counts));
        CHECK(std::abs(exact - mean) <= 3 * se);
    }
}

TEST_CASE("evidence invariants") {
    std::mt19937_64 rng(5);
    const auto g = testing::random_out_graph(60, 1, 6, rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    HypothesisMatrix h{"random", std::vector<double>(g.edge_count()), g.fingerprint(), false, 0};
    for (double& v : h.beliefs) v = 0.01 + u(rng);
    const auto log = testing::sample_transitions(g, h.beliefs, 20, rng);
    const auto counts = edge_counts(g, log);

    // kappa -> 0: every hypothesis collapses to the uniform prior
    const double tiny = 1e-13;
    const double base = log_evidence(g, elicit_prior(structural_hypothesis(g), g, tiny), counts);
    CHECK(std::abs(log_evidence(g, elicit_prior(h, g, tiny), counts) - base) <= 1e-9);

    // global scale
    auto scaled = h;
    for (double& v : scaled.beliefs) v *= 37.5;
    for (double kappa : {1.0, 10.0, 100.0})
        CHECK(std::abs(log_evidence(g, elicit_prior(scaled, g, kappa), counts) -
                       log_evidence(g, elicit_prior(h, g, kappa), counts)) <= 1e-12 * std::abs(base));

    // extra unobserved rows change nothing
    auto edges = g.edges();
    const std::size_t n = g.node_count();
    for (NodeId i = 0; i < 10; ++i) edges.push_back({static_cast<NodeId>(n + i), static_cast<NodeId>(i)});
    const auto big = build_graph(edges, n + 10);
    std::vector<double> big_beliefs(big.edge_count(), 1.0);
    for (std::size_t e = 0; e < g.edge_count(); ++e) big_beliefs[*big.edge_id(g.edge(e).src, g.edge(e).trg)] = h.beliefs[e];
    HypothesisMatrix hb{"random", big_beliefs, big.fingerprint(), false, 0};
    const auto big_counts = edge_counts(big, log);
    CHECK(log_evidence(big, elicit_prior(hb, big, 5.0), big_counts) ==
          doctest::Approx(log_evidence(g, elicit_prior(h, g, 5.0), counts)).epsilon(1e-14));
}

TEST_CASE("edge counts reject non-edges") {
    const auto g = toy();
    TransitionLog log;
    log.entries = {{0, 1, 12}, {1, 3, 20}};
    const auto c = edge_counts(g, log);
    CHECK(c == std::vector<double>{12, 0, 0, 0, 20, 0});
    log.entries.push_back({3, 0, 11});
    CHECK_THROWS_AS(edge_counts(g, log), SupportError);
}

TEST_CASE("kass-raftery labels") {
    CHECK(kass_raftery(0.5) == "not worth more than a bare mention");
    CHECK(kass_raftery(1.5) == "positive");
    CHECK(kass_raftery(4.0) == "strong");
    CHECK(kass_raftery(6.0) == "very strong");
    CHECK(kass_raftery(-6.0) == "very strong against");
}

TEST_CASE("self-generated counts rank the generating hypothesis first") {
    std::mt19937_64 rng(13);
    const auto g = testing::random_out_graph(150, 2, 12, rng);
    const auto k = kcore(g);
    const auto kh = kcore_hypothesis(g, k);
    const auto base = structural_hypothesis(g);
    const auto grid = default_kappa_grid(g);
    REQUIRE(grid.size() == 5);

    std::vector<double> inverse(g.edge_count()), direct(g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const double c = std::max(k[g.edge(e).trg], 1.0);
        inverse[e] = 1 / std::sqrt(c);
        direct[e] = std::sqrt(c);
    }
    const std::vector<HypothesisMatrix> hyps{base, kh};
    const auto up = edge_counts(g, testing::sample_transitions(g, inverse, 200, rng));
    const auto curves = bayes_factor_curve(g, hyps, base, up, grid, 2);
    REQUIRE(curves.size() == 2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(curves[0].log_bf[i] == 0);
        CHECK(curves[1].log_bf[i] > 0);
        CHECK(curves[1].log_bf[i] == doctest::Approx(curves[1].log_evidence[i] - curves[0].log_evidence[i]));
    }
    const auto down = edge_counts(g, testing::sample_transitions(g, direct, 200, rng));
    for (const auto& c : bayes_factor_curve(g, hyps, base, down, grid))
        if (c.name == kh.name)
            for (double bf : c.log_bf) CHECK(bf < 0);

    std::ostringstream out;
    write_evidence_curves(out, curves, "# h\n");
    CHECK(out.str().rfind("# h\n", 0) == 0);
    CHECK(out.str().find("\nhypothesis\tkappa\tlog_evidence\tlog_bf\t2lnbf\tverdict\n") != std::string::npos);
}

TEST_CASE("kappa grids") {
    const auto g = toy(); // mean out-degree 6/3 over articles with links
    const auto grid = default_kappa_grid(g);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] == doctest::Approx(grid[0] * static_cast<double>(i + 1)));
    const auto lg = log_kappa_grid(1, 1000, 4);
    CHECK(lg.size() == 4);
    CHECK(lg[1] == doctest::Approx(10));
    CHECK(lg[3] == doctest::Approx(1000));
}
