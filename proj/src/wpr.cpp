#include "wikinav/wpr.hpp"

#include "parallel.hpp"
#include "textio.hpp"
#include "wikinav/error.hpp"
#include "wikinav/stats.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

namespace wikinav {

CentralityVector weighted_pagerank(const LinkGraph& g, const HypothesisMatrix& h, const PageRankOptions& opts) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw PreconditionError("weighted_pagerank: alpha must lie in (0,1)");
    if (!(opts.tol > 0.0)) throw PreconditionError("weighted_pagerank: tol must be positive");
    if (h.graph_fingerprint != g.fingerprint() || h.beliefs.size() != g.edge_count())
        throw AlignmentError("hypothesis '" + h.name + "' belongs to a different graph");

    const std::size_t n = g.node_count();
    CentralityVector pr{CentralityKind::pagerank, {}};
    if (n == 0) return pr;

    // Transition probability per edge; rows without belief mass teleport.
    std::vector<double> weight(g.edge_count(), 0.0);
    std::vector<char> teleports(n, 0);
    for (NodeId i = 0; i < n; ++i) {
        double z = 0.0;
        for (std::size_t e = g.out_begin(i); e < g.out_end(i); ++e) {
            if (!(h.beliefs[e] >= 0)) throw PreconditionError("hypothesis '" + h.name + "' has a negative belief");
            z += h.beliefs[e];
        }
        if (z > 0) {
            for (std::size_t e = g.out_begin(i); e < g.out_end(i); ++e) weight[e] = h.beliefs[e] / z;
        } else {
            teleports[i] = 1;
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> x(n, inv_n), next(n);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double dangling = 0.0;
        for (NodeId i = 0; i < n; ++i)
            if (teleports[i]) dangling += x[i];
        const double base = (1.0 - opts.alpha) * inv_n + opts.alpha * dangling * inv_n;
        double delta = 0.0;
        for (NodeId j = 0; j < n; ++j) {
            double acc = 0.0;
            const auto src = g.in_neighbors(j);
            const auto ids = g.in_edge_ids(j);
            for (std::size_t k = 0; k < src.size(); ++k) acc += x[src[k]] * weight[ids[k]];
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
    throw ConvergenceError("weighted pagerank for '" + h.name + "' did not converge within " +
                               std::to_string(opts.max_iter) + " iterations",
                           std::move(x));
}

std::vector<double> incoming_transition_sums(const TransitionLog& log, std::size_t node_count) {
    std::vector<double> views(node_count, 0.0);
    for (const auto& t : log.entries) {
        if (t.trg >= node_count) throw LookupError("transition target outside the graph");
        views[t.trg] += static_cast<double>(t.count);
    }
    return views;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("spearman: inputs differ in length");
    if (x.size() < 3) throw PreconditionError("spearman: needs at least 3 observations");
    const auto rx = stats::average_ranks(x);
    const auto ry = stats::average_ranks(y);
    const double rho = stats::pearson(rx, ry);
    if (std::isnan(rho)) throw DegenerateInput("spearman: correlation undefined for a constant input");
    Correlation c;
    c.rho = rho;
    const double df = static_cast<double>(x.size() - 2);
    if (std::abs(rho) >= 1.0) {
        c.p = 0.0;
    } else {
        const double t = rho * std::sqrt(df / (1.0 - rho * rho));
        c.p = stats::student_t_two_sided(t, df);
    }
    return c;
}

SteigerResult steiger_test(double r12, double r13, double r23, std::size_t n) {
    if (n < 10) throw PreconditionError("steiger_test: needs n >= 10");
    for (double r : {r12, r13, r23})
        if (!(std::abs(r) < 1.0)) throw PreconditionError("steiger_test: correlations must lie in (-1, 1)");
    const double rbar = 0.5 * (r12 + r13);
    const double rbar2 = rbar * rbar;
    const double psi = r23 * (1.0 - 2.0 * rbar2) - 0.5 * rbar2 * (1.0 - 2.0 * rbar2 - r23 * r23);
    const double sbar = psi / ((1.0 - rbar2) * (1.0 - rbar2));
    SteigerResult s;
    s.z = (std::atanh(r12) - std::atanh(r13)) * std::sqrt(static_cast<double>(n) - 3.0) / std::sqrt(2.0 - 2.0 * sbar);
    s.p = stats::normal_sf(s.z);
    return s;
}

std::vector<RankEvaluation> evaluate_all(const LinkGraph& g, std::span<const HypothesisMatrix> hyps,
                                         const TransitionLog& log, const EvaluationOptions& opts) {
    const auto views_all = incoming_transition_sums(log, g.node_count());
    std::vector<std::size_t> universe;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (!opts.restrict_to_viewed || views_all[i] > 0) universe.push_back(i);
    auto restrict = [&](const std::vector<double>& v) {
        std::vector<double> out;
        out.reserve(universe.size());
        for (auto i : universe) out.push_back(v[i]);
        return out;
    };
    const auto views = restrict(views_all);

    std::vector<HypothesisMatrix> all;
    all.push_back(structural_hypothesis(g));
    all.insert(all.end(), hyps.begin(), hyps.end());
    const std::size_t per_alpha = all.size();

    std::vector<RankEvaluation> out(opts.alphas.size() * per_alpha);
    detail::parallel_for(out.size(), opts.threads, [&](std::size_t cell) {
        const double alpha = opts.alphas[cell / per_alpha];
        const auto& h = all[cell % per_alpha];
        RankEvaluation& ev = out[cell];
        ev.hypothesis = h.name;
        ev.alpha = alpha;
        ev.pagerank = weighted_pagerank(g, h, {alpha, opts.tol, opts.max_iter});
        ev.correlation = spearman(views, restrict(ev.pagerank.values));
    });

    for (std::size_t a = 0; a < opts.alphas.size(); ++a) {
        const RankEvaluation& base = out[a * per_alpha];
        const auto base_pr = restrict(base.pagerank.values);
        for (std::size_t k = 1; k < per_alpha; ++k) {
            RankEvaluation& ev = out[a * per_alpha + k];
            ev.improved = ev.correlation.rho > base.correlation.rho;
            try {
                const double r23 = spearman(restrict(ev.pagerank.values), base_pr).rho;
                ev.steiger = steiger_test(ev.correlation.rho, base.correlation.rho, r23, universe.size());
                ev.has_steiger = true;
            } catch (const Error&) {
                ev.has_steiger = false; // identical rankings or too few articles
            }
        }
    }
    return out;
}

void write_rank_evaluations(std::ostream& out, std::span<const RankEvaluation> evals, const std::string& header) {
    using textio::format_double;
    out << header;
    out << "# spearman rho of weighted pagerank vs incoming transitions; steiger test vs the structural baseline\n";
    out << "hypothesis\talpha\trho\tp\tsteiger_z\tsteiger_p\timproved\n";
    for (const auto& e : evals) {
        out << e.hypothesis << '\t' << format_double(e.alpha) << '\t' << format_double(e.correlation.rho) << '\t'
            << format_double(e.correlation.p) << '\t';
        if (e.has_steiger) out << format_double(e.steiger.z) << '\t' << format_double(e.steiger.p);
        else out << "NA\tNA";
        out << '\t' << (e.improved ? "true" : "false") << '\n';
    }
}

} // namespace wikinav
