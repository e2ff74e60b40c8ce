#include "wikinav/hyptrails.hpp"

#include "parallel.hpp"
#include "textio.hpp"
#include "wikinav/error.hpp"
#include "wikinav/stats.hpp"

#include <cmath>
#include <ostream>

namespace wikinav {

namespace {

HypothesisMatrix make(const LinkGraph& g, std::string name) {
    HypothesisMatrix h;
    h.name = std::move(name);
    h.beliefs.assign(g.edge_count(), 0.0);
    h.graph_fingerprint = g.fingerprint();
    return h;
}

void smooth(HypothesisMatrix& h) {
    for (double& b : h.beliefs) b += 1.0;
    h.smoothed = true;
}

void check_aligned(const HypothesisMatrix& h, const LinkGraph& g) {
    if (h.graph_fingerprint != g.fingerprint() || h.beliefs.size() != g.edge_count())
        throw AlignmentError("hypothesis '" + h.name + "' belongs to a different graph");
}

} // namespace

HypothesisMatrix structural_hypothesis(const LinkGraph& g) {
    HypothesisMatrix h = make(g, "structural");
    h.beliefs.assign(g.edge_count(), 1.0);
    return h;
}

HypothesisMatrix kcore_hypothesis(const LinkGraph& g, const CentralityVector& kcore) {
    if (kcore.size() != g.node_count()) throw AlignmentError("kcore vector does not match the graph");
    HypothesisMatrix h = make(g, "kcore");
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const double k = kcore[g.edge_target(e)];
        if (!(k >= 0)) throw PreconditionError("kcore values must be nonnegative");
        h.beliefs[e] = 1.0 / std::sqrt(std::max(k, 1.0));
    }
    smooth(h);
    return h;
}

HypothesisMatrix textsim_hypothesis(const LinkGraph& g, std::span<const double> sims) {
    if (sims.size() != g.edge_count()) throw AlignmentError("similarities are not aligned with the graph edges");
    HypothesisMatrix h = make(g, "text_sim");
    for (std::size_t e = 0; e < sims.size(); ++e) {
        if (std::isnan(sims[e])) {
            ++h.missing_filled;
            continue;
        }
        if (sims[e] < 0 || sims[e] > 1) throw PreconditionError("similarity outside [0,1]");
        h.beliefs[e] = sims[e];
    }
    smooth(h);
    return h;
}

HypothesisMatrix textsim_hypothesis(const LinkGraph& g, const LinkFeatureTable& table) {
    const auto idx = table.rows_by_edge(g);
    std::vector<double> sims(g.edge_count(), std::nan(""));
    for (std::size_t e = 0; e < idx.size(); ++e)
        if (idx[e]) sims[e] = table.rows[*idx[e]].text_sim;
    return textsim_hypothesis(g, sims);
}

HypothesisMatrix visual_hypothesis(const LinkGraph& g, const LinkFeatureTable& table) {
    const auto idx = table.rows_by_edge(g);
    HypothesisMatrix h = make(g, "visual");
    for (std::size_t e = 0; e < idx.size(); ++e) {
        if (!idx[e]) {
            ++h.missing_filled;
            continue;
        }
        const Region r = table.rows[*idx[e]].region;
        h.beliefs[e] = (r == Region::lead || r == Region::left_body || r == Region::infobox) ? 1.0 : 0.0;
    }
    smooth(h);
    return h;
}

HypothesisMatrix combine(std::span<const HypothesisMatrix> hyps) {
    if (hyps.empty()) throw PreconditionError("combine needs at least one hypothesis");
    HypothesisMatrix out = hyps.front();
    for (std::size_t k = 1; k < hyps.size(); ++k) {
        const auto& h = hyps[k];
        if (h.graph_fingerprint != out.graph_fingerprint || h.beliefs.size() != out.beliefs.size())
            throw AlignmentError("cannot combine '" + out.name + "' and '" + h.name + "': different graphs");
        for (std::size_t e = 0; e < h.beliefs.size(); ++e) out.beliefs[e] += h.beliefs[e];
        out.name += "+" + h.name;
        out.smoothed = out.smoothed || h.smoothed;
        out.missing_filled += h.missing_filled;
    }
    return out;
}

std::vector<double> elicit_prior(const HypothesisMatrix& h, const LinkGraph& g, double kappa) {
    if (!(kappa > 0) || !std::isfinite(kappa)) throw PreconditionError("kappa must be positive");
    check_aligned(h, g);
    std::vector<double> alpha(g.edge_count());
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const std::size_t b = g.out_begin(i), e = g.out_end(i);
        if (b == e) continue;
        double z = 0.0;
        for (std::size_t k = b; k < e; ++k) {
            if (!(h.beliefs[k] >= 0)) throw PreconditionError("hypothesis '" + h.name + "' has a negative belief");
            z += h.beliefs[k];
        }
        if (!(z > 0)) {
            throw PreconditionError("hypothesis '" + h.name + "' has an all-zero row (node " + std::to_string(i) +
                                    "); smooth it before eliciting a prior");
        }
        for (std::size_t k = b; k < e; ++k) alpha[k] = 1.0 + kappa * h.beliefs[k] / z;
    }
    return alpha;
}

std::vector<double> edge_counts(const LinkGraph& g, const TransitionLog& log) {
    std::vector<double> counts(g.edge_count(), 0.0);
    for (const auto& t : log.entries) {
        const auto id = (t.src < g.node_count() && t.trg < g.node_count()) ? g.edge_id(t.src, t.trg) : std::nullopt;
        if (!id) {
            throw SupportError("transition " + std::to_string(t.src) + " -> " + std::to_string(t.trg) +
                               " is not a link of the graph");
        }
        counts[*id] += static_cast<double>(t.count);
    }
    return counts;
}

double log_evidence(const LinkGraph& g, std::span<const double> alpha, std::span<const double> counts,
                    unsigned threads) {
    if (alpha.size() != g.edge_count() || counts.size() != g.edge_count())
        throw AlignmentError("prior and counts must be aligned with the graph edges");
    constexpr std::size_t block = 4096;
    const std::size_t n = g.node_count();
    std::vector<double> row_terms(n, 0.0);
    detail::parallel_for((n + block - 1) / block, threads, [&](std::size_t blk) {
        const std::size_t end = std::min(n, (blk + 1) * block);
        for (std::size_t i = blk * block; i < end; ++i) {
            const auto node = static_cast<NodeId>(i);
            double a_sum = 0.0, n_sum = 0.0, inner = 0.0;
            for (std::size_t k = g.out_begin(node); k < g.out_end(node); ++k) {
                const double c = counts[k];
                if (c < 0) throw PreconditionError("negative transition count");
                if (!(alpha[k] > 0)) throw PreconditionError("Dirichlet parameters must be positive");
                a_sum += alpha[k];
                n_sum += c;
                if (c > 0) inner += stats::log_gamma(alpha[k] + c) - stats::log_gamma(alpha[k]);
            }
            if (n_sum > 0) row_terms[i] = stats::log_gamma(a_sum) - stats::log_gamma(a_sum + n_sum) + inner;
        }
    });
    return stats::pairwise_sum(row_terms);
}

std::string kass_raftery(double log_bf) {
    const double two = 2.0 * std::abs(log_bf);
    std::string s;
    if (two < 2) s = "not worth more than a bare mention";
    else if (two < 6) s = "positive";
    else if (two < 10) s = "strong";
    else s = "very strong";
    if (log_bf < 0 && two >= 2) s += " against";
    return s;
}

std::vector<EvidenceCurve> bayes_factor_curve(const LinkGraph& g, std::span<const HypothesisMatrix> hyps,
                                              const HypothesisMatrix& baseline, std::span<const double> counts,
                                              std::span<const double> kappas, unsigned threads) {
    std::vector<double> base(kappas.size());
    for (std::size_t k = 0; k < kappas.size(); ++k)
        base[k] = log_evidence(g, elicit_prior(baseline, g, kappas[k]), counts, threads);

    std::vector<EvidenceCurve> curves;
    for (const auto& h : hyps) {
        EvidenceCurve c;
        c.name = h.name;
        c.kappas.assign(kappas.begin(), kappas.end());
        for (std::size_t k = 0; k < kappas.size(); ++k) {
            const double ev = log_evidence(g, elicit_prior(h, g, kappas[k]), counts, threads);
            c.log_evidence.push_back(ev);
            c.log_bf.push_back(ev - base[k]);
            c.verdicts.push_back(kass_raftery(ev - base[k]));
        }
        curves.push_back(std::move(c));
    }
    return curves;
}

std::vector<double> default_kappa_grid(const LinkGraph& g) {
    const double mean_degree =
        g.node_count() ? static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count()) : 1.0;
    const double unit = mean_degree > 0 ? mean_degree : 1.0;
    return {unit, 2 * unit, 3 * unit, 4 * unit, 5 * unit};
}

std::vector<double> log_kappa_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0) || !(hi >= lo) || n == 0) throw PreconditionError("log grid needs 0 < lo <= hi and n >= 1");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
    out.back() = hi;
    return out;
}

void write_evidence_curves(std::ostream& out, std::span<const EvidenceCurve> curves, const std::string& header) {
    using textio::format_double;
    out << header;
    out << "# Dirichlet prior alpha = 1 + kappa * row-normalized beliefs; smoothing: structural matrix, weight 1\n";
    out << "# log_bf is against the structural baseline at the same kappa\n";
    out << "hypothesis\tkappa\tlog_evidence\tlog_bf\t2lnbf\tverdict\n";
    for (const auto& c : curves)
        for (std::size_t k = 0; k < c.kappas.size(); ++k)
            out << c.name << '\t' << format_double(c.kappas[k]) << '\t' << format_double(c.log_evidence[k]) << '\t'
                << format_double(c.log_bf[k]) << '\t' << format_double(2 * c.log_bf[k]) << '\t' << c.verdicts[k]
                << '\n';
}

} // namespace wikinav
