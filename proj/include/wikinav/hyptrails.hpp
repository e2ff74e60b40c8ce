#pragma once
// Bayesian comparison of navigation hypotheses for a first-order Markov chain
// over the link graph. Beliefs become Dirichlet priors, hypotheses are ranked
// by marginal likelihood.

#include "wikinav/graph.hpp"
#include "wikinav/ingest.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wikinav {

// Nonnegative beliefs aligned with the edge ids of one graph.
struct HypothesisMatrix {
    std::string name;
    std::vector<double> beliefs;
    std::uint64_t graph_fingerprint = 0;
    bool smoothed = false;          // structural matrix (weight 1) added
    std::size_t missing_filled = 0; // edges with no input value, filled with 0
};

// 1 on every edge.
HypothesisMatrix structural_hypothesis(const LinkGraph& g);

// 1 / sqrt(max(kcore[trg], 1)) per edge, smoothed.
HypothesisMatrix kcore_hypothesis(const LinkGraph& g, const CentralityVector& kcore);

// Edge-aligned similarities in [0,1], smoothed. NaN marks a missing value.
HypothesisMatrix textsim_hypothesis(const LinkGraph& g, std::span<const double> sims);
HypothesisMatrix textsim_hypothesis(const LinkGraph& g, const LinkFeatureTable& table);

// 1 for links in the lead, the left part of the body or the infobox, else 0;
// smoothed. Edges without a table row count as missing.
HypothesisMatrix visual_hypothesis(const LinkGraph& g, const LinkFeatureTable& table);

// Entry-wise sum, named "a+b+...". Throws PreconditionError on an empty list
// and AlignmentError when the inputs belong to different graphs.
HypothesisMatrix combine(std::span<const HypothesisMatrix> hyps);

// Edge-aligned Dirichlet parameters alpha = 1 + kappa * row-normalized beliefs.
// Throws PreconditionError for kappa <= 0 and for a zero-sum row.
std::vector<double> elicit_prior(const HypothesisMatrix& h, const LinkGraph& g, double kappa);

// Edge-aligned counts. Throws SupportError for an entry that is not an edge.
std::vector<double> edge_counts(const LinkGraph& g, const TransitionLog& log);

// Dirichlet-multinomial log evidence summed over source rows, without the
// multinomial coefficient. Rows without observations contribute 0.
double log_evidence(const LinkGraph& g, std::span<const double> alpha, std::span<const double> counts,
                    unsigned threads = 1);

// Kass-Raftery strength of 2 ln BF (thresholds 2, 6, 10); negative values
// get the strength of |2 ln BF| with "against".
std::string kass_raftery(double log_bf);

struct EvidenceCurve {
    std::string name;
    std::vector<double> kappas;
    std::vector<double> log_evidence;
    std::vector<double> log_bf; // vs the baseline at the same kappa
    std::vector<std::string> verdicts;
};

std::vector<EvidenceCurve> bayes_factor_curve(const LinkGraph& g, std::span<const HypothesisMatrix> hyps,
                                              const HypothesisMatrix& baseline, std::span<const double> counts,
                                              std::span<const double> kappas, unsigned threads = 1);

// {1, ..., 5} times the mean out-degree.
std::vector<double> default_kappa_grid(const LinkGraph& g);
// n values log-spaced over [lo, hi].
std::vector<double> log_kappa_grid(double lo, double hi, std::size_t n);

void write_evidence_curves(std::ostream& out, std::span<const EvidenceCurve> curves, const std::string& header = {});

} // namespace wikinav
