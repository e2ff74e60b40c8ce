#pragma once
// Hypothesis-weighted PageRank (a "reasonable surfer") and its evaluation
// against observed article views.

#include "wikinav/graph.hpp"
#include "wikinav/hyptrails.hpp"
#include "wikinav/ingest.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wikinav {

// The walker follows out-link e of i with probability m_e / Z_i. Rows with
// Z_i = 0 teleport uniformly. Throws ConvergenceError as pagerank does.
CentralityVector weighted_pagerank(const LinkGraph& g, const HypothesisMatrix& h, const PageRankOptions& opts = {});

// Sum of counts per target article.
std::vector<double> incoming_transition_sums(const TransitionLog& log, std::size_t node_count);

struct Correlation {
    double rho = 0;
    double p = 1;
};

// Spearman rank correlation with average ranks for ties; two-sided p from a
// t test with n-2 df. PreconditionError for n < 3 or unequal lengths,
// DegenerateInput when an input is constant.
Correlation spearman(std::span<const double> x, std::span<const double> y);

struct SteigerResult {
    double z = 0;
    double p = 0.5; // one-tailed, alternative r12 > r13
};

// Steiger's Z for two dependent correlations r12 and r13 that share variable 1;
// r23 correlates the other two. PreconditionError for n < 10 or |r| >= 1.
SteigerResult steiger_test(double r12, double r13, double r23, std::size_t n);

struct RankEvaluation {
    std::string hypothesis;
    double alpha = 0.85;
    CentralityVector pagerank;
    Correlation correlation;
    bool has_steiger = false; // false for the baseline rows
    SteigerResult steiger;
    bool improved = false; // rho above the baseline's at the same alpha
};

struct EvaluationOptions {
    std::vector<double> alphas{0.80, 0.85, 0.90};
    bool restrict_to_viewed = false; // correlate only articles with >= 1 incoming transition
    double tol = 1e-10;
    int max_iter = 1000;
    unsigned threads = 1;
};

// Baseline (structural hypothesis) plus every hypothesis at every alpha,
// ordered by alpha, baseline first.
std::vector<RankEvaluation> evaluate_all(const LinkGraph& g, std::span<const HypothesisMatrix> hyps,
                                         const TransitionLog& log, const EvaluationOptions& opts = {});

void write_rank_evaluations(std::ostream& out, std::span<const RankEvaluation> evals, const std::string& header = {});

} // namespace wikinav
