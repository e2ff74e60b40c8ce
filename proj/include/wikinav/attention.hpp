#pragma once
// Focus-of-attention statistics: how strongly clicks concentrate on few links.

#include "wikinav/graph.hpp"
#include "wikinav/ingest.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wikinav {

struct TransitionHistogram {
    std::map<std::uint64_t, std::size_t> frequency; // count value -> number of links
    std::size_t links = 0;
    std::uint64_t transitions = 0;
    // Smallest k such that the k busiest links carry at least half of all
    // transitions; absent for an empty log.
    std::optional<std::size_t> half_mass_links;
};

TransitionHistogram transition_histogram(const TransitionLog& log);

enum class NetworkTag { wiki, trans };

struct DegreeDistribution {
    NetworkTag network = NetworkTag::wiki;
    std::map<std::size_t, std::size_t> frequency; // out-degree -> node count
    std::size_t node_count = 0;
};

// Out-degree histograms of the link graph and of its used-link subgraph,
// both restricted to articles that have at least one used out-link.
std::pair<DegreeDistribution, DegreeDistribution> outdegree_comparison(const LinkGraph& g, const TransitionLog& log);

// Gini coefficient via the sorted formulation. Throws PreconditionError on
// empty or negative input and DegenerateInput when every value is zero.
double gini(std::span<const double> values);

struct GiniSummary {
    std::vector<std::pair<NodeId, double>> per_article;
    std::size_t undefined = 0; // articles whose links were never used
    std::vector<std::size_t> histogram; // equal-width bins over [0, 1)
};

// Per-article Gini over all out-links, zero-count links included.
GiniSummary article_gini(const LinkGraph& g, const TransitionLog& log, std::size_t bins = 20);

enum class Family { power_law, truncated_power_law, lognormal, exponential };
const char* to_string(Family f);

struct FamilyFit {
    Family family = Family::power_law;
    bool converged = false;
    std::vector<std::pair<std::string, double>> params;
    double log_likelihood = 0;
    double aic = 0;
    double delta_aic = 0;
    std::string failure;

    std::vector<double> param_values() const;
};

struct FitReport {
    std::uint64_t xmin = 1;
    std::size_t tail_size = 0;
    std::vector<FamilyFit> fits;
    std::optional<Family> winner;

    const FamilyFit& fit(Family f) const;
};

// Maximum-likelihood fits of four discrete families on samples >= xmin,
// compared by AIC:
//   power_law            p(x) ~ x^-alpha                    alpha > 1
//   truncated_power_law  p(x) ~ x^-alpha exp(-lambda x)     alpha > 1, lambda > 0
//   lognormal            p(x) ~ Phi-mass of [x, x+1) under LN(mu, sigma)
//   exponential          p(x) ~ exp(-lambda x)              lambda > 0
FitReport fit_distributions(std::span<const std::uint64_t> samples, std::uint64_t xmin = 1);

// Log-likelihood of the tail samples under a family with the given parameters
// (ordered as in FamilyFit::params).
double family_log_likelihood(Family f, std::span<const double> params, std::span<const std::uint64_t> samples,
                             std::uint64_t xmin);

// Hurwitz zeta sum_{k>=0} (q+k)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

void write_transition_histogram(std::ostream& out, const TransitionHistogram& h, const std::string& header = {});
void write_degree_comparison(std::ostream& out, const DegreeDistribution& wiki, const DegreeDistribution& trans,
                             const std::string& header = {});
void write_gini_histogram(std::ostream& out, const GiniSummary& s, const std::string& header = {});
void write_fit_report(std::ostream& out, const std::string& title, const FitReport& r, const std::string& header = {});

} // namespace wikinav
