#pragma once
// Fixed-effects hurdle regression of link success: a logistic stage for
// "used at all" and a zero-truncated negative binomial stage for the counts
// of used links, compared against nested models by likelihood-ratio tests.

#include "wikinav/graph.hpp"
#include "wikinav/ingest.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wikinav {

struct FeatureColumn {
    std::string name;
    std::vector<double> values;
    bool binary = false; // binary indicators enter unscaled
};

inline constexpr const char* kInterceptColumn = "(Intercept)";

struct DesignMatrix {
    std::vector<std::string> columns; // columns[0] is the intercept
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<NodeId> group; // source article per row; kept for reporting
    std::vector<double> center; // per column; 0 for intercept and binary columns
    std::vector<double> scale;  // per column; 1 for intercept and binary columns

    std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(x.cols()); }
};

// Intercept plus the given columns; continuous columns are z-scored with the
// sample standard deviation. A constant continuous column is left as zeros
// (and then rejected as collinear by the fitters).
DesignMatrix make_design(std::span<const FeatureColumn> features, std::span<const double> outcome,
                         std::span<const NodeId> groups = {});

// Same rows, only the named columns (intercept always kept).
DesignMatrix select_columns(const DesignMatrix& d, std::span<const std::string> keep);

// Row subset.
DesignMatrix select_rows(const DesignMatrix& d, std::span<const std::size_t> rows, std::span<const double> outcome);

struct HurdleSplit {
    std::vector<double> binary_outcome;    // all links: 1 iff count >= threshold
    std::vector<std::size_t> count_rows;   // links with count >= threshold
    std::vector<double> count_outcome;     // their counts
    bool separation_risk = false;          // stage-1 outcome is constant
};

HurdleSplit split_hurdle(std::span<const std::uint64_t> counts, std::uint64_t threshold);
HurdleSplit split_hurdle(const LinkFeatureTable& table, std::uint64_t threshold);

enum class Stage { binomial, ztnb };
const char* to_string(Stage s);

struct FitOptions {
    int max_iter = 500;
    double gradient_tol = 1e-9; // on ||gradient||_2 / rows
    int max_halvings = 30;
};

struct HurdleFit {
    Stage stage = Stage::binomial;
    std::vector<std::string> columns;
    Eigen::VectorXd coefficients;
    double theta = 0; // ztnb dispersion
    double log_likelihood = 0;
    int iterations = 0;
    double gradient_norm = 0; // ||gradient||_2 / rows at the optimum
    std::vector<double> trace; // log-likelihood after each accepted step
    std::size_t rows = 0;

    std::size_t parameter_count() const;
    double aic() const;
    double bic() const;
    double coefficient(const std::string& column) const;
};

// Bernoulli log-likelihood with logit link; optional gradient w.r.t. beta.
double logistic_log_likelihood(const DesignMatrix& d, const Eigen::VectorXd& beta, Eigen::VectorXd* gradient = nullptr);

// Damped Newton. Throws SeparationError for constant outcomes or diverging
// coefficients and SingularHessianError for collinear columns.
HurdleFit fit_logistic(const DesignMatrix& d, const FitOptions& opts = {});

// Zero-truncated NB log-likelihood with mu = exp(x'beta), dispersion
// theta = exp(log_theta). Gradient is w.r.t. (beta, log_theta).
double ztnb_log_likelihood(const DesignMatrix& d, const Eigen::VectorXd& beta, double log_theta,
                           Eigen::VectorXd* gradient = nullptr);

// BFGS ascent over (beta, log theta) with a monotone backtracking line search.
// Throws PreconditionError if any outcome is below 1.
HurdleFit fit_ztnb(const DesignMatrix& d, double theta_init = 1.0, const FitOptions& opts = {});

struct LrtResult {
    double statistic = 0;
    int df = 0;
    double p = 1;
};

// 2 (LL_full - LL_reduced) against chi-square with the column difference as df.
LrtResult lrt(const HurdleFit& full, const HurdleFit& reduced);

struct FeatureSpec {
    std::string name;
    std::string transformation; // "scale" or "none"
    bool binary = false;
    std::function<double(const LinkFeatures&)> extract;
};

// trg_degree, trg_in_degree, trg_out_degree, trg_kcore, trg_pagerank,
// text_sim, topic_sim, the six position indicators, screen x and y.
std::vector<FeatureSpec> default_feature_battery();

struct StageResult {
    bool ok = false;
    double coefficient = 0;
    double theta = 0;
    LrtResult test;
    double aic = 0;
    double bic = 0;
    std::size_t rows = 0;
    std::string error;
};

struct FeatureModelReport {
    std::string feature;
    std::string transformation;
    StageResult binomial;
    StageResult ztnb;
};

// One model per feature (intercept + feature vs intercept only) for both stages.
std::vector<FeatureModelReport> run_feature_battery(const LinkFeatureTable& table, std::uint64_t threshold,
                                                    std::span<const FeatureSpec> features, unsigned threads = 1);

void write_hurdle_report(std::ostream& out, std::span<const FeatureModelReport> reports, std::uint64_t threshold,
                         const std::string& header = {});

} // namespace wikinav
