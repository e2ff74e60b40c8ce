#include "wikinav/hurdle.hpp"

#include "parallel.hpp"
#include "textio.hpp"
#include "wikinav/error.hpp"
#include "wikinav/stats.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace wikinav {

DesignMatrix make_design(std::span<const FeatureColumn> features, std::span<const double> outcome,
                         std::span<const NodeId> groups) {
    const std::size_t n = outcome.size();
    if (!groups.empty() && groups.size() != n) throw PreconditionError("group ids must align with rows");
    DesignMatrix d;
    d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features.size() + 1));
    d.y = Eigen::Map<const Eigen::VectorXd>(outcome.data(), static_cast<Eigen::Index>(n));
    d.group.assign(groups.begin(), groups.end());
    d.columns.push_back(kInterceptColumn);
    d.center.push_back(0.0);
    d.scale.push_back(1.0);
    d.x.col(0).setOnes();

    for (std::size_t c = 0; c < features.size(); ++c) {
        const auto& f = features[c];
        if (f.values.size() != n) throw PreconditionError("feature '" + f.name + "' has the wrong length");
        for (double v : f.values)
            if (!std::isfinite(v)) throw PreconditionError("feature '" + f.name + "' has missing values");
        double center = 0.0, scale = 1.0;
        if (!f.binary && n > 1) {
            center = std::accumulate(f.values.begin(), f.values.end(), 0.0) / static_cast<double>(n);
            double ss = 0.0;
            for (double v : f.values) ss += (v - center) * (v - center);
            scale = std::sqrt(ss / static_cast<double>(n - 1));
        }
        const auto col = static_cast<Eigen::Index>(c + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = f.values[i] - center;
            d.x(static_cast<Eigen::Index>(i), col) = scale > 0 ? v / scale : 0.0;
        }
        d.columns.push_back(f.name);
        d.center.push_back(center);
        d.scale.push_back(scale > 0 ? scale : 0.0);
    }
    return d;
}

DesignMatrix select_columns(const DesignMatrix& d, std::span<const std::string> keep) {
    std::vector<Eigen::Index> idx{0};
    for (std::size_t c = 1; c < d.columns.size(); ++c)
        if (std::find(keep.begin(), keep.end(), d.columns[c]) != keep.end()) idx.push_back(static_cast<Eigen::Index>(c));
    DesignMatrix out;
    out.x.resize(d.x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.x.col(static_cast<Eigen::Index>(k)) = d.x.col(idx[k]);
        out.columns.push_back(d.columns[static_cast<std::size_t>(idx[k])]);
        out.center.push_back(d.center[static_cast<std::size_t>(idx[k])]);
        out.scale.push_back(d.scale[static_cast<std::size_t>(idx[k])]);
    }
    out.y = d.y;
    out.group = d.group;
    return out;
}

DesignMatrix select_rows(const DesignMatrix& d, std::span<const std::size_t> rows, std::span<const double> outcome) {
    if (rows.size() != outcome.size()) throw PreconditionError("select_rows: outcome length mismatch");
    DesignMatrix out;
    out.columns = d.columns;
    out.center = d.center;
    out.scale = d.scale;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), d.x.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = d.x.row(static_cast<Eigen::Index>(rows[i]));
        out.y(static_cast<Eigen::Index>(i)) = outcome[i];
        if (!d.group.empty()) out.group.push_back(d.group[rows[i]]);
    }
    return out;
}

HurdleSplit split_hurdle(std::span<const std::uint64_t> counts, std::uint64_t threshold) {
    if (threshold < 1) throw PreconditionError("hurdle threshold must be >= 1");
    HurdleSplit s;
    s.binary_outcome.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const bool used = counts[i] >= threshold;
        s.binary_outcome.push_back(used ? 1.0 : 0.0);
        if (used) {
            s.count_rows.push_back(i);
            s.count_outcome.push_back(static_cast<double>(counts[i]));
        }
    }
    s.separation_risk = s.count_rows.empty() || s.count_rows.size() == counts.size();
    return s;
}

HurdleSplit split_hurdle(const LinkFeatureTable& table, std::uint64_t threshold) {
    std::vector<std::uint64_t> counts;
    counts.reserve(table.rows.size());
    for (const auto& r : table.rows) counts.push_back(r.transitions);
    return split_hurdle(counts, threshold);
}

const char* to_string(Stage s) { return s == Stage::binomial ? "binomial" : "ztnb"; }

std::size_t HurdleFit::parameter_count() const {
    return static_cast<std::size_t>(coefficients.size()) + (stage == Stage::ztnb ? 1 : 0);
}
double HurdleFit::aic() const { return 2.0 * static_cast<double>(parameter_count()) - 2.0 * log_likelihood; }
double HurdleFit::bic() const {
    return std::log(static_cast<double>(rows)) * static_cast<double>(parameter_count()) - 2.0 * log_likelihood;
}
double HurdleFit::coefficient(const std::string& column) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == column) return coefficients(static_cast<Eigen::Index>(i));
    throw LookupError("no coefficient named '" + column + "'");
}

namespace {

void check_rank(const DesignMatrix& d) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
    const auto rank = qr.rank();
    if (rank == d.x.cols()) return;
    std::vector<std::string> culprits;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = rank; k < d.x.cols(); ++k) culprits.push_back(d.columns[static_cast<std::size_t>(perm(k))]);
    std::string msg = "design matrix is rank deficient; collinear column(s):";
    for (const auto& c : culprits) msg += " " + c;
    throw SingularHessianError(msg, culprits);
}

// log(1 + exp(x)) without overflow.
double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

double scaled_norm(const Eigen::VectorXd& g, std::size_t rows) {
    return g.norm() / static_cast<double>(std::max<std::size_t>(rows, 1));
}

// Fisher information collapsing along some direction relative to X'X means
// the likelihood keeps improving as that combination of coefficients diverges.
bool information_collapsed(const DesignMatrix& d, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.x * beta;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double p = logistic(eta(i));
        w(i) = p * (1.0 - p);
    }
    const Eigen::MatrixXd info = d.x.transpose() * w.asDiagonal() * d.x;
    const Eigen::MatrixXd gram = 0.25 * d.x.transpose() * d.x;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(info, gram);
    if (es.info() != Eigen::Success) return false;
    return es.eigenvalues().minCoeff() < 1e-7;
}

} // namespace

double logistic_log_likelihood(const DesignMatrix& d, const Eigen::VectorXd& beta, Eigen::VectorXd* gradient) {
    const Eigen::VectorXd eta = d.x * beta;
    double ll = 0.0;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        ll += d.y(i) * eta(i) - log1pexp(eta(i));
        resid(i) = d.y(i) - logistic(eta(i));
    }
    if (gradient) *gradient = d.x.transpose() * resid;
    return ll;
}

HurdleFit fit_logistic(const DesignMatrix& d, const FitOptions& opts) {
    const std::size_t n = d.rows();
    if (n == 0) throw PreconditionError("logistic fit on zero rows");
    bool has0 = false, has1 = false;
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        if (d.y(i) == 0.0) has0 = true;
        else if (d.y(i) == 1.0) has1 = true;
        else throw PreconditionError("logistic outcome must be 0 or 1");
    }
    if (!(has0 && has1)) throw SeparationError("outcome is constant; logistic coefficients diverge (separation)");
    check_rank(d);

    HurdleFit fit;
    fit.stage = Stage::binomial;
    fit.columns = d.columns;
    fit.rows = n;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.cols()));
    const double ybar = d.y.mean();
    beta(0) = std::log(ybar / (1.0 - ybar));

    Eigen::VectorXd grad;
    double ll = logistic_log_likelihood(d, beta, &grad);
    fit.trace.push_back(ll);
    bool converged = false;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        if (scaled_norm(grad, n) <= opts.gradient_tol) {
            converged = true;
            break;
        }
        const Eigen::VectorXd eta = d.x * beta;
        Eigen::VectorXd w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double p = logistic(eta(i));
            w(i) = std::max(p * (1.0 - p), 1e-300);
        }
        const Eigen::MatrixXd info = d.x.transpose() * w.asDiagonal() * d.x;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success) break;
        const Eigen::VectorXd step = ldlt.solve(grad);

        double scale = 1.0;
        bool improved = false;
        for (int h = 0; h <= opts.max_halvings; ++h, scale *= 0.5) {
            const Eigen::VectorXd candidate = beta + scale * step;
            Eigen::VectorXd g2;
            const double ll2 = logistic_log_likelihood(d, candidate, &g2);
            const bool flat = std::abs(ll2 - ll) <= 8 * std::numeric_limits<double>::epsilon() * std::abs(ll) &&
                              g2.norm() < 0.5 * grad.norm();
            if (std::isfinite(ll2) && (ll2 > ll || flat)) {
                beta = candidate;
                ll = ll2;
                grad = g2;
                improved = true;
                break;
            }
        }
        if (!improved) {
            // No representable improvement left: at the optimum up to rounding.
            converged = scaled_norm(grad, n) <= 1e3 * opts.gradient_tol;
            break;
        }
        fit.trace.push_back(ll);
        if (ll > -1e-8) break; // deviance ~ 0: perfectly separated
    }

    if (ll > -1e-8 || information_collapsed(d, beta))
        throw SeparationError("fitted probabilities collapse to 0/1; coefficients diverge (separation)");
    if (!converged) {
        throw ConvergenceError("logistic fit did not converge in " + std::to_string(iter) + " iterations",
                               std::vector<double>(beta.data(), beta.data() + beta.size()));
    }
    fit.coefficients = beta;
    fit.log_likelihood = ll;
    fit.iterations = iter;
    fit.gradient_norm = scaled_norm(grad, n);
    return fit;
}

double ztnb_log_likelihood(const DesignMatrix& d, const Eigen::VectorXd& beta, double log_theta,
                           Eigen::VectorXd* gradient) {
    const double theta = std::exp(log_theta);
    const Eigen::VectorXd eta = d.x * beta;
    const Eigen::Index n = eta.size();
    Eigen::VectorXd d_eta(gradient ? n : 0);
    double d_theta = 0.0;
    double ll = 0.0;
    const double lgamma_theta = stats::log_gamma(theta);
    const double digamma_theta = gradient ? boost::math::digamma(theta) : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double y = d.y(i);
        const double mu = std::exp(eta(i));
        const double log_ratio = -std::log1p(mu / theta); // log(theta / (theta + mu))
        const double log_p0 = theta * log_ratio;
        const double log1m_p0 = std::log(-std::expm1(log_p0));
        const double log_theta_mu = log_theta - log_ratio; // log(theta + mu)
        ll += stats::log_gamma(y + theta) - lgamma_theta - stats::log_gamma(y + 1.0) + theta * log_ratio +
              y * (eta(i) - log_theta_mu) - log1m_p0;
        if (gradient) {
            const double odds0 = 1.0 / std::expm1(-log_p0); // p0 / (1 - p0)
            const double frac = mu / (theta + mu);
            d_eta(i) = theta * (y - mu) / (theta + mu) - odds0 * theta * frac;
            d_theta += boost::math::digamma(y + theta) - digamma_theta + log_ratio + (mu - y) / (theta + mu) +
                       odds0 * (log_ratio + frac);
        }
    }
    if (gradient) {
        gradient->resize(beta.size() + 1);
        gradient->head(beta.size()) = d.x.transpose() * d_eta;
        (*gradient)(beta.size()) = theta * d_theta;
    }
    return ll;
}

HurdleFit fit_ztnb(const DesignMatrix& d, double theta_init, const FitOptions& opts) {
    const std::size_t n = d.rows();
    if (n == 0) throw PreconditionError("ztnb fit on zero rows");
    for (Eigen::Index i = 0; i < d.y.size(); ++i)
        if (!(d.y(i) >= 1.0)) throw PreconditionError("zero-truncated model requires every outcome >= 1");
    if (!(theta_init > 0)) throw PreconditionError("theta_init must be positive");
    check_rank(d);

    const Eigen::Index p = static_cast<Eigen::Index>(d.cols());
    const double inv_n = 1.0 / static_cast<double>(n);
    // Minimize f = -LL / n over params = (beta, log theta).
    auto objective = [&](const Eigen::VectorXd& params, Eigen::VectorXd& g) {
        Eigen::VectorXd grad;
        const double ll = ztnb_log_likelihood(d, params.head(p), params(p), &grad);
        g = -grad * inv_n;
        return -ll * inv_n;
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(p + 1);
    x(0) = std::log(d.y.mean());
    x(p) = std::log(theta_init);

    HurdleFit fit;
    fit.stage = Stage::ztnb;
    fit.columns = d.columns;
    fit.rows = n;

    Eigen::VectorXd g;
    double f = objective(x, g);
    if (!std::isfinite(f)) throw ConvergenceError("ztnb objective is not finite at the starting point");
    fit.trace.push_back(-f * static_cast<double>(n));
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(p + 1, p + 1);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    bool fresh = true;
    bool converged = false;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        if (g.norm() <= opts.gradient_tol) {
            converged = true;
            break;
        }
        Eigen::VectorXd dir = -hinv * g;
        if (dir.dot(g) >= 0) {
            hinv.setIdentity();
            fresh = true;
            dir = -g;
        }
        const double slope = dir.dot(g);
        double step = 1.0;
        Eigen::VectorXd xn, gn;
        double fn = 0;
        bool accepted = false;
        for (int h = 0; h < 60; ++h, step *= 0.5) {
            xn = x + step * dir;
            fn = objective(xn, gn);
            if (!std::isfinite(fn)) continue;
            const bool armijo = fn < f && fn <= f + 1e-4 * step * slope;
            // Near the optimum f changes below its rounding error; a step that
            // keeps f flat and shrinks the gradient still makes progress.
            const bool flat = std::abs(fn - f) <= 8 * eps * std::abs(f) && gn.norm() < 0.5 * g.norm();
            if (armijo || flat) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!fresh) {
                hinv.setIdentity();
                fresh = true;
                continue;
            }
            converged = g.norm() <= 1e3 * opts.gradient_tol;
            break;
        }
        const Eigen::VectorXd s = xn - x;
        const Eigen::VectorXd yv = gn - g;
        const double sy = s.dot(yv);
        if (sy > 1e-300) {
            if (fresh) hinv *= sy / yv.squaredNorm();
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p + 1, p + 1);
            hinv = (I - rho * s * yv.transpose()) * hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
            fresh = false;
        }
        x = xn;
        f = fn;
        g = gn;
        fit.trace.push_back(-f * static_cast<double>(n));
    }
    if (!converged) {
        throw ConvergenceError("ztnb fit did not converge in " + std::to_string(iter) +
                                   " iterations (last log-likelihood " + std::to_string(-f * static_cast<double>(n)) + ")",
                               fit.trace);
    }
    fit.coefficients = x.head(p);
    fit.theta = std::exp(x(p));
    Eigen::VectorXd grad;
    fit.log_likelihood = ztnb_log_likelihood(d, fit.coefficients, x(p), &grad);
    fit.iterations = iter;
    fit.gradient_norm = scaled_norm(grad, n);
    return fit;
}

LrtResult lrt(const HurdleFit& full, const HurdleFit& reduced) {
    if (full.stage != reduced.stage) throw PreconditionError("lrt: fits come from different stages");
    if (full.rows != reduced.rows) throw PreconditionError("lrt: fits use different rows");
    for (const auto& c : reduced.columns)
        if (std::find(full.columns.begin(), full.columns.end(), c) == full.columns.end())
            throw PreconditionError("lrt: reduced model column '" + c + "' is not in the full model");
    if (full.log_likelihood < reduced.log_likelihood - 1e-6)
        throw ConvergenceError("lrt: full model fits worse than the nested model (optimization failure)");
    LrtResult r;
    r.df = static_cast<int>(full.columns.size()) - static_cast<int>(reduced.columns.size());
    r.statistic = std::max(0.0, 2.0 * (full.log_likelihood - reduced.log_likelihood));
    r.p = r.df > 0 ? stats::chi_square_sf(r.statistic, r.df) : 1.0;
    return r;
}

std::vector<FeatureSpec> default_feature_battery() {
    auto scaled = [](std::string name, double LinkFeatures::*field) {
        return FeatureSpec{std::move(name), "scale", false, [field](const LinkFeatures& r) { return r.*field; }};
    };
    auto position = [](Region region) {
        return FeatureSpec{std::string("position=") + to_string(region), "none", true,
                           [region](const LinkFeatures& r) { return r.region == region ? 1.0 : 0.0; }};
    };
    return {
        scaled("trg_degree", &LinkFeatures::trg_degree),
        scaled("trg_in_degree", &LinkFeatures::trg_in_degree),
        scaled("trg_out_degree", &LinkFeatures::trg_out_degree),
        scaled("trg_kcore", &LinkFeatures::trg_kcore),
        scaled("trg_pagerank", &LinkFeatures::trg_pagerank),
        scaled("text_sim", &LinkFeatures::text_sim),
        scaled("topic_sim", &LinkFeatures::topic_sim),
        position(Region::lead),
        position(Region::body),
        position(Region::left_body),
        position(Region::right_body),
        position(Region::infobox),
        position(Region::navbox),
        scaled("screen_x_coord", &LinkFeatures::x_coord),
        scaled("screen_y_coord", &LinkFeatures::y_coord),
    };
}

namespace {

template <typename Fitter>
StageResult run_stage(const DesignMatrix& full, const std::string& feature, Fitter fitter) {
    StageResult r;
    r.rows = full.rows();
    try {
        const std::vector<std::string> none;
        const HurdleFit reduced_fit = fitter(select_columns(full, none));
        const HurdleFit full_fit = fitter(full);
        r.coefficient = full_fit.coefficient(feature);
        r.theta = full_fit.theta;
        r.test = lrt(full_fit, reduced_fit);
        r.aic = full_fit.aic();
        r.bic = full_fit.bic();
        r.ok = true;
    } catch (const Error& e) {
        r.error = e.what();
    }
    return r;
}

} // namespace

std::vector<FeatureModelReport> run_feature_battery(const LinkFeatureTable& table, std::uint64_t threshold,
                                                    std::span<const FeatureSpec> features, unsigned threads) {
    const HurdleSplit split = split_hurdle(table, threshold);
    std::vector<NodeId> groups;
    for (const auto& r : table.rows) groups.push_back(r.src);

    std::vector<FeatureModelReport> out(features.size());
    detail::parallel_for(features.size(), threads, [&](std::size_t k) {
        const auto& spec = features[k];
        FeatureColumn col{spec.name, {}, spec.binary};
        col.values.reserve(table.rows.size());
        for (const auto& r : table.rows) col.values.push_back(spec.extract(r));

        FeatureModelReport rep{spec.name, spec.transformation, {}, {}};
        try {
            const DesignMatrix all = make_design(std::span(&col, 1), split.binary_outcome, groups);
            rep.binomial = run_stage(all, spec.name, [](const DesignMatrix& d) { return fit_logistic(d); });
        } catch (const Error& e) {
            rep.binomial.error = e.what();
        }
        try {
            // Standardization uses the rows of the stage being fitted.
            FeatureColumn used{spec.name, {}, spec.binary};
            std::vector<NodeId> used_groups;
            for (auto i : split.count_rows) {
                used.values.push_back(col.values[i]);
                used_groups.push_back(groups[i]);
            }
            if (split.count_rows.empty()) throw PreconditionError("no links reach the hurdle threshold");
            const DesignMatrix counts = make_design(std::span(&used, 1), split.count_outcome, used_groups);
            rep.ztnb = run_stage(counts, spec.name, [](const DesignMatrix& d) { return fit_ztnb(d); });
        } catch (const Error& e) {
            rep.ztnb.error = e.what();
        }
        out[k] = std::move(rep);
    });
    return out;
}

void write_hurdle_report(std::ostream& out, std::span<const FeatureModelReport> reports, std::uint64_t threshold,
                         const std::string& header) {
    using textio::format_double;
    out << header;
    out << "# fixed-effects hurdle models, one feature at a time; threshold " << threshold << '\n';
    out << "# each row: full model (intercept + feature) vs intercept-only, likelihood-ratio chi-square test\n";
    out << "feature\ttransformation\tbinomial_coef\tbinomial_lrt\tbinomial_p\tbinomial_aic\tbinomial_bic\t"
           "ztnb_coef\tztnb_theta\tztnb_lrt\tztnb_p\tztnb_aic\tztnb_bic\tstatus\n";
    for (const auto& r : reports) {
        out << r.feature << '\t' << r.transformation;
        auto stage = [&](const StageResult& s, bool with_theta) {
            if (s.ok) {
                out << '\t' << format_double(s.coefficient);
                if (with_theta) out << '\t' << format_double(s.theta);
                out << '\t' << format_double(s.test.statistic) << '\t' << format_double(s.test.p) << '\t'
                    << format_double(s.aic) << '\t' << format_double(s.bic);
            } else {
                out << "\tNA";
                if (with_theta) out << "\tNA";
                out << "\tNA\tNA\tNA\tNA";
            }
        };
        stage(r.binomial, false);
        stage(r.ztnb, true);
        std::string status;
        if (!r.binomial.ok) status += "binomial failed: " + r.binomial.error;
        if (!r.ztnb.ok) status += std::string(status.empty() ? "" : "; ") + "ztnb failed: " + r.ztnb.error;
        for (auto& ch : status)
            if (ch == '\t' || ch == '\n') ch = ' ';
        out << '\t' << (status.empty() ? "ok" : status) << '\n';
    }
}

} // namespace wikinav
