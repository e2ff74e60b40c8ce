#include "wikinav/attention.hpp"

#include "textio.hpp"
#include "wikinav/error.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace wikinav {

TransitionHistogram transition_histogram(const TransitionLog& log) {
    TransitionHistogram h;
    std::vector<std::uint64_t> counts;
    counts.reserve(log.entries.size());
    for (const auto& e : log.entries) {
        ++h.frequency[e.count];
        counts.push_back(e.count);
        h.transitions += e.count;
    }
    h.links = counts.size();
    if (counts.empty()) return h;
    std::sort(counts.begin(), counts.end(), std::greater<>());
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        acc += counts[k];
        if (2 * acc >= h.transitions) {
            h.half_mass_links = k + 1;
            break;
        }
    }
    return h;
}

std::pair<DegreeDistribution, DegreeDistribution> outdegree_comparison(const LinkGraph& g, const TransitionLog& log) {
    std::vector<std::size_t> used(g.node_count(), 0);
    for (const auto& e : log.entries) ++used[e.src];
    DegreeDistribution wiki{NetworkTag::wiki, {}, 0}, trans{NetworkTag::trans, {}, 0};
    for (NodeId i = 0; i < g.node_count(); ++i) {
        if (used[i] == 0 || g.out_degree(i) == 0) continue;
        ++wiki.frequency[g.out_degree(i)];
        ++trans.frequency[used[i]];
        ++wiki.node_count;
        ++trans.node_count;
    }
    return {std::move(wiki), std::move(trans)};
}

double gini(std::span<const double> values) {
    if (values.empty()) throw PreconditionError("gini of an empty vector");
    std::vector<double> x(values.begin(), values.end());
    for (double v : x)
        if (v < 0 || !std::isfinite(v)) throw PreconditionError("gini requires finite nonnegative values");
    std::sort(x.begin(), x.end());
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    if (total <= 0) throw DegenerateInput("gini undefined: all values are zero");
    const double n = static_cast<double>(x.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * x[i];
    return weighted / (n * total);
}

GiniSummary article_gini(const LinkGraph& g, const TransitionLog& log, std::size_t bins) {
    GiniSummary s;
    s.histogram.assign(bins, 0);
    std::vector<double> counts;
    std::size_t cursor = 0;
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const auto row = g.out_neighbors(i);
        if (row.empty()) continue;
        counts.assign(row.size(), 0.0);
        while (cursor < log.entries.size() && log.entries[cursor].src < i) ++cursor;
        for (; cursor < log.entries.size() && log.entries[cursor].src == i; ++cursor) {
            const auto pos = std::lower_bound(row.begin(), row.end(), log.entries[cursor].trg) - row.begin();
            counts[static_cast<std::size_t>(pos)] = static_cast<double>(log.entries[cursor].count);
        }
        if (std::all_of(counts.begin(), counts.end(), [](double c) { return c == 0.0; })) {
            ++s.undefined;
            continue;
        }
        const double gval = gini(counts);
        s.per_article.emplace_back(i, gval);
        if (bins) {
            auto b = static_cast<std::size_t>(gval * static_cast<double>(bins));
            ++s.histogram[std::min(b, bins - 1)];
        }
    }
    return s;
}

const char* to_string(Family f) {
    switch (f) {
    case Family::power_law: return "power_law";
    case Family::truncated_power_law: return "truncated_power_law";
    case Family::lognormal: return "lognormal";
    case Family::exponential: return "exponential";
    }
    return "?";
}

std::vector<double> FamilyFit::param_values() const {
    std::vector<double> v;
    for (const auto& p : params) v.push_back(p.second);
    return v;
}

const FamilyFit& FitReport::fit(Family f) const {
    for (const auto& x : fits)
        if (x.family == f) return x;
    throw LookupError(std::string("no fit for family ") + to_string(f));
}

double hurwitz_zeta(double s, double q) {
    if (!(s > 1.0) || !(q > 0.0)) throw PreconditionError("hurwitz_zeta requires s > 1 and q > 0");
    // Euler-Maclaurin after N explicit terms.
    constexpr int N = 12;
    static constexpr double bernoulli[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
                                           -691.0 / 2730, 7.0 / 6, -3617.0 / 510};
    double sum = 0.0;
    for (int k = 0; k < N; ++k) sum += std::pow(q + k, -s);
    const double a = q + N;
    sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
    // term_j = B_2j / (2j)! * s(s+1)...(s+2j-2) * a^(-s-2j+1)
    double rising = s;        // s(s+1)...(s+2j-2)
    double factorial = 2.0;   // (2j)!
    double power = std::pow(a, -s - 1.0);
    for (int j = 1; j <= 8; ++j) {
        sum += bernoulli[j - 1] / factorial * rising * power;
        rising *= (s + 2 * j - 1) * (s + 2 * j);
        factorial *= (2.0 * j + 1) * (2.0 * j + 2);
        power /= a * a;
    }
    return sum;
}

namespace {

struct Tail {
    std::vector<std::pair<std::uint64_t, std::size_t>> values; // unique value, multiplicity
    double n = 0;
    double sum_log = 0;
    double sum_x = 0;
    std::uint64_t xmin = 1;
    std::uint64_t max_x = 0;
};

Tail make_tail(std::span<const std::uint64_t> samples, std::uint64_t xmin) {
    Tail t;
    t.xmin = xmin;
    std::map<std::uint64_t, std::size_t> m;
    for (auto x : samples)
        if (x >= xmin) ++m[x];
    for (const auto& [x, c] : m) {
        t.values.emplace_back(x, c);
        const double w = static_cast<double>(c);
        t.n += w;
        t.sum_log += w * std::log(static_cast<double>(x));
        t.sum_x += w * static_cast<double>(x);
        t.max_x = x;
    }
    return t;
}

constexpr double kWorst = 1e300;

double power_law_ll(const Tail& t, double alpha) {
    return -alpha * t.sum_log - t.n * std::log(hurwitz_zeta(alpha, static_cast<double>(t.xmin)));
}

// log sum_{x >= xmin} x^-alpha exp(-lambda x)
double tpl_log_normalizer(double alpha, double lambda, std::uint64_t xmin) {
    const double x0 = static_cast<double>(xmin);
    auto f = [&](double x) { return std::exp(-alpha * std::log(x) - lambda * (x - x0)); };
    constexpr std::uint64_t kExplicit = 4000;
    double sum = 0.0;
    std::uint64_t x = xmin;
    for (; x < xmin + kExplicit; ++x) {
        const double term = f(static_cast<double>(x));
        sum += term;
        if (term < 1e-18 * sum) return std::log(sum) - lambda * x0;
    }
    const double M = static_cast<double>(x);
    boost::math::quadrature::exp_sinh<double> integrator;
    const double integral = integrator.integrate([&](double u) { return f(u); }, M,
                                                 std::numeric_limits<double>::infinity(), 1e-12);
    const double fM = f(M);
    const double dfM = fM * (-alpha / M - lambda);
    sum += integral + 0.5 * fM - dfM / 12.0;
    return std::log(sum) - lambda * x0;
}

double tpl_ll(const Tail& t, double alpha, double lambda) {
    return -alpha * t.sum_log - lambda * t.sum_x - t.n * tpl_log_normalizer(alpha, lambda, t.xmin);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// log P(Z > z) for a standard normal Z, without underflow far in the tail.
double log_normal_sf(double z) {
    if (z < 25.0) return std::log(normal_sf(z));
    const double z2 = z * z;
    const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

// log P(a <= Z < b) for a standard normal Z, a < b.
double log_normal_interval(double a, double b) {
    if (a > 0) {
        const double la = log_normal_sf(a), lb = log_normal_sf(b);
        return la + std::log1p(-std::exp(lb - la));
    }
    const double lb = log_normal_sf(-b), la = log_normal_sf(-a); // log CDF(b), log CDF(a)
    return lb + std::log1p(-std::exp(la - lb));
}

double lognormal_ll(const Tail& t, double mu, double sigma) {
    const double lo = (std::log(static_cast<double>(t.xmin)) - mu) / sigma;
    const double log_norm = log_normal_sf(lo);
    double ll = 0.0;
    for (const auto& [x, c] : t.values) {
        const double a = (std::log(static_cast<double>(x)) - mu) / sigma;
        const double b = (std::log(static_cast<double>(x) + 1.0) - mu) / sigma;
        ll += static_cast<double>(c) * (log_normal_interval(a, b) - log_norm);
    }
    return ll;
}

double exponential_ll(const Tail& t, double lambda) {
    return t.n * std::log(-std::expm1(-lambda)) - lambda * (t.sum_x - t.n * static_cast<double>(t.xmin));
}

double finite_or_worst(double negll) { return std::isfinite(negll) ? negll : kWorst; }

template <typename F>
std::pair<double, double> minimize(F f, double lo, double hi) {
    std::uintmax_t iters = 200;
    return boost::math::tools::brent_find_minima(f, lo, hi, 40, iters);
}

constexpr double kAlphaLo = 1.0 + 1e-6, kAlphaHi = 8.0;

FamilyFit fit_power_law(const Tail& t) {
    FamilyFit fit;
    fit.family = Family::power_law;
    const auto [alpha, negll] = minimize([&](double a) { return finite_or_worst(-power_law_ll(t, a)); }, kAlphaLo, kAlphaHi);
    fit.params = {{"alpha", alpha}};
    fit.log_likelihood = -negll;
    return fit;
}

FamilyFit fit_truncated_power_law(const Tail& t) {
    FamilyFit fit;
    fit.family = Family::truncated_power_law;
    auto profile = [&](double log_lambda) {
        const double lambda = std::exp(log_lambda);
        return minimize([&](double a) { return finite_or_worst(-tpl_ll(t, a, lambda)); }, kAlphaLo, kAlphaHi);
    };
    const auto [log_lambda, negll] =
        minimize([&](double u) { return profile(u).second; }, std::log(1e-9), std::log(20.0));
    const double lambda = std::exp(log_lambda);
    const double alpha = profile(log_lambda).first;
    fit.params = {{"alpha", alpha}, {"lambda", lambda}};
    fit.log_likelihood = tpl_ll(t, alpha, lambda);
    (void)negll;
    return fit;
}

FamilyFit fit_lognormal(const Tail& t) {
    FamilyFit fit;
    fit.family = Family::lognormal;
    const double mu_hi = std::log(static_cast<double>(t.max_x)) + 10.0;
    auto profile = [&](double log_sigma) {
        const double sigma = std::exp(log_sigma);
        return minimize([&](double mu) { return finite_or_worst(-lognormal_ll(t, mu, sigma)); }, -60.0, mu_hi);
    };
    const auto [log_sigma, negll] =
        minimize([&](double u) { return profile(u).second; }, std::log(0.01), std::log(30.0));
    const double sigma = std::exp(log_sigma);
    const double mu = profile(log_sigma).first;
    fit.params = {{"mu", mu}, {"sigma", sigma}};
    fit.log_likelihood = lognormal_ll(t, mu, sigma);
    (void)negll;
    return fit;
}

FamilyFit fit_exponential(const Tail& t) {
    FamilyFit fit;
    fit.family = Family::exponential;
    const double excess = t.sum_x / t.n - static_cast<double>(t.xmin);
    if (!(excess > 0)) throw DegenerateInput("exponential fit: no mass above xmin");
    const double lambda = std::log1p(1.0 / excess);
    fit.params = {{"lambda", lambda}};
    fit.log_likelihood = exponential_ll(t, lambda);
    return fit;
}

std::size_t parameter_count(Family f) {
    return (f == Family::power_law || f == Family::exponential) ? 1 : 2;
}

} // namespace

double family_log_likelihood(Family f, std::span<const double> params, std::span<const std::uint64_t> samples,
                             std::uint64_t xmin) {
    const Tail t = make_tail(samples, xmin);
    if (params.size() != parameter_count(f)) throw PreconditionError("wrong parameter count for family");
    switch (f) {
    case Family::power_law: return power_law_ll(t, params[0]);
    case Family::truncated_power_law: return tpl_ll(t, params[0], params[1]);
    case Family::lognormal: return lognormal_ll(t, params[0], params[1]);
    case Family::exponential: return exponential_ll(t, params[0]);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

FitReport fit_distributions(std::span<const std::uint64_t> samples, std::uint64_t xmin) {
    if (xmin < 1) throw PreconditionError("xmin must be >= 1");
    const Tail tail = make_tail(samples, xmin);
    if (tail.n < 50)
        throw InsufficientData("need at least 50 samples >= xmin, got " + std::to_string(static_cast<std::size_t>(tail.n)));
    if (tail.values.size() < 2) throw DegenerateInput("all samples >= xmin are identical");

    FitReport report;
    report.xmin = xmin;
    report.tail_size = static_cast<std::size_t>(tail.n);

    using Fitter = FamilyFit (*)(const Tail&);
    const std::pair<Family, Fitter> fitters[] = {{Family::power_law, &fit_power_law},
                                                 {Family::truncated_power_law, &fit_truncated_power_law},
                                                 {Family::lognormal, &fit_lognormal},
                                                 {Family::exponential, &fit_exponential}};
    std::vector<std::future<FamilyFit>> jobs;
    for (const auto& [family, fitter] : fitters) {
        jobs.push_back(std::async(std::launch::async, [&tail, family = family, fitter = fitter] {
            try {
                FamilyFit f = fitter(tail);
                f.converged = std::isfinite(f.log_likelihood);
                if (!f.converged) f.failure = "non-finite log-likelihood at optimum";
                return f;
            } catch (const std::exception& e) {
                FamilyFit f;
                f.family = family;
                f.failure = e.what();
                return f;
            }
        }));
    }
    for (auto& j : jobs) report.fits.push_back(j.get());

    double best = std::numeric_limits<double>::infinity();
    for (auto& f : report.fits) {
        if (!f.converged) continue;
        f.aic = 2.0 * static_cast<double>(parameter_count(f.family)) - 2.0 * f.log_likelihood;
        if (f.aic < best) {
            best = f.aic;
            report.winner = f.family;
        }
    }
    for (auto& f : report.fits)
        if (f.converged) f.delta_aic = f.aic - best;
    return report;
}

void write_transition_histogram(std::ostream& out, const TransitionHistogram& h, const std::string& header) {
    out << header;
    out << "# links\t" << h.links << "\n# transitions\t" << h.transitions << "\n# half_mass_links\t"
        << (h.half_mass_links ? std::to_string(*h.half_mass_links) : "NA") << '\n';
    out << "transitions\tlinks\n";
    for (const auto& [c, f] : h.frequency) out << c << '\t' << f << '\n';
}

void write_degree_comparison(std::ostream& out, const DegreeDistribution& wiki, const DegreeDistribution& trans,
                             const std::string& header) {
    out << header;
    out << "# restricted to articles with at least one used out-link: " << wiki.node_count << '\n';
    out << "out_degree\twiki\ttrans\n";
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> merged;
    for (const auto& [d, f] : wiki.frequency) merged[d].first = f;
    for (const auto& [d, f] : trans.frequency) merged[d].second = f;
    for (const auto& [d, f] : merged) out << d << '\t' << f.first << '\t' << f.second << '\n';
}

void write_gini_histogram(std::ostream& out, const GiniSummary& s, const std::string& header) {
    out << header;
    out << "# articles\t" << s.per_article.size() << "\n# undefined (no used links)\t" << s.undefined << '\n';
    out << "bin_lo\tbin_hi\tarticles\n";
    const std::size_t bins = s.histogram.size();
    for (std::size_t b = 0; b < bins; ++b) {
        out << textio::format_double(static_cast<double>(b) / static_cast<double>(bins)) << '\t'
            << textio::format_double(static_cast<double>(b + 1) / static_cast<double>(bins)) << '\t' << s.histogram[b]
            << '\n';
    }
}

void write_fit_report(std::ostream& out, const std::string& title, const FitReport& r, const std::string& header) {
    using textio::format_double;
    out << header;
    out << "# " << title << '\n';
    out << "# selection\tAIC (discrete MLE per family; lowest AIC wins)\n";
    out << "# xmin\t" << r.xmin << "\n# tail_size\t" << r.tail_size << '\n';
    out << "# winner\t" << (r.winner ? to_string(*r.winner) : "none") << '\n';
    out << "family\tconverged\tlog_likelihood\taic\tdelta_aic\tparams\n";
    for (const auto& f : r.fits) {
        out << to_string(f.family) << '\t' << (f.converged ? "yes" : "no") << '\t';
        if (f.converged) {
            out << format_double(f.log_likelihood) << '\t' << format_double(f.aic) << '\t' << format_double(f.delta_aic)
                << '\t';
            for (std::size_t i = 0; i < f.params.size(); ++i)
                out << (i ? "," : "") << f.params[i].first << '=' << format_double(f.params[i].second);
        } else {
            out << "NA\tNA\tNA\tfailed: " << f.failure;
        }
        out << '\n';
    }
}

} // namespace wikinav
