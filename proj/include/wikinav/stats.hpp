#pragma once
// Small numeric helpers shared by several modules.

#include <cstddef>
#include <span>
#include <vector>

namespace wikinav::stats {

// Upper tail of the chi-square distribution (regularized upper incomplete gamma).
double chi_square_sf(double statistic, double df);

// Two-sided p-value of a Student t statistic.
double student_t_two_sided(double t, double df);

// Upper tail of the standard normal.
double normal_sf(double z);

// Ranks starting at 1; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation; NaN if either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

// ln Gamma(x) for x > 0; reentrant.
double log_gamma(double x);

// Deterministic pairwise (tree) summation.
double pairwise_sum(std::span<const double> x);

} // namespace wikinav::stats
