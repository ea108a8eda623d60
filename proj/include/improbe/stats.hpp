#pragma once

#include <span>
#include <vector>

namespace improbe::stats {

double mean(std::span<const double> v);
// n-1 denominator; 0 for fewer than two values.
double sample_sd(std::span<const double> v);

// Upper quantile of Student's t with `df` degrees of freedom.
double t_quantile(double p, double df);
// Two-sided tail probability P(|T| >= |t|).
double t_two_sided_p(double t, double df);
// Two-sided tail probability P(|Z| >= |z|) for a standard normal.
double normal_two_sided_p(double z);

// Half-width of the 95% interval of the mean: t(0.975, n-1) * sd / sqrt(n).
double ci95_half_width(std::span<const double> v);

// 1-based ranks, ties receive the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> v);

}  // namespace improbe::stats
