#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace siren {

// Pairwise (cascade) summation; the reduction tree depends only on the input
// length, so equal inputs give bitwise-equal sums.
double pairwise_sum(std::span<const double> values) noexcept;

// Mean of values[idx[0]], values[idx[1]], ... with pairwise summation.
double gathered_mean(std::span<const double> values, std::span<const std::uint32_t> idx) noexcept;

double mean(std::span<const double> values) noexcept;

// Sample standard deviation (divisor n - 1); 0 for n < 2.
double sample_sd(std::span<const double> values) noexcept;

// Nearest-rank upper quantile: the ceil(n * p)-th order statistic (1-based),
// clamped to [1, n]. Sorts `values` in place.
double upper_quantile(std::vector<double>& values, double p);

double normal_quantile(double p);
double student_t_quantile(double p, double dof);

}  // namespace siren
