#include "siren/numeric.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "siren/error.hpp"

namespace siren {

namespace {

constexpr std::size_t kBlock = 16;

template <typename Get>
double cascade(std::size_t begin, std::size_t end, const Get& get) noexcept {
    const std::size_t n = end - begin;
    if (n <= kBlock) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += get(i);
        return s;
    }
    const std::size_t mid = begin + n / 2;
    return cascade(begin, mid, get) + cascade(mid, end, get);
}

}  // namespace

double pairwise_sum(std::span<const double> values) noexcept {
    return cascade(0, values.size(), [&](std::size_t i) { return values[i]; });
}

double gathered_mean(std::span<const double> values, std::span<const std::uint32_t> idx) noexcept {
    if (idx.empty()) return 0.0;
    const double s = cascade(0, idx.size(), [&](std::size_t i) { return values[idx[i]]; });
    return s / static_cast<double>(idx.size());
}

double mean(std::span<const double> values) noexcept {
    if (values.empty()) return 0.0;
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) noexcept {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double mu = mean(values);
    const double ss = cascade(0, n, [&](std::size_t i) {
        const double d = values[i] - mu;
        return d * d;
    });
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double upper_quantile(std::vector<double>& values, double p) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level outside (0, 1]");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    // The tolerance keeps n * p from rounding up past an exact integer
    // (2000 * 0.95 is 1900.0000000000002 in binary).
    auto rank = static_cast<std::size_t>(std::ceil(n * p - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double student_t_quantile(double p, double dof) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

}  // namespace siren
