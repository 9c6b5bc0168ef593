#include "adacos/normal.hpp"

#include <cmath>
#include <numbers>

namespace adacos {

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_sf(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double normal_interval(double lo, double hi) {
    if (!(lo < hi)) return 0.0;
    if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
    if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
    return 1.0 - normal_cdf(lo) - normal_sf(hi);
}

} // namespace adacos
