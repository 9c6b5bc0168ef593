#pragma once

namespace adacos {

double normal_pdf(double x);
// Phi(x) through erfc, accurate in both tails.
double normal_cdf(double x);
// 1 - Phi(x).
double normal_sf(double x);
// P(lo < Z < hi) for standard normal Z; lo/hi may be infinite.
// Uses whichever tail keeps the subtraction well conditioned.
double normal_interval(double lo, double hi);

} // namespace adacos
