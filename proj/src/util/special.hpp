#ifndef LINKMSE_UTIL_SPECIAL_HPP
#define LINKMSE_UTIL_SPECIAL_HPP

#include <span>

#include "util/rng.hpp"

namespace linkmse {

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a,b) and its complement.
double reg_inc_beta(double a, double b, double x);
double reg_inc_beta_c(double a, double b, double x);

// log of the mass a Beta(a,b) puts on [lo,1], i.e. log(B(a,b) * (1 - I_lo(a,b))).
double log_beta_mass_above(double a, double b, double lo);

// Inverse-CDF draw from Beta(a,b) restricted to [lo,1]. If the restricted mass
// underflows entirely the draw collapses to lo.
double sample_beta_truncated(Rng& rng, double a, double b, double lo);

double log_sum_exp(std::span<const double> log_vals);

}  // namespace linkmse

#endif
