#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dgnn/certify.hpp"
#include "dgnn/types.hpp"

namespace dgnn {

// P(Binomial(n, eps) <= k), summed from log-domain terms.
double binomial_cdf(int k, int n, double eps);

// prod_u P(Binomial(p, eps_u) <= q_upper). Empty product is 1.
double robustness_probability(int q_upper, std::span<const double> bers, int p);

struct BerBound {
  double ber = 0.5;
  double residual = 0.0;  // cdf(ber) - target^(1/degree), always >= 0
  int iterations = 0;
};

inline constexpr double kBerBoundTolerance = 1e-10;

// Largest per-link BER eps in [0, 0.5] with
//   P(Binomial(p, eps) <= q_upper) >= p_target^(1/degree),
// located by bisection on the strictly decreasing CDF. Returns 0.5 when the
// CDF at 0.5 already meets the target.
BerBound solve_ber_bound(double p_target, std::size_t degree, int q_upper, int p);

inline double ber_bound(double p_target, std::size_t degree, int q_upper, int p) {
  return solve_ber_bound(p_target, degree, q_upper, p).ber;
}

// Coded links: q_u = p where the packet was lost, 0 where it decoded.
ErrorBound coded_error_bounds(const std::vector<bool>& outage, int p);

// Lost packets are replaced by the all-zero word.
void zero_outage_rows(BitMatrix& received, const std::vector<bool>& outage);

}  // namespace dgnn
