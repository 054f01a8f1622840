#include "dgnn/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgnn {

double binomial_cdf(int k, int n, double eps) {
  if (n < 0) throw std::invalid_argument("binomial_cdf: negative trial count");
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("binomial_cdf: probability outside [0, 1]");
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (eps == 0.0) return 1.0;
  if (eps == 1.0) return 0.0;
  const double log_eps = std::log(eps);
  const double log_keep = std::log1p(-eps);
  const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
  double sum = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double log_term = log_n_fact - std::lgamma(static_cast<double>(i) + 1.0) -
                            std::lgamma(static_cast<double>(n - i) + 1.0) + i * log_eps +
                            (n - i) * log_keep;
    sum += std::exp(log_term);
  }
  return std::min(sum, 1.0);
}

double robustness_probability(int q_upper, std::span<const double> bers, int p) {
  double prob = 1.0;
  for (double eps : bers) {
    if (eps < 0.0 || eps > 0.5) throw std::invalid_argument("robustness_probability: BER outside [0, 0.5]");
    prob *= binomial_cdf(q_upper, p, eps);
  }
  return prob;
}

BerBound solve_ber_bound(double p_target, std::size_t degree, int q_upper, int p) {
  if (degree == 0) throw std::invalid_argument("ber_bound: undefined for an isolated node");
  if (!(p_target > 0.0) || p_target > 1.0) throw std::invalid_argument("ber_bound: target outside (0, 1]");
  const double per_link = std::pow(p_target, 1.0 / static_cast<double>(degree));
  auto excess = [&](double eps) { return binomial_cdf(q_upper, p, eps) - per_link; };

  BerBound out;
  if (excess(0.5) >= 0.0) {
    out.ber = 0.5;
    out.residual = excess(0.5);
    return out;
  }
  // excess(lo) >= 0 > excess(hi); keep the feasible end so the returned BER
  // never overshoots the target.
  double lo = 0.0;
  double hi = 0.5;
  double lo_excess = excess(lo);
  while (lo_excess > kBerBoundTolerance * 1e-2 && out.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double e = excess(mid);
    ++out.iterations;
    if (e >= 0.0) {
      lo = mid;
      lo_excess = e;
    } else {
      hi = mid;
    }
  }
  out.ber = lo;
  out.residual = lo_excess;
  return out;
}

ErrorBound coded_error_bounds(const std::vector<bool>& outage, int p) {
  ErrorBound b;
  b.q.reserve(outage.size());
  for (bool lost : outage) b.q.push_back(lost ? p : 0);
  return b;
}

void zero_outage_rows(BitMatrix& received, const std::vector<bool>& outage) {
  if (static_cast<Eigen::Index>(outage.size()) != received.rows()) {
    throw std::invalid_argument("zero_outage_rows: flag count does not match rows");
  }
  for (std::size_t u = 0; u < outage.size(); ++u) {
    if (outage[u]) received.row(static_cast<Eigen::Index>(u)).setZero();
  }
}

}  // namespace dgnn
