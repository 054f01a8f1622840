#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dgnn/gnn.hpp"
#include "dgnn/graph.hpp"
#include "dgnn/types.hpp"

namespace dgnn {

// Everything node v knows when it verifies its own prediction: its filter
// slice, its own feature bits, and the (possibly corrupted) neighbor rows.
struct LocalView {
  SlicedFilter slice;
  BitVector self;
  BitMatrix received;  // one row per neighbor, aligned with neighbors(v)

  std::size_t degree() const { return slice.degree(); }
};

// Per-neighbor cap on the number of corrupted bits, aligned with neighbors(v).
struct ErrorBound {
  std::vector<int> q;

  static ErrorBound uniform(std::size_t degree, int budget) {
    return ErrorBound{std::vector<int>(degree, budget)};
  }
};

// Clamp every entry into [0, p].
ErrorBound clamp_bound(ErrorBound bound, int p);

enum class ReluRegime : std::uint8_t { active, inactive, mixed };

// Interval bounds l <= pre-activation <= u over every admissible corruption,
// plus the ReLU regime of each hidden unit.
struct PreactBounds {
  Vector upper;
  Vector lower;
  std::vector<ReluRegime> regime;

  std::size_t count(ReluRegime r) const;
};

PreactBounds preactivation_bounds(const LocalView& view, const ErrorBound& bound,
                                  const GnnModel& model);

// Lower bound on min c_hat (h . w + b) over the relaxed feasible set,
// evaluated at the closed-form dual point (phi on the mixed units, beta as
// the q-th largest dual slack per neighbor).
struct Certificate {
  double z_dot = 0.0;
  bool robust = false;  // z_dot > 0
  PreactBounds bounds;
  Vector phi;      // D, in [0, 1]
  Vector alpha;    // D, multiplier on the pre-activation
  Matrix slack;    // |N(v)| x p dual slack
  Vector beta;     // |N(v)|, >= 0
  Matrix omega;    // max(slack - beta, 0)
  double constant = 0.0;
};

Certificate dual_certificate(const LocalView& view, const ErrorBound& bound, Label predicted,
                             const GnnModel& model);

// k-th largest entry (1-based, duplicates counted separately). k == 0 maps to
// the maximum.
double kth_largest(std::vector<double> values, int k);

class OracleTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultOracleCap = 2'000'000;

// Number of corruption patterns prod_u sum_{k <= q_u} C(p, k), saturating at
// UINT64_MAX.
std::uint64_t oracle_pattern_count(const ErrorBound& bound, int p);

struct OracleResult {
  double min_margin = 0.0;  // min over patterns of c_hat * (h . w + b)
  std::uint64_t patterns = 0;
  bool label_stable = true;  // every pattern predicts c_hat
};

// Exhaustive search over every binary neighbor matrix within Hamming distance
// q_u of each received row.
OracleResult brute_force_margin(const LocalView& view, const ErrorBound& bound, Label predicted,
                                const GnnModel& model, std::uint64_t cap = kDefaultOracleCap);

struct RadiusResult {
  std::optional<int> q_upper;  // nullopt when even q = 0 is not certified
  int certificate_evaluations = 0;
  bool monotonicity_violation = false;
};

// Largest uniform budget q in [0, p] with z_dot(q) > 0, by integer bisection.
// The answer is re-checked downward; if a smaller budget fails to certify the
// radius shrinks below it.
RadiusResult solve_q_upper(const LocalView& view, Label predicted, const GnnModel& model);

}  // namespace dgnn
