#include "dgnn/certify.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <string>

namespace dgnn {

namespace {

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

void check_view(const LocalView& view, const ErrorBound& bound, const GnnModel& model) {
  const auto p = model.theta.rows();
  if (view.self.size() != p) throw std::invalid_argument("certify: x_v length != p");
  if (view.received.rows() != static_cast<Eigen::Index>(view.degree())) {
    throw std::invalid_argument("certify: received rows do not match neighbor count");
  }
  if (view.degree() > 0 && view.received.cols() != p) {
    throw std::invalid_argument("certify: received row length != p");
  }
  if (bound.q.size() != view.degree()) {
    throw std::invalid_argument("certify: error bound has " + std::to_string(bound.q.size()) +
                                " entries for " + std::to_string(view.degree()) + " neighbors");
  }
}

// Caches everything about a view that does not depend on the error budget:
// the exact pre-activation of the received view and, per (neighbor, hidden
// unit), prefix sums of the sorted per-bit increases/decreases.
class ViewCertifier {
 public:
  ViewCertifier(const LocalView& view, const GnnModel& model)
      : view_(view), model_(model), p_(static_cast<int>(model.theta.rows())),
        hidden_(static_cast<int>(model.theta.cols())), degree_(static_cast<int>(view.degree())) {
    self_term_ = (view.slice.self_weight * view.self.cast<double>().transpose() * model.theta)
                     .transpose();
    base_ = node_preactivation(view.slice, view.self, view.received, model);

    const std::size_t stride = static_cast<std::size_t>(p_ + 1);
    rise_.assign(static_cast<std::size_t>(degree_ * hidden_) * stride, 0.0);
    fall_.assign(rise_.size(), 0.0);
    std::vector<double> up(static_cast<std::size_t>(p_));
    std::vector<double> down(static_cast<std::size_t>(p_));
    for (int u = 0; u < degree_; ++u) {
      for (int i = 0; i < hidden_; ++i) {
        for (int j = 0; j < p_; ++j) {
          const double t = model.theta(j, i);
          const bool bit = view.received(u, j) != 0;
          // Flipping bit j moves the pre-activation by +|t| (rise) or -|t| (fall).
          up[static_cast<std::size_t>(j)] = bit ? neg_part(t) : pos_part(t);
          down[static_cast<std::size_t>(j)] = bit ? pos_part(t) : neg_part(t);
        }
        std::sort(up.begin(), up.end(), std::greater<>());
        std::sort(down.begin(), down.end(), std::greater<>());
        double* r = &rise_[index(u, i, 0)];
        double* f = &fall_[index(u, i, 0)];
        for (int k = 0; k < p_; ++k) {
          r[k + 1] = r[k] + up[static_cast<std::size_t>(k)];
          f[k + 1] = f[k] + down[static_cast<std::size_t>(k)];
        }
      }
    }
  }

  PreactBounds bounds(const ErrorBound& bound) const {
    PreactBounds b;
    b.upper = base_;
    b.lower = base_;
    for (int u = 0; u < degree_; ++u) {
      const int q = bound.q[static_cast<std::size_t>(u)];
      const double a = view_.slice.neighbor_weights(u);
      for (int i = 0; i < hidden_; ++i) {
        b.upper(i) += a * rise_[index(u, i, q)];
        b.lower(i) -= a * fall_[index(u, i, q)];
      }
    }
    b.regime.resize(static_cast<std::size_t>(hidden_));
    for (int i = 0; i < hidden_; ++i) {
      if (b.lower(i) > 0.0) {
        b.regime[static_cast<std::size_t>(i)] = ReluRegime::active;
      } else if (b.upper(i) < 0.0) {
        b.regime[static_cast<std::size_t>(i)] = ReluRegime::inactive;
      } else {
        b.regime[static_cast<std::size_t>(i)] = ReluRegime::mixed;
      }
    }
    return b;
  }

  Certificate certify(const ErrorBound& raw, Label predicted) const {
    const ErrorBound bound = clamp_bound(raw, p_);
    Certificate cert;
    cert.bounds = bounds(bound);
    const auto& ub = cert.bounds.upper;
    const auto& lb = cert.bounds.lower;
    const double c_hat = sign_of(predicted);

    cert.phi = Vector::Zero(hidden_);
    cert.alpha = Vector::Zero(hidden_);
    cert.constant = c_hat * model_.b;
    for (int i = 0; i < hidden_; ++i) {
      const double cw = c_hat * model_.w(i);
      switch (cert.bounds.regime[static_cast<std::size_t>(i)]) {
        case ReluRegime::active:
          cert.alpha(i) = -cw;
          break;
        case ReluRegime::inactive:
          break;
        case ReluRegime::mixed: {
          const double width = ub(i) - lb(i);
          // u == l == 0 pins the unit at zero; it contributes nothing.
          if (width <= 0.0) break;
          const double ratio = ub(i) / width;
          cert.phi(i) = ratio;
          cert.alpha(i) = ratio * neg_part(cw) - cert.phi(i) * pos_part(cw);
          cert.constant += ub(i) * lb(i) / width * neg_part(cw);
          break;
        }
      }
    }

    // Coupling of the neighbor bits with the pre-activation multiplier:
    // coupling[u, j] = a_v[u] * (theta alpha)[j].
    const Vector theta_alpha = model_.theta * cert.alpha;
    double z = cert.constant - cert.alpha.dot(self_term_);
    cert.slack = Matrix::Zero(degree_, p_);
    cert.omega = Matrix::Zero(degree_, p_);
    cert.beta = Vector::Zero(degree_);
    std::vector<double> row(static_cast<std::size_t>(p_));
    for (int u = 0; u < degree_; ++u) {
      const double a = view_.slice.neighbor_weights(u);
      for (int j = 0; j < p_; ++j) {
        const double coupling = a * theta_alpha(j);
        const bool bit = view_.received(u, j) != 0;
        if (bit) z -= coupling;
        cert.slack(u, j) = bit ? neg_part(coupling) : pos_part(coupling);
        row[static_cast<std::size_t>(j)] = cert.slack(u, j);
      }
      const int q = bound.q[static_cast<std::size_t>(u)];
      cert.beta(u) = kth_largest(row, q);
      for (int j = 0; j < p_; ++j) {
        cert.omega(u, j) = std::max(cert.slack(u, j) - cert.beta(u), 0.0);
      }
      z -= cert.omega.row(u).sum() + static_cast<double>(q) * cert.beta(u);
    }
    cert.z_dot = z;
    cert.robust = z > 0.0;
    return cert;
  }

  int feature_dim() const { return p_; }

 private:
  std::size_t index(int u, int i, int k) const {
    return (static_cast<std::size_t>(u) * static_cast<std::size_t>(hidden_) +
            static_cast<std::size_t>(i)) *
               static_cast<std::size_t>(p_ + 1) +
           static_cast<std::size_t>(k);
  }

  const LocalView& view_;
  const GnnModel& model_;
  int p_;
  int hidden_;
  int degree_;
  Vector self_term_;
  Vector base_;
  std::vector<double> rise_;
  std::vector<double> fall_;
};

}  // namespace

ErrorBound clamp_bound(ErrorBound bound, int p) {
  for (int& q : bound.q) q = std::clamp(q, 0, p);
  return bound;
}

std::size_t PreactBounds::count(ReluRegime r) const {
  return static_cast<std::size_t>(std::count(regime.begin(), regime.end(), r));
}

double kth_largest(std::vector<double> values, int k) {
  if (values.empty()) throw std::invalid_argument("kth_largest: empty input");
  if (k <= 0) return *std::max_element(values.begin(), values.end());
  const auto n = static_cast<int>(values.size());
  if (k > n) throw std::invalid_argument("kth_largest: k exceeds input length");
  auto nth = values.begin() + (k - 1);
  std::nth_element(values.begin(), nth, values.end(), std::greater<>());
  return *nth;
}

PreactBounds preactivation_bounds(const LocalView& view, const ErrorBound& bound,
                                  const GnnModel& model) {
  check_view(view, bound, model);
  ViewCertifier certifier(view, model);
  return certifier.bounds(clamp_bound(bound, certifier.feature_dim()));
}

Certificate dual_certificate(const LocalView& view, const ErrorBound& bound, Label predicted,
                             const GnnModel& model) {
  check_view(view, bound, model);
  return ViewCertifier(view, model).certify(bound, predicted);
}

std::uint64_t oracle_pattern_count(const ErrorBound& bound, int p) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  for (int q : clamp_bound(bound, p).q) {
    // sum_{k <= q} C(p, k), built incrementally; C(p, k) <= 2^p fits for p < 64.
    std::uint64_t row = 0;
    std::uint64_t binom = 1;
    bool overflow = false;
    for (int k = 0; k <= q; ++k) {
      if (k > 0) {
        const auto num = static_cast<std::uint64_t>(p - k + 1);
        if (binom > kMax / num) {
          overflow = true;
          break;
        }
        binom = binom * num / static_cast<std::uint64_t>(k);
      }
      if (row > kMax - binom) {
        overflow = true;
        break;
      }
      row += binom;
    }
    if (overflow || (row != 0 && total > kMax / row)) return kMax;
    total *= row;
  }
  return total;
}

OracleResult brute_force_margin(const LocalView& view, const ErrorBound& raw, Label predicted,
                                const GnnModel& model, std::uint64_t cap) {
  check_view(view, raw, model);
  const int p = static_cast<int>(model.theta.rows());
  const ErrorBound bound = clamp_bound(raw, p);
  const std::uint64_t count = oracle_pattern_count(bound, p);
  if (count > cap) {
    throw OracleTooLarge("instance too large for oracle: " + std::to_string(count) +
                         " patterns exceed cap " + std::to_string(cap));
  }

  const double c_hat = sign_of(predicted);
  const int degree = static_cast<int>(view.degree());
  OracleResult result;
  result.min_margin = std::numeric_limits<double>::infinity();

  // delta[u][j]: change of the pre-activation when bit j of neighbor row u flips.
  std::vector<std::vector<Vector>> delta(static_cast<std::size_t>(degree));
  for (int u = 0; u < degree; ++u) {
    for (int j = 0; j < p; ++j) {
      const double dir = view.received(u, j) ? -1.0 : 1.0;
      delta[static_cast<std::size_t>(u)].push_back(dir * view.slice.neighbor_weights(u) *
                                                   model.theta.row(j).transpose());
    }
  }

  const Vector base = node_preactivation(view.slice, view.self, view.received, model);
  auto visit = [&](auto&& self, int u, int start, int left, const Vector& pre) -> void {
    if (u == degree) {
      const double margin = pre.cwiseMax(0.0).dot(model.w) + model.b;
      ++result.patterns;
      result.min_margin = std::min(result.min_margin, c_hat * margin);
      if (label_from_margin(margin) != predicted) result.label_stable = false;
      return;
    }
    // Stop flipping in row u and move on.
    const int next_budget = u + 1 < degree ? bound.q[static_cast<std::size_t>(u + 1)] : 0;
    self(self, u + 1, 0, next_budget, pre);
    if (left == 0) return;
    for (int j = start; j < p; ++j) {
      self(self, u, j + 1, left - 1, Vector(pre + delta[static_cast<std::size_t>(u)][j]));
    }
  };
  visit(visit, 0, 0, degree > 0 ? bound.q[0] : 0, base);
  return result;
}

RadiusResult solve_q_upper(const LocalView& view, Label predicted, const GnnModel& model) {
  const ErrorBound zero = ErrorBound::uniform(view.degree(), 0);
  check_view(view, zero, model);
  ViewCertifier certifier(view, model);
  const int p = certifier.feature_dim();
  RadiusResult result;
  auto certified = [&](int q) {
    ++result.certificate_evaluations;
    return certifier.certify(ErrorBound::uniform(view.degree(), q), predicted).robust;
  };

  if (!certified(0)) return result;
  int lo = 0;
  if (certified(p)) {
    lo = p;
  } else {
    int hi = p;  // invariant: certified(lo) && !certified(hi)
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      (certified(mid) ? lo : hi) = mid;
    }
  }
  // Every smaller uniform budget must certify too.
  for (int q = 1; q < lo; ++q) {
    if (!certified(q)) {
      result.monotonicity_violation = true;
      lo = q - 1;
      break;
    }
  }
  result.q_upper = lo;
  return result;
}

}  // namespace dgnn
