#include "dgnn/retransmission.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dgnn/certify.hpp"
#include "dgnn/reliability.hpp"

namespace dgnn {

namespace {

constexpr std::uint64_t kShadowTag = 0x5348414430ULL;
constexpr std::uint64_t kFadeTag = 0x4641444530ULL;
constexpr std::uint64_t kBitsTag = 0x4249545330ULL;

// Link bookkeeping for one receiving node.
class Reception {
 public:
  Reception(std::size_t v, const Scenario& scenario, const LinkSampler& links)
      : v_(v), scenario_(scenario), links_(links), neighbors_(scenario.graph.neighbors(v)) {
    view_.slice = slice_filter(scenario.filter, v, scenario.graph);
    view_.self = scenario.features.row(static_cast<Eigen::Index>(v)).transpose();
    truth_ = gather_neighbor_rows(scenario.graph, v, scenario.features);
    view_.received = truth_;
    states_.resize(neighbors_.size());
    bers_.assign(neighbors_.size(), 0.5);
    outage_.assign(neighbors_.size(), false);
  }

  std::size_t degree() const { return neighbors_.size(); }
  int p() const { return static_cast<int>(scenario_.model.feature_dim()); }
  const LocalView& view() const { return view_; }
  const std::vector<double>& bers() const { return bers_; }
  const std::vector<bool>& outage() const { return outage_; }

  int total_rounds() const {
    int r = 1;
    for (const auto& s : states_) r = std::max(r, s.rounds());
    return r;
  }

  // One more uncoded copy from neighbor slot k, MRC-combined. The received
  // row is redrawn at the BER of the combined SINR.
  void receive_uncoded(std::size_t k) {
    const int round = states_[k].rounds() + 1;
    states_[k].append(links_.sinr(v_, neighbors_[k], round));
    bers_[k] = bpsk_ber(states_[k].combined_sinr());
    Rng bits = links_.bit_stream(v_, neighbors_[k], round);
    const auto row = static_cast<Eigen::Index>(k);
    view_.received.row(row) =
        transmit_uncoded(truth_.row(row).transpose(), bers_[k], bits, neighbors_[k]).bits.transpose();
  }

  // One more coded copy; a lost packet leaves an all-zero row.
  void receive_coded(std::size_t k, double rate) {
    const int round = states_[k].rounds() + 1;
    states_[k].append(links_.sinr(v_, neighbors_[k], round));
    outage_[k] = in_outage(states_[k].combined_sinr(), rate);
    const auto row = static_cast<Eigen::Index>(k);
    if (outage_[k]) {
      view_.received.row(row).setZero();
    } else {
      view_.received.row(row) = truth_.row(row);
    }
  }

  NodeForward predict() const {
    return forward_node(view_.slice, view_.self, view_.received, scenario_.model);
  }

  void finish(NodeRun& run) const {
    run.rounds_per_neighbor.clear();
    for (const auto& s : states_) run.rounds_per_neighbor.push_back(s.rounds());
    run.total_rounds = total_rounds();
    if (!states_.empty()) {
      const double sum = std::accumulate(run.rounds_per_neighbor.begin(),
                                         run.rounds_per_neighbor.end(), 0.0);
      run.mean_link_rounds = sum / static_cast<double>(states_.size());
    }
  }

 private:
  std::size_t v_;
  const Scenario& scenario_;
  const LinkSampler& links_;
  std::span<const std::size_t> neighbors_;
  LocalView view_;
  BitMatrix truth_;
  std::vector<LinkState> states_;
  std::vector<double> bers_;
  std::vector<bool> outage_;
};

// Isolated nodes have nothing to receive: self-only prediction, one round.
NodeRun isolated_run(std::size_t v, const Reception& rx) {
  NodeRun run;
  run.node = v;
  run.label_initial = run.label_final = rx.predict().c;
  return run;
}

struct UncodedStatus {
  Label label;
  std::optional<int> q_upper;
  double probability;
};

UncodedStatus assess_uncoded(const Reception& rx, const GnnModel& model) {
  UncodedStatus s{rx.predict().c, std::nullopt, 0.0};
  s.q_upper = solve_q_upper(rx.view(), s.label, model).q_upper;
  if (s.q_upper) s.probability = robustness_probability(*s.q_upper, rx.bers(), rx.p());
  return s;
}

void check_rate(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("transmit data rate must be positive");
}

}  // namespace

FadingLinkSampler::FadingLinkSampler(const Graph& graph, ChannelParams params, std::uint64_t seed)
    : graph_(graph), params_(params), seed_(seed) {}

double FadingLinkSampler::shadowing_db(std::size_t v, std::size_t u) const {
  Rng rng = substream(seed_, kShadowTag, std::min(u, v), std::max(u, v));
  std::normal_distribution<double> shadow(0.0, params_.shadowing_std_db);
  return shadow(rng);
}

LinkBudget FadingLinkSampler::budget(std::size_t v, std::size_t u) const {
  return make_link_budget(params_, distance(graph_.position(v), graph_.position(u)),
                          shadowing_db(v, u));
}

double FadingLinkSampler::sinr(std::size_t v, std::size_t u, int round) const {
  Rng rng = substream(seed_, kFadeTag, v, u, round);
  return draw_sinr(budget(v, u), rng);
}

Rng FadingLinkSampler::bit_stream(std::size_t v, std::size_t u, int round) const {
  return substream(seed_, kBitsTag, v, u, round);
}

NodeRun run_uncoded_node(std::size_t v, const Scenario& scenario, const LinkSampler& links,
                         double p_target, int max_rounds) {
  Reception rx(v, scenario, links);
  if (rx.degree() == 0) return isolated_run(v, rx);

  NodeRun run;
  run.node = v;
  for (std::size_t k = 0; k < rx.degree(); ++k) rx.receive_uncoded(k);
  UncodedStatus status = assess_uncoded(rx, scenario.model);
  run.label_initial = status.label;
  run.robust_initial = status.probability >= p_target;

  while (status.probability < p_target) {
    if (rx.total_rounds() >= max_rounds) {
      run.truncated = true;
      break;
    }
    const double threshold =
        status.q_upper ? ber_bound(p_target, rx.degree(), *status.q_upper, rx.p()) : 0.0;
    std::vector<std::size_t> resend;
    for (std::size_t k = 0; k < rx.degree(); ++k) {
      if (rx.bers()[k] > threshold) resend.push_back(k);
    }
    // Zero margin on an error-free view: nothing left to retransmit.
    if (resend.empty() && !status.q_upper) break;
    // If every link met the threshold, each binomial factor would reach
    // p_target^(1/|N(v)|) and the loop would have exited.
    if (resend.empty()) {
      throw std::logic_error("uncoded retransmission stalled at node " + std::to_string(v) +
                             ": probability below target but no link above the BER bound");
    }
    for (std::size_t k : resend) rx.receive_uncoded(k);
    status = assess_uncoded(rx, scenario.model);
    ++run.iterations;
  }

  run.no_radius = !status.q_upper.has_value();
  run.label_final = status.label;
  run.metric = status.probability;
  rx.finish(run);
  return run;
}

NodeRun run_coded_node(std::size_t v, const Scenario& scenario, const LinkSampler& links,
                       double rate, int max_rounds) {
  check_rate(rate);
  Reception rx(v, scenario, links);
  if (rx.degree() == 0) return isolated_run(v, rx);

  NodeRun run;
  run.node = v;
  for (std::size_t k = 0; k < rx.degree(); ++k) rx.receive_coded(k, rate);
  Label label = rx.predict().c;
  Certificate cert = dual_certificate(rx.view(), coded_error_bounds(rx.outage(), rx.p()), label,
                                      scenario.model);
  run.label_initial = label;
  run.robust_initial = cert.robust;

  // z_dot == 0 carries no sign guarantee, so only a strictly positive value stops.
  while (!cert.robust) {
    if (rx.total_rounds() >= max_rounds) {
      run.truncated = true;
      break;
    }
    std::vector<std::size_t> resend;
    for (std::size_t k = 0; k < rx.degree(); ++k) {
      if (rx.outage()[k]) resend.push_back(k);
    }
    if (resend.empty()) {
      // Exact view and still not certified: the margin is zero.
      run.no_radius = true;
      break;
    }
    for (std::size_t k : resend) rx.receive_coded(k, rate);
    label = rx.predict().c;
    cert = dual_certificate(rx.view(), coded_error_bounds(rx.outage(), rx.p()), label,
                            scenario.model);
    ++run.iterations;
  }

  run.label_final = label;
  run.metric = cert.z_dot;
  rx.finish(run);
  return run;
}

NodeRun run_traditional_uncoded(std::size_t v, const Scenario& scenario, const LinkSampler& links,
                                double ber_threshold, int max_rounds) {
  Reception rx(v, scenario, links);
  if (rx.degree() == 0) return isolated_run(v, rx);

  NodeRun run;
  run.node = v;
  for (std::size_t k = 0; k < rx.degree(); ++k) rx.receive_uncoded(k);
  run.label_initial = rx.predict().c;
  auto worst = [&] { return *std::max_element(rx.bers().begin(), rx.bers().end()); };
  run.robust_initial = worst() <= ber_threshold;

  while (worst() > ber_threshold) {
    if (rx.total_rounds() >= max_rounds) {
      run.truncated = true;
      break;
    }
    std::vector<std::size_t> resend;
    for (std::size_t k = 0; k < rx.degree(); ++k) {
      if (rx.bers()[k] > ber_threshold) resend.push_back(k);
    }
    for (std::size_t k : resend) rx.receive_uncoded(k);
    ++run.iterations;
  }

  run.label_final = rx.predict().c;
  run.metric = worst();
  rx.finish(run);
  return run;
}

NodeRun run_traditional_coded(std::size_t v, const Scenario& scenario, const LinkSampler& links,
                              double rate, int max_rounds) {
  check_rate(rate);
  Reception rx(v, scenario, links);
  if (rx.degree() == 0) return isolated_run(v, rx);

  NodeRun run;
  run.node = v;
  for (std::size_t k = 0; k < rx.degree(); ++k) rx.receive_coded(k, rate);
  run.label_initial = rx.predict().c;
  auto lost = [&] {
    return static_cast<int>(std::count(rx.outage().begin(), rx.outage().end(), true));
  };
  run.robust_initial = lost() == 0;

  while (lost() > 0) {
    if (rx.total_rounds() >= max_rounds) {
      run.truncated = true;
      break;
    }
    std::vector<std::size_t> resend;
    for (std::size_t k = 0; k < rx.degree(); ++k) {
      if (rx.outage()[k]) resend.push_back(k);
    }
    for (std::size_t k : resend) rx.receive_coded(k, rate);
    ++run.iterations;
  }

  run.label_final = rx.predict().c;
  run.metric = static_cast<double>(lost());
  rx.finish(run);
  return run;
}

}  // namespace dgnn
