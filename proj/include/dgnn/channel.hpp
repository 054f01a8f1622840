#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dgnn/types.hpp"

namespace dgnn {

// Physical-layer constants. Defaults follow the reference simulation setup.
struct ChannelParams {
  double bandwidth_hz = 10e6;
  double noise_dbm_per_hz = -174.0;
  double pathloss_intercept_db = 128.1;
  double pathloss_slope_db = 37.6;  // per decade of distance in km
  double shadowing_std_db = 8.0;
  double tx_power_w = 0.1;

  double noise_power_w() const;
  double pathloss_db(double distance_m) const;
};

struct LinkBudget {
  double distance_m = 0.0;
  double pathloss_db = 0.0;
  double shadowing_db = 0.0;
  double tx_power_w = 0.0;
  double noise_power_w = 1.0;

  // SINR for unit fading power.
  double mean_sinr() const;
};

LinkBudget make_link_budget(const ChannelParams& params, double distance_m, double shadowing_db);

// gamma = P 10^(-(PL+S)/10) g / sigma^2 for a given fading power g.
double sinr_for_gain(const LinkBudget& budget, double fading_power);

// Fresh block-Rayleigh draw: g ~ Exp(1).
double draw_sinr(const LinkBudget& budget, Rng& rng);

// Q(x) = erfc(x / sqrt 2) / 2.
double q_function(double x);

// BPSK bit error rate Q(sqrt(2 gamma)).
double bpsk_ber(double sinr);

struct ReceivedWord {
  BitVector bits;
  std::size_t source = 0;
};

// Flips every bit independently with probability `ber`. Always consumes
// exactly one uniform per bit so flip patterns couple monotonically in `ber`.
ReceivedWord transmit_uncoded(const BitVector& truth, double ber, Rng& rng, std::size_t source = 0);

// Outage rule for a coded packet: decodable iff log2(1 + gamma) >= rate.
bool in_outage(double sinr, double rate_bps_hz);

// The decoded word, or nullopt when the packet is in outage.
std::optional<BitVector> decode_coded(const BitVector& truth, double sinr, double rate_bps_hz);

// Per-link SINR history under maximal-ratio combining.
class LinkState {
 public:
  void append(double sinr);

  const std::vector<double>& history() const { return history_; }
  double combined_sinr() const { return combined_; }
  int rounds() const { return static_cast<int>(history_.size()); }

 private:
  std::vector<double> history_;
  double combined_ = 0.0;
};

LinkState mrc_combine(LinkState state, double new_sinr);

}  // namespace dgnn
