#include "dgnn/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace dgnn {

double ChannelParams::noise_power_w() const {
  const double noise_dbm = noise_dbm_per_hz + 10.0 * std::log10(bandwidth_hz);
  return std::pow(10.0, noise_dbm / 10.0) / 1000.0;
}

double ChannelParams::pathloss_db(double distance_m) const {
  if (!(distance_m > 0.0)) throw std::invalid_argument("pathloss: distance must be positive");
  return pathloss_intercept_db + pathloss_slope_db * std::log10(distance_m / 1000.0);
}

double LinkBudget::mean_sinr() const {
  return tx_power_w * std::pow(10.0, -(pathloss_db + shadowing_db) / 10.0) / noise_power_w;
}

LinkBudget make_link_budget(const ChannelParams& params, double distance_m, double shadowing_db) {
  LinkBudget b;
  b.distance_m = distance_m;
  b.pathloss_db = params.pathloss_db(distance_m);
  b.shadowing_db = shadowing_db;
  b.tx_power_w = params.tx_power_w;
  b.noise_power_w = params.noise_power_w();
  return b;
}

double sinr_for_gain(const LinkBudget& budget, double fading_power) {
  return budget.mean_sinr() * fading_power;
}

double draw_sinr(const LinkBudget& budget, Rng& rng) {
  std::exponential_distribution<double> rayleigh_power(1.0);
  return sinr_for_gain(budget, rayleigh_power(rng));
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double bpsk_ber(double sinr) {
  if (sinr < 0.0) throw std::invalid_argument("bpsk_ber: negative SINR");
  return q_function(std::sqrt(2.0 * sinr));
}

ReceivedWord transmit_uncoded(const BitVector& truth, double ber, Rng& rng, std::size_t source) {
  if (ber < 0.0 || ber > 0.5) throw std::invalid_argument("transmit_uncoded: BER outside [0, 0.5]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ReceivedWord out{truth, source};
  for (Eigen::Index j = 0; j < out.bits.size(); ++j) {
    if (unit(rng) < ber) out.bits(j) ^= 1;
  }
  return out;
}

bool in_outage(double sinr, double rate_bps_hz) {
  if (!(rate_bps_hz > 0.0)) throw std::invalid_argument("outage: rate must be positive");
  return std::log2(1.0 + sinr) < rate_bps_hz;
}

std::optional<BitVector> decode_coded(const BitVector& truth, double sinr, double rate_bps_hz) {
  if (in_outage(sinr, rate_bps_hz)) return std::nullopt;
  return truth;
}

void LinkState::append(double sinr) {
  if (sinr < 0.0) throw std::invalid_argument("mrc_combine: negative SINR");
  history_.push_back(sinr);
  combined_ += sinr;
}

LinkState mrc_combine(LinkState state, double new_sinr) {
  state.append(new_sinr);
  return state;
}

}  // namespace dgnn
