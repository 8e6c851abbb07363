#include "swifeed/radio.hpp"

#include "swifeed/error.hpp"
#include "swifeed/rng.hpp"

#include <cmath>
#include <string>

namespace swifeed {

void RadioConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (!(bandwidth_hz > 0.0)) {
        fail("bandwidth_hz must be positive");
    }
    if (coding_rate < 1 || coding_rate > 4) {
        fail("coding_rate must be in 1..4");
    }
    if (preamble_symbols < 0) {
        fail("preamble_symbols must be nonnegative");
    }
    if (payload_bytes < 1 || payload_bytes > 222) {
        fail("payload_bytes must be in [1, 222], got " + std::to_string(payload_bytes));
    }
    if (channels_hz.empty()) {
        fail("at least one channel is required");
    }
    if (!(duty_cycle_limit > 0.0 && duty_cycle_limit <= 1.0)) {
        fail("duty_cycle_limit must be in (0, 1]");
    }
    for (std::size_t i = 1; i < kSfCount; ++i) {
        if (!(sensitivity_dbm[i] < sensitivity_dbm[i - 1])) {
            fail("sensitivity must strictly decrease with SF");
        }
        if (!(required_snr_db[i] < required_snr_db[i - 1])) {
            fail("required SNR must strictly decrease with SF");
        }
    }
    if (!(capture_threshold_db >= 0.0)) {
        fail("capture_threshold_db must be nonnegative");
    }
}

double airtime(int sf, const RadioConfig& cfg) {
    if (sf < kMinSf || sf > kMaxSf) {
        throw Error(ErrorCode::InvalidSf, "spreading factor " + std::to_string(sf) +
                                              " outside [7, 12]");
    }
    cfg.validate();
    const double symbol_s = std::ldexp(1.0, sf) / cfg.bandwidth_hz;
    const int low_rate = symbol_s > 0.016 ? 1 : 0;
    const int header = cfg.explicit_header ? 0 : 1;
    const int numerator = 8 * cfg.payload_bytes - 4 * sf + 28 + 16 - 20 * header;
    const int denominator = 4 * (sf - 2 * low_rate);
    // Integer ceiling; numerator may be negative.
    int blocks = numerator / denominator;
    if (numerator % denominator != 0 && numerator > 0) {
        ++blocks;
    }
    const int payload_symbols = 8 + std::max(blocks * (cfg.coding_rate + 4), 0);
    return (cfg.preamble_symbols + 4.25) * symbol_s + payload_symbols * symbol_s;
}

double PathLossModel::loss_db(double distance_m) const {
    const double d = std::max(distance_m, min_distance_m);
    return reference_loss_db + 10.0 * exponent * std::log10(d / reference_distance_m);
}

void PathLossModel::validate() const {
    if (!(reference_distance_m > 0.0) || !(min_distance_m > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "path loss distances must be positive");
    }
    if (!(exponent > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "path loss exponent must be positive");
    }
    if (!(shadowing_sigma_db >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "shadowing sigma must be nonnegative");
    }
}

std::vector<std::vector<double>> link_rssi(std::span<const Point> devices,
                                           std::span<const Point> gateways,
                                           const RadioConfig& radio, const PathLossModel& model,
                                           std::uint64_t seed) {
    model.validate();
    std::vector<std::vector<double>> out(devices.size(), std::vector<double>(gateways.size()));
    for (std::size_t d = 0; d < devices.size(); ++d) {
        for (std::size_t g = 0; g < gateways.size(); ++g) {
            double loss = model.loss_db(distance(devices[d], gateways[g]));
            if (model.shadowing_sigma_db > 0.0) {
                RandomStream stream(derive_seed(seed, "shadowing", d, g));
                loss += model.shadowing_sigma_db * stream.normal();
            }
            out[d][g] = rssi(radio.tx_power_dbm, loss);
        }
    }
    return out;
}

AdrDecision adr_assign(std::span<const double> rssi_per_gateway, const RadioConfig& cfg) {
    if (rssi_per_gateway.empty()) {
        throw Error(ErrorCode::NoGateways, "ADR needs at least one gateway");
    }
    AdrDecision decision;
    decision.best_rssi_dbm = rssi_per_gateway[0];
    for (std::size_t g = 1; g < rssi_per_gateway.size(); ++g) {
        if (rssi_per_gateway[g] > decision.best_rssi_dbm) {
            decision.best_rssi_dbm = rssi_per_gateway[g];
            decision.best_gateway = g;
        }
    }
    const double budget = decision.best_rssi_dbm - cfg.adr_margin_db;
    for (int sf = kMinSf; sf <= kMaxSf; ++sf) {
        if (cfg.sensitivity(sf) <= budget) {
            decision.sf = sf;
            return decision;
        }
    }
    decision.sf = kMaxSf;
    decision.marginal = true;
    return decision;
}

}  // namespace swifeed
