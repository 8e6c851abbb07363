#pragma once

#include "swifeed/inp.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace swifeed {

inline constexpr int kMinSf = 7;
inline constexpr int kMaxSf = 12;
inline constexpr std::size_t kSfCount = kMaxSf - kMinSf + 1;

inline std::size_t sf_slot(int sf) { return static_cast<std::size_t>(sf - kMinSf); }

struct RadioConfig {
    double bandwidth_hz = 125000.0;
    int coding_rate = 1;  // 4/(4 + coding_rate)
    int preamble_symbols = 8;
    bool explicit_header = true;
    int payload_bytes = 20;
    double tx_power_dbm = 14.0;
    std::vector<double> channels_hz = {868.1e6, 868.3e6, 868.5e6};
    double duty_cycle_limit = 0.01;
    // Indexed by SF - 7.
    std::array<double, kSfCount> sensitivity_dbm = {-123.0, -126.0, -129.0, -132.0, -134.5, -137.0};
    std::array<double, kSfCount> required_snr_db = {-7.5, -10.0, -12.5, -15.0, -17.5, -20.0};
    double adr_margin_db = 10.0;
    double capture_threshold_db = 6.0;

    double sensitivity(int sf) const { return sensitivity_dbm[sf_slot(sf)]; }

    /// Throws Error{InvalidConfig} on any out-of-range field.
    void validate() const;
};

/// LoRa time on air in seconds. Low-data-rate optimization is enabled
/// whenever the symbol time exceeds 16 ms (SF11 and SF12 at 125 kHz).
/// Throws Error{InvalidSf} or Error{InvalidConfig}.
double airtime(int sf, const RadioConfig& cfg);

/// Log-distance path loss with optional log-normal shadowing.
struct PathLossModel {
    double reference_loss_db = 128.95;
    double reference_distance_m = 1000.0;
    double exponent = 2.32;
    double shadowing_sigma_db = 0.0;
    double min_distance_m = 1.0;

    /// Deterministic part; distances below min_distance_m are clamped.
    double loss_db(double distance_m) const;

    void validate() const;
};

inline double rssi(double tx_dbm, double loss_db) { return tx_dbm - loss_db; }

/// Received power [device][gateway] in dBm. Shadowing (when sigma > 0) is
/// drawn once per device-gateway pair from a stream keyed by `seed`.
std::vector<std::vector<double>> link_rssi(std::span<const Point> devices,
                                           std::span<const Point> gateways,
                                           const RadioConfig& radio, const PathLossModel& model,
                                           std::uint64_t seed);

struct AdrDecision {
    int sf = kMaxSf;
    bool marginal = false;  // no SF satisfied the margin; SF12 assigned anyway
    double best_rssi_dbm = 0.0;
    std::size_t best_gateway = 0;
};

/// Smallest SF whose sensitivity is at or below (best RSSI - margin).
/// Throws Error{NoGateways} on an empty row.
AdrDecision adr_assign(std::span<const double> rssi_per_gateway, const RadioConfig& cfg);

}  // namespace swifeed
