#pragma once

#include "swifeed/inp.hpp"
#include "swifeed/radio.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace swifeed {

enum class TrafficModel { poisson, periodic, scripted };

struct TrafficConfig {
    TrafficModel model = TrafficModel::poisson;
    double period_s = 300.0;
    // periodic: each nominal slot k*period + phase is offset by U(-jitter, +jitter)
    double jitter_s = 30.0;
    // scripted: explicit start times per device (duty cycle still applies)
    std::vector<std::vector<double>> scripted_times;
};

struct EnergyModel {
    double supply_voltage_v = 3.3;
    std::vector<std::pair<double, double>> tx_current_a = {{14.0, 0.028}};  // (dBm, A)
    double initial_battery_j = 10000.0;
    // Receive windows are off by default (TX-only ledger).
    bool include_rx_windows = false;
    double rx_current_a = 0.0108;
    int rx_windows = 2;

    /// Throws Error{InvalidConfig} when no current is configured for `dbm`.
    double tx_current(double dbm) const;

    /// Joules debited per uplink at `sf`.
    double energy_per_transmission(int sf, const RadioConfig& radio) const;

    void validate() const;
};

struct Device {
    std::string id;
    Point position;
};

struct SimulationInput {
    std::vector<Device> devices;
    std::vector<Point> gateways;
    RadioConfig radio;
    PathLossModel propagation;
    EnergyModel energy;
    TrafficConfig traffic;
    double horizon_s = 86400.0;
    std::uint64_t seed = 1;
    double battery_sample_interval_s = 3600.0;
    // Empty: ADR decides. One entry: applied to every device. Otherwise one per device.
    std::vector<int> forced_sf;
};

enum class Outcome { delivered, no_coverage, collided };

std::string_view to_string(Outcome outcome);

struct TransmissionRecord {
    double start_s = 0.0;
    std::size_t device = 0;
    std::size_t channel = 0;
    double channel_hz = 0.0;
    int sf = kMinSf;
    double airtime_s = 0.0;
    Outcome outcome = Outcome::no_coverage;
    std::optional<std::size_t> best_gateway;  // strongest gateway that kept a copy
    double best_rssi_dbm = 0.0;               // strongest received power at any gateway
};

struct DeviceCounters {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t lost_no_coverage = 0;
    std::uint64_t lost_collision = 0;
};

struct WirelessFeatures {
    std::vector<int> sf;  // assigned per device
    std::vector<bool> coverage_marginal;
    std::vector<double> best_rssi_dbm;
    std::vector<double> pdr;  // 0 for devices that never transmitted
    std::array<std::size_t, kSfCount> sf_histogram{};  // devices per SF
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    double pdr_total = 0.0;
    double mean_sf = 0.0;
};

struct BatterySample {
    double time_s = 0.0;
    std::size_t device = 0;
    double battery_j = 0.0;
};

struct EnergyReport {
    std::vector<double> device_j;
    double total_j = 0.0;
    std::vector<double> battery_end_j;
    std::vector<BatterySample> trajectory;
};

struct SimulationResult {
    WirelessFeatures features;
    EnergyReport energy;
    std::vector<DeviceCounters> counters;
    std::vector<TransmissionRecord> transmissions;  // start-time order
    std::vector<std::vector<double>> link_rssi;     // [device][gateway] dBm
};

/// Runs the uplink event loop. ADR assigns each device's SF once before
/// traffic starts. Identical input gives bit-identical output.
/// Throws Error{NoDevices, NoGateways, InvalidConfig}.
SimulationResult simulate(const SimulationInput& input);

// Flat CSV rows for the wireless datasets.
struct TransmissionRow {
    double time_s = 0.0;
    std::string device_id;
    double channel_hz = 0.0;
    int sf = kMinSf;
    double airtime_s = 0.0;
    std::optional<std::size_t> best_gw;
    double best_rssi_dbm = 0.0;
    std::string outcome;
};

struct EnergyRow {
    std::string device_id;
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t lost_no_coverage = 0;
    std::uint64_t lost_collision = 0;
    double energy_j = 0.0;
    double battery_end_j = 0.0;
};

struct BatteryRow {
    double time_s = 0.0;
    std::string device_id;
    double battery_j = 0.0;
};

struct WirelessTables {
    std::vector<TransmissionRow> transmissions;
    std::vector<EnergyRow> energy;
    std::vector<BatteryRow> battery;
};

WirelessTables tabulate(const SimulationResult& result, std::span<const Device> devices);

void write_transmissions_csv(std::ostream& out, const std::vector<TransmissionRow>& rows);
void write_energy_csv(std::ostream& out, const std::vector<EnergyRow>& rows);
void write_battery_csv(std::ostream& out, const std::vector<BatteryRow>& rows);

std::vector<TransmissionRow> read_transmissions_csv(std::istream& in);
std::vector<EnergyRow> read_energy_csv(std::istream& in);
std::vector<BatteryRow> read_battery_csv(std::istream& in);

/// Writes transmissions.csv, energy.csv and battery.csv into `dir`.
void export_wireless_csv(const WirelessTables& tables, const std::filesystem::path& dir,
                         bool include_transmissions = true);
WirelessTables load_wireless_csv(const std::filesystem::path& dir);

}  // namespace swifeed
