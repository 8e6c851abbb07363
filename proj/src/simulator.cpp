#include "swifeed/simulator.hpp"

#include "swifeed/csv.hpp"
#include "swifeed/error.hpp"
#include "swifeed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <queue>

namespace swifeed {

double EnergyModel::tx_current(double dbm) const {
    for (const auto& [power, current] : tx_current_a) {
        if (power == dbm) {
            return current;
        }
    }
    throw Error(ErrorCode::InvalidConfig,
                "no TX current configured for " + csv::format_number(dbm) + " dBm");
}

double EnergyModel::energy_per_transmission(int sf, const RadioConfig& radio) const {
    double joules = supply_voltage_v * tx_current(radio.tx_power_dbm) * airtime(sf, radio);
    if (include_rx_windows && rx_windows > 0) {
        // Each window stays open for the preamble detection time: RX1 at the
        // uplink SF, RX2 at SF12.
        const double rx1 = (radio.preamble_symbols + 4.25) * std::ldexp(1.0, sf) / radio.bandwidth_hz;
        const double rx2 =
            (radio.preamble_symbols + 4.25) * std::ldexp(1.0, kMaxSf) / radio.bandwidth_hz;
        const double open_s = rx1 + (rx_windows > 1 ? rx2 : 0.0);
        joules += supply_voltage_v * rx_current_a * open_s;
    }
    return joules;
}

void EnergyModel::validate() const {
    if (!(supply_voltage_v > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "supply voltage must be positive");
    }
    if (!(initial_battery_j >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "initial battery must be nonnegative");
    }
    for (const auto& [power, current] : tx_current_a) {
        if (!(current > 0.0)) {
            throw Error(ErrorCode::InvalidConfig, "TX current must be positive");
        }
    }
    if (rx_windows < 0 || rx_windows > 2 || !(rx_current_a >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "invalid receive window settings");
    }
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::delivered: return "delivered";
    case Outcome::no_coverage: return "no_coverage";
    case Outcome::collided: return "collided";
    }
    return "?";
}

namespace {

enum class EventKind : int { tx_end = 0, battery_sample = 1, tx_start = 2 };

struct Event {
    double time;
    EventKind kind;
    std::size_t device;
    std::size_t record;  // tx_end only
    std::uint64_t seq;
};

// Min-heap order: time, then kind (ends before samples before starts), then device.
struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        if (a.device != b.device) return a.device > b.device;
        return a.seq > b.seq;
    }
};

struct DeviceState {
    RandomStream traffic;
    int sf = kMinSf;
    std::size_t slot = 0;  // next nominal transmission index
    double phase = 0.0;
    std::array<std::uint64_t, kSfCount> sent_per_sf{};
    bool halted = false;

    explicit DeviceState(std::uint64_t seed) : traffic(seed) {}
};

void validate_traffic(const TrafficConfig& traffic, std::size_t devices) {
    if (!(traffic.period_s > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "traffic period must be positive");
    }
    if (traffic.model == TrafficModel::periodic &&
        !(traffic.jitter_s >= 0.0 && traffic.jitter_s < traffic.period_s / 2.0)) {
        throw Error(ErrorCode::InvalidConfig, "periodic jitter must be in [0, period/2)");
    }
    if (traffic.model == TrafficModel::scripted && traffic.scripted_times.size() != devices) {
        throw Error(ErrorCode::InvalidConfig, "scripted traffic needs one time list per device");
    }
}

}  // namespace

SimulationResult simulate(const SimulationInput& in) {
    const std::size_t n_dev = in.devices.size();
    const std::size_t n_gw = in.gateways.size();
    if (n_dev == 0) {
        throw Error(ErrorCode::NoDevices, "simulation has no devices");
    }
    if (n_gw == 0) {
        throw Error(ErrorCode::NoGateways, "simulation has no gateways");
    }
    in.radio.validate();
    in.energy.validate();
    validate_traffic(in.traffic, n_dev);
    if (!(in.horizon_s >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "horizon must be nonnegative");
    }
    if (!in.forced_sf.empty() && in.forced_sf.size() != 1 && in.forced_sf.size() != n_dev) {
        throw Error(ErrorCode::InvalidConfig, "forced_sf needs 1 or one-per-device entries");
    }

    SimulationResult result;
    std::vector<Point> positions;
    positions.reserve(n_dev);
    for (const auto& d : in.devices) {
        positions.push_back(d.position);
    }
    result.link_rssi = link_rssi(positions, in.gateways, in.radio, in.propagation, in.seed);
    const auto& rssi_table = result.link_rssi;

    std::array<double, kSfCount> airtime_s{};
    std::array<double, kSfCount> energy_j{};
    for (int sf = kMinSf; sf <= kMaxSf; ++sf) {
        airtime_s[sf_slot(sf)] = airtime(sf, in.radio);
        energy_j[sf_slot(sf)] = in.energy.energy_per_transmission(sf, in.radio);
    }

    auto& features = result.features;
    features.sf.resize(n_dev);
    features.coverage_marginal.resize(n_dev);
    features.best_rssi_dbm.resize(n_dev);

    std::vector<DeviceState> state;
    state.reserve(n_dev);
    for (std::size_t d = 0; d < n_dev; ++d) {
        state.emplace_back(derive_seed(in.seed, "traffic", d));
        const auto decision = adr_assign(rssi_table[d], in.radio);
        int sf = decision.sf;
        if (!in.forced_sf.empty()) {
            sf = in.forced_sf.size() == 1 ? in.forced_sf[0] : in.forced_sf[d];
            if (sf < kMinSf || sf > kMaxSf) {
                throw Error(ErrorCode::InvalidSf, "forced SF " + std::to_string(sf));
            }
        }
        state[d].sf = sf;
        features.sf[d] = sf;
        features.coverage_marginal[d] = decision.marginal;
        features.best_rssi_dbm[d] = decision.best_rssi_dbm;
        ++features.sf_histogram[sf_slot(sf)];
    }

    auto consumed = [&](std::size_t d) {
        double total = 0.0;
        for (std::size_t s = 0; s < kSfCount; ++s) {
            total += static_cast<double>(state[d].sent_per_sf[s]) * energy_j[s];
        }
        return total;
    };

    std::priority_queue<Event, std::vector<Event>, Later> queue;
    std::uint64_t seq = 0;
    const auto& traffic = in.traffic;

    // Nominal time of the device's next uplink (before duty-cycle deferral),
    // or nullopt when its script is exhausted.
    auto next_nominal = [&](std::size_t d, double previous_start) -> std::optional<double> {
        auto& st = state[d];
        switch (traffic.model) {
        case TrafficModel::poisson:
            return previous_start + st.traffic.exponential(traffic.period_s);
        case TrafficModel::periodic: {
            const double jitter = st.traffic.uniform(-traffic.jitter_s, traffic.jitter_s);
            const double t = st.phase + static_cast<double>(st.slot) * traffic.period_s + jitter;
            ++st.slot;
            return std::max(t, 0.0);
        }
        case TrafficModel::scripted: {
            const auto& times = traffic.scripted_times[d];
            if (st.slot >= times.size()) {
                return std::nullopt;
            }
            return times[st.slot++];
        }
        }
        return std::nullopt;
    };

    for (std::size_t d = 0; d < n_dev; ++d) {
        if (traffic.model == TrafficModel::periodic) {
            state[d].phase = state[d].traffic.uniform() * traffic.period_s;
        }
        auto t = next_nominal(d, 0.0);
        if (t && *t < in.horizon_s) {
            queue.push({*t, EventKind::tx_start, d, 0, seq++});
        }
    }
    if (in.battery_sample_interval_s > 0.0) {
        for (std::size_t k = 0;; ++k) {
            const double t = static_cast<double>(k) * in.battery_sample_interval_s;
            if (t > in.horizon_s) {
                break;
            }
            queue.push({t, EventKind::battery_sample, 0, 0, seq++});
        }
    }

    const std::size_t n_ch = in.radio.channels_hz.size();
    std::vector<std::vector<std::size_t>> active(n_ch * kSfCount);  // record ids per (channel, SF)
    std::vector<std::vector<std::uint8_t>> alive;                   // per record, cleared at end
    std::vector<bool> covered;
    auto& records = result.transmissions;
    result.counters.assign(n_dev, {});
    const double capture = in.radio.capture_threshold_db;

    while (!queue.empty()) {
        const Event ev = queue.top();
        queue.pop();

        if (ev.kind == EventKind::battery_sample) {
            for (std::size_t d = 0; d < n_dev; ++d) {
                result.energy.trajectory.push_back(
                    {ev.time, d, in.energy.initial_battery_j - consumed(d)});
            }
            continue;
        }

        if (ev.kind == EventKind::tx_end) {
            auto& rec = records[ev.record];
            auto& bucket = active[rec.channel * kSfCount + sf_slot(rec.sf)];
            bucket.erase(std::find(bucket.begin(), bucket.end(), ev.record));
            auto& counters = result.counters[rec.device];
            const auto& flags = alive[ev.record];
            if (!covered[ev.record]) {
                rec.outcome = Outcome::no_coverage;
                ++counters.lost_no_coverage;
            } else {
                std::optional<std::size_t> best;
                for (std::size_t g = 0; g < n_gw; ++g) {
                    if (flags[g] && (!best || rssi_table[rec.device][g] > rssi_table[rec.device][*best])) {
                        best = g;
                    }
                }
                if (best) {
                    rec.outcome = Outcome::delivered;
                    rec.best_gateway = best;
                    ++counters.delivered;
                } else {
                    rec.outcome = Outcome::collided;
                    ++counters.lost_collision;
                }
            }
            std::vector<std::uint8_t>().swap(alive[ev.record]);
            continue;
        }

        // tx_start
        const std::size_t d = ev.device;
        auto& st = state[d];
        const std::size_t slot = sf_slot(st.sf);
        if (in.energy.initial_battery_j - consumed(d) < energy_j[slot]) {
            st.halted = true;  // not enough charge left for another uplink
            continue;
        }
        const std::size_t channel = st.traffic.index(n_ch);
        ++st.sent_per_sf[slot];
        ++result.counters[d].sent;

        TransmissionRecord rec;
        rec.start_s = ev.time;
        rec.device = d;
        rec.channel = channel;
        rec.channel_hz = in.radio.channels_hz[channel];
        rec.sf = st.sf;
        rec.airtime_s = airtime_s[slot];
        rec.best_rssi_dbm = features.best_rssi_dbm[d];
        const std::size_t id = records.size();
        records.push_back(rec);

        const auto& mine = rssi_table[d];
        std::vector<std::uint8_t> flags(n_gw, 0);
        bool any = false;
        for (std::size_t g = 0; g < n_gw; ++g) {
            if (mine[g] >= in.radio.sensitivity(st.sf)) {
                flags[g] = 1;
                any = true;
            }
        }
        covered.push_back(any);

        auto& bucket = active[channel * kSfCount + slot];
        for (auto other : bucket) {
            const auto& theirs = rssi_table[records[other].device];
            auto& other_flags = alive[other];
            for (std::size_t g = 0; g < n_gw; ++g) {
                if (flags[g] && mine[g] - theirs[g] < capture) {
                    flags[g] = 0;
                }
                if (other_flags[g] && theirs[g] - mine[g] < capture) {
                    other_flags[g] = 0;
                }
            }
        }
        bucket.push_back(id);
        alive.push_back(std::move(flags));
        queue.push({ev.time + rec.airtime_s, EventKind::tx_end, d, id, seq++});

        auto next = next_nominal(d, ev.time);
        if (next) {
            const double earliest = ev.time + rec.airtime_s / in.radio.duty_cycle_limit;
            const double t = std::max(*next, earliest);
            if (t < in.horizon_s) {
                queue.push({t, EventKind::tx_start, d, 0, seq++});
            }
        }
    }

    auto& energy = result.energy;
    energy.device_j.resize(n_dev);
    energy.battery_end_j.resize(n_dev);
    features.pdr.resize(n_dev);
    double sf_sum = 0.0;
    for (std::size_t d = 0; d < n_dev; ++d) {
        energy.device_j[d] = consumed(d);
        energy.battery_end_j[d] = in.energy.initial_battery_j - energy.device_j[d];
        energy.total_j += energy.device_j[d];
        const auto& c = result.counters[d];
        features.sent += c.sent;
        features.delivered += c.delivered;
        features.pdr[d] = c.sent > 0 ? static_cast<double>(c.delivered) / static_cast<double>(c.sent) : 0.0;
        sf_sum += features.sf[d];
    }
    features.pdr_total = features.sent > 0 ? static_cast<double>(features.delivered) /
                                                 static_cast<double>(features.sent)
                                           : 0.0;
    features.mean_sf = sf_sum / static_cast<double>(n_dev);
    return result;
}

WirelessTables tabulate(const SimulationResult& result, std::span<const Device> devices) {
    WirelessTables t;
    t.transmissions.reserve(result.transmissions.size());
    for (const auto& r : result.transmissions) {
        t.transmissions.push_back({r.start_s, devices[r.device].id, r.channel_hz, r.sf, r.airtime_s,
                                   r.best_gateway, r.best_rssi_dbm, std::string(to_string(r.outcome))});
    }
    for (std::size_t d = 0; d < result.counters.size(); ++d) {
        const auto& c = result.counters[d];
        t.energy.push_back({devices[d].id, c.sent, c.delivered, c.lost_no_coverage, c.lost_collision,
                            result.energy.device_j[d], result.energy.battery_end_j[d]});
    }
    t.battery.reserve(result.energy.trajectory.size());
    for (const auto& s : result.energy.trajectory) {
        t.battery.push_back({s.time_s, devices[s.device].id, s.battery_j});
    }
    return t;
}

namespace {

const std::vector<std::string> kTransmissionHeader = {
    "time_s", "device_id", "channel_hz", "sf", "airtime_s", "best_gw", "best_rssi_dbm", "outcome"};
const std::vector<std::string> kEnergyHeader = {
    "device_id", "sent", "delivered", "lost_no_coverage", "lost_collision", "energy_j", "battery_end_j"};
const std::vector<std::string> kBatteryHeader = {"time_s", "device_id", "battery_j"};

csv::Table read_exact(std::istream& in, std::string_view source,
                      const std::vector<std::string>& header) {
    auto table = csv::read_table(in, source);
    if (table.header != header) {
        throw Error(ErrorCode::SchemaMismatch, std::string(source) + ": unexpected header");
    }
    return table;
}

double number(const std::string& text, std::string_view source) {
    auto v = csv::parse_number(text);
    if (!v) {
        throw Error(ErrorCode::SchemaMismatch, std::string(source) + ": bad number '" + text + "'");
    }
    return *v;
}

std::uint64_t count(const std::string& text, std::string_view source) {
    auto v = csv::parse_integer(text);
    if (!v || *v < 0) {
        throw Error(ErrorCode::SchemaMismatch, std::string(source) + ": bad count '" + text + "'");
    }
    return static_cast<std::uint64_t>(*v);
}

}  // namespace

void write_transmissions_csv(std::ostream& out, const std::vector<TransmissionRow>& rows) {
    csv::write_row(out, kTransmissionHeader);
    for (const auto& r : rows) {
        csv::write_row(out, {csv::format_number(r.time_s), r.device_id,
                             csv::format_number(r.channel_hz), std::to_string(r.sf),
                             csv::format_number(r.airtime_s),
                             r.best_gw ? std::to_string(*r.best_gw) : std::string(),
                             csv::format_number(r.best_rssi_dbm), r.outcome});
    }
}

void write_energy_csv(std::ostream& out, const std::vector<EnergyRow>& rows) {
    csv::write_row(out, kEnergyHeader);
    for (const auto& r : rows) {
        csv::write_row(out, {r.device_id, std::to_string(r.sent), std::to_string(r.delivered),
                             std::to_string(r.lost_no_coverage), std::to_string(r.lost_collision),
                             csv::format_number(r.energy_j), csv::format_number(r.battery_end_j)});
    }
}

void write_battery_csv(std::ostream& out, const std::vector<BatteryRow>& rows) {
    csv::write_row(out, kBatteryHeader);
    for (const auto& r : rows) {
        csv::write_row(out, {csv::format_number(r.time_s), r.device_id,
                             csv::format_number(r.battery_j)});
    }
}

std::vector<TransmissionRow> read_transmissions_csv(std::istream& in) {
    constexpr std::string_view src = "transmissions csv";
    auto table = read_exact(in, src, kTransmissionHeader);
    std::vector<TransmissionRow> rows;
    rows.reserve(table.rows.size());
    for (const auto& f : table.rows) {
        TransmissionRow r;
        r.time_s = number(f[0], src);
        r.device_id = f[1];
        r.channel_hz = number(f[2], src);
        r.sf = static_cast<int>(count(f[3], src));
        r.airtime_s = number(f[4], src);
        if (!f[5].empty()) {
            r.best_gw = count(f[5], src);
        }
        r.best_rssi_dbm = number(f[6], src);
        r.outcome = f[7];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<EnergyRow> read_energy_csv(std::istream& in) {
    constexpr std::string_view src = "energy csv";
    auto table = read_exact(in, src, kEnergyHeader);
    std::vector<EnergyRow> rows;
    for (const auto& f : table.rows) {
        rows.push_back({f[0], count(f[1], src), count(f[2], src), count(f[3], src),
                        count(f[4], src), number(f[5], src), number(f[6], src)});
    }
    return rows;
}

std::vector<BatteryRow> read_battery_csv(std::istream& in) {
    constexpr std::string_view src = "battery csv";
    auto table = read_exact(in, src, kBatteryHeader);
    std::vector<BatteryRow> rows;
    rows.reserve(table.rows.size());
    for (const auto& f : table.rows) {
        rows.push_back({number(f[0], src), f[1], number(f[2], src)});
    }
    return rows;
}

namespace {

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
    fn(out);
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
    }
}

template <typename Fn>
auto read_file(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    }
    return fn(in);
}

}  // namespace

void export_wireless_csv(const WirelessTables& tables, const std::filesystem::path& dir,
                         bool include_transmissions) {
    std::filesystem::create_directories(dir);
    if (include_transmissions) {
        write_file(dir / "transmissions.csv",
                   [&](std::ostream& o) { write_transmissions_csv(o, tables.transmissions); });
    }
    write_file(dir / "energy.csv", [&](std::ostream& o) { write_energy_csv(o, tables.energy); });
    write_file(dir / "battery.csv", [&](std::ostream& o) { write_battery_csv(o, tables.battery); });
}

WirelessTables load_wireless_csv(const std::filesystem::path& dir) {
    WirelessTables t;
    if (std::filesystem::exists(dir / "transmissions.csv")) {
        t.transmissions = read_file(dir / "transmissions.csv",
                                    [](std::istream& i) { return read_transmissions_csv(i); });
    }
    t.energy = read_file(dir / "energy.csv", [](std::istream& i) { return read_energy_csv(i); });
    t.battery = read_file(dir / "battery.csv", [](std::istream& i) { return read_battery_csv(i); });
    return t;
}

}  // namespace swifeed
