#include "support.hpp"

#include "swifeed/error.hpp"
#include "swifeed/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace swifeed;

namespace {

SimulationInput single_link(std::uint64_t seed) {
    SimulationInput in;
    in.devices = {{"D1", {10.0, 0.0}}};
    in.gateways = {{0.0, 0.0}};
    in.seed = seed;
    return in;
}

// Several devices on a ring around two gateways, some far enough to need high SFs.
SimulationInput small_field(std::uint64_t seed) {
    SimulationInput in;
    for (int i = 0; i < 24; ++i) {
        const double a = i * 0.2618;
        const double r = 300.0 + 350.0 * (i % 8);
        in.devices.push_back({"D" + std::to_string(i), {r * std::cos(a), r * std::sin(a)}});
    }
    in.devices.push_back({"FAR", {40000.0, 0.0}});
    in.gateways = {{0.0, 0.0}, {1500.0, 200.0}};
    in.propagation.shadowing_sigma_db = 3.0;
    in.traffic.period_s = 60.0;
    in.horizon_s = 6 * 3600.0;
    in.seed = seed;
    return in;
}

void check_conservation(const SimulationResult& r) {
    double sum = 0.0;
    for (std::size_t d = 0; d < r.counters.size(); ++d) {
        const auto& c = r.counters[d];
        CHECK(c.sent == c.delivered + c.lost_no_coverage + c.lost_collision);
        sum += r.energy.device_j[d];
    }
    CHECK(r.energy.total_j == doctest::Approx(sum).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("single link over a day") {
    const double per_tx = 3.3 * 0.028 * testing::reference_airtime(7, 20, true);
    double mean = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto r = simulate(single_link(seed));
        const auto sent = r.counters[0].sent;
        mean += static_cast<double>(sent) / 10.0;
        CHECK(std::abs(static_cast<double>(sent) - 288.0) < 4.0 * std::sqrt(288.0));
        CHECK(r.features.sf[0] == 7);
        CHECK(r.features.pdr[0] == 1.0);
        CHECK(r.energy.total_j == doctest::Approx(static_cast<double>(sent) * per_tx).epsilon(1e-12));
        check_conservation(r);
    }
    CHECK(std::abs(mean - 288.0) < 3.0 * std::sqrt(288.0 / 10.0));
}

TEST_CASE("zero horizon") {
    auto in = single_link(3);
    in.horizon_s = 0.0;
    auto r = simulate(in);
    CHECK(r.transmissions.empty());
    CHECK(r.energy.total_j == 0.0);
    CHECK(r.counters[0].sent == 0);
    REQUIRE(r.energy.trajectory.size() == 1);
    CHECK(r.energy.trajectory[0].battery_j == in.energy.initial_battery_j);
}

TEST_CASE("equal-power simultaneous uplinks both collide") {
    SimulationInput in;
    in.devices = {{"A", {-100.0, 0.0}}, {"B", {100.0, 0.0}}};
    in.gateways = {{0.0, 0.0}};
    in.radio.channels_hz = {868.1e6};
    in.traffic.model = TrafficModel::scripted;
    in.traffic.scripted_times = {{0.0}, {0.0}};
    auto r = simulate(in);
    REQUIRE(r.transmissions.size() == 2);
    for (const auto& t : r.transmissions) {
        CHECK(t.outcome == Outcome::collided);
        CHECK_FALSE(t.best_gateway.has_value());
    }
    CHECK(r.counters[0].lost_collision == 1);
    CHECK(r.counters[1].lost_collision == 1);
    check_conservation(r);
}

TEST_CASE("capture keeps the stronger copy") {
    SimulationInput in;
    in.devices = {{"NEAR", {10.0, 0.0}}, {"FAR", {400.0, 0.0}}};
    in.gateways = {{0.0, 0.0}};
    in.radio.channels_hz = {868.1e6};
    in.traffic.model = TrafficModel::scripted;
    in.traffic.scripted_times = {{0.02}, {0.0}};
    in.forced_sf = {7};
    auto r = simulate(in);
    REQUIRE(r.transmissions.size() == 2);
    CHECK(r.transmissions[0].device == 1);
    CHECK(r.transmissions[0].outcome == Outcome::collided);
    CHECK(r.transmissions[1].outcome == Outcome::delivered);
    CHECK(r.transmissions[1].best_gateway == std::optional<std::size_t>(0));
}

TEST_CASE("different SFs and channels do not interfere") {
    SimulationInput in;
    in.devices = {{"A", {-100.0, 0.0}}, {"B", {100.0, 0.0}}};
    in.gateways = {{0.0, 0.0}};
    in.radio.channels_hz = {868.1e6};
    in.traffic.model = TrafficModel::scripted;
    in.traffic.scripted_times = {{0.0}, {0.0}};
    in.forced_sf = {7, 8};
    auto r = simulate(in);
    for (const auto& t : r.transmissions) CHECK(t.outcome == Outcome::delivered);

    // Same SF, same channel, but not overlapping in time.
    in.forced_sf.clear();
    in.traffic.scripted_times = {{0.0}, {1.0}};
    r = simulate(in);
    for (const auto& t : r.transmissions) CHECK(t.outcome == Outcome::delivered);
}

TEST_CASE("out of range devices are lost without coverage") {
    auto in = single_link(1);
    in.devices[0].position = {60000.0, 0.0};
    in.horizon_s = 3600.0;
    auto r = simulate(in);
    CHECK(r.features.sf[0] == 12);
    CHECK(r.features.coverage_marginal[0]);
    CHECK(r.counters[0].sent > 0);
    CHECK(r.counters[0].lost_no_coverage == r.counters[0].sent);
    for (const auto& t : r.transmissions) CHECK(t.outcome == Outcome::no_coverage);
    CHECK(r.features.pdr[0] == 0.0);
}

TEST_CASE("duty cycle defers the next uplink") {
    auto in = single_link(1);
    in.traffic.model = TrafficModel::scripted;
    in.traffic.scripted_times = {{0.0, 1.0, 500.0}};
    in.forced_sf = {12};
    auto r = simulate(in);
    REQUIRE(r.transmissions.size() == 3);
    const double at = testing::reference_airtime(12, 20, true);
    CHECK(r.transmissions[1].start_s == doctest::Approx(at / 0.01).epsilon(1e-12));
    CHECK(r.transmissions[2].start_s == 500.0);
}

TEST_CASE("battery depletion halts the device") {
    auto in = single_link(4);
    const double per_tx = in.energy.energy_per_transmission(7, in.radio);
    in.energy.initial_battery_j = 2.5 * per_tx;
    auto r = simulate(in);
    CHECK(r.counters[0].sent == 2);
    CHECK(r.energy.battery_end_j[0] == doctest::Approx(0.5 * per_tx));
    CHECK(r.energy.battery_end_j[0] >= 0.0);
}

TEST_CASE("battery trajectory is hourly and never rises") {
    auto in = small_field(2);
    auto r = simulate(in);
    const std::size_t n = in.devices.size();
    REQUIRE(r.energy.trajectory.size() == 7 * n);
    std::vector<double> last(n, in.energy.initial_battery_j);
    for (std::size_t k = 0; k < r.energy.trajectory.size(); ++k) {
        const auto& s = r.energy.trajectory[k];
        CHECK(s.time_s == static_cast<double>(k / n) * 3600.0);
        CHECK(s.device == k % n);
        CHECK(s.battery_j <= last[s.device]);
        CHECK(s.battery_j >= 0.0);
        last[s.device] = s.battery_j;
    }
    for (std::size_t d = 0; d < n; ++d) CHECK(last[d] == r.energy.battery_end_j[d]);
}

TEST_CASE("energy additivity and conservation on a busy field") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto in = small_field(seed);
        auto r = simulate(in);
        check_conservation(r);
        std::vector<double> per_device(in.devices.size(), 0.0);
        std::uint64_t collided = 0;
        for (const auto& t : r.transmissions) {
            per_device[t.device] += 3.3 * 0.028 * testing::reference_airtime(t.sf, 20, true);
            if (t.outcome == Outcome::collided) ++collided;
        }
        for (std::size_t d = 0; d < per_device.size(); ++d)
            CHECK(r.energy.device_j[d] == doctest::Approx(per_device[d]).epsilon(1e-9));
        CHECK(collided > 0);
        const auto far = in.devices.size() - 1;
        CHECK(r.counters[far].delivered == 0);
        std::size_t hist = 0;
        for (auto h : r.features.sf_histogram) hist += h;
        CHECK(hist == in.devices.size());
    }
}

TEST_CASE("transmissions are ordered by start time then device") {
    auto r = simulate(small_field(5));
    for (std::size_t i = 1; i < r.transmissions.size(); ++i) {
        const auto& a = r.transmissions[i - 1];
        const auto& b = r.transmissions[i];
        CHECK((a.start_s < b.start_s || (a.start_s == b.start_s && a.device < b.device)));
    }
}

TEST_CASE("higher forced SF costs strictly more") {
    auto in = small_field(1);
    in.traffic.model = TrafficModel::scripted;
    in.traffic.scripted_times.assign(in.devices.size(), {10.0, 2000.0, 4000.0, 9000.0});
    double prev = 0.0;
    for (int sf = 7; sf <= 12; ++sf) {
        in.forced_sf = {sf};
        auto r = simulate(in);
        CHECK(r.features.sent == 4 * in.devices.size());
        CHECK(r.energy.total_j > prev);
        prev = r.energy.total_j;
    }
}

TEST_CASE("identical seeds give identical records") {
    auto a = simulate(small_field(9));
    auto b = simulate(small_field(9));
    REQUIRE(a.transmissions.size() == b.transmissions.size());
    for (std::size_t i = 0; i < a.transmissions.size(); ++i) {
        const auto& x = a.transmissions[i];
        const auto& y = b.transmissions[i];
        CHECK(x.start_s == y.start_s);
        CHECK(x.device == y.device);
        CHECK(x.channel == y.channel);
        CHECK(x.outcome == y.outcome);
        CHECK(x.best_gateway == y.best_gateway);
    }
    CHECK(a.energy.total_j == b.energy.total_j);
    auto c = simulate(small_field(10));
    CHECK(c.transmissions.front().start_s != a.transmissions.front().start_s);
}

TEST_CASE("traffic does not depend on gateway placement") {
    auto in = small_field(4);
    in.forced_sf = {9};
    auto a = simulate(in);
    in.gateways = {{-800.0, 300.0}, {2500.0, -100.0}, {0.0, 1200.0}};
    auto b = simulate(in);
    REQUIRE(a.transmissions.size() == b.transmissions.size());
    for (std::size_t i = 0; i < a.transmissions.size(); ++i) {
        CHECK(a.transmissions[i].start_s == b.transmissions[i].start_s);
        CHECK(a.transmissions[i].channel == b.transmissions[i].channel);
    }
}

TEST_CASE("periodic traffic hits every slot once") {
    auto in = single_link(6);
    in.traffic.model = TrafficModel::periodic;
    auto r = simulate(in);
    CHECK(r.counters[0].sent >= 287);
    CHECK(r.counters[0].sent <= 289);
    for (std::size_t i = 1; i < r.transmissions.size(); ++i) {
        const double gap = r.transmissions[i].start_s - r.transmissions[i - 1].start_s;
        CHECK(gap >= 300.0 - 60.0);
        CHECK(gap <= 300.0 + 60.0);
    }
}

TEST_CASE("receive windows add their energy when enabled") {
    auto in = single_link(1);
    in.energy.include_rx_windows = true;
    const double tx = 3.3 * 0.028 * testing::reference_airtime(7, 20, true);
    const double rx = 3.3 * 0.0108 * (12.25 * 128.0 / 125e3 + 12.25 * 4096.0 / 125e3);
    CHECK(in.energy.energy_per_transmission(7, in.radio) == doctest::Approx(tx + rx).epsilon(1e-12));
}

TEST_CASE("input errors") {
    auto in = single_link(1);
    auto no_dev = in;
    no_dev.devices.clear();
    try {
        simulate(no_dev);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoDevices);
    }
    auto no_gw = in;
    no_gw.gateways.clear();
    try {
        simulate(no_gw);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoGateways);
    }
    auto bad_sf = in;
    bad_sf.forced_sf = {13};
    CHECK_THROWS_AS(simulate(bad_sf), Error);
    auto bad_power = in;
    bad_power.radio.tx_power_dbm = 20.0;
    CHECK_THROWS_AS(simulate(bad_power), Error);
    auto bad_script = in;
    bad_script.traffic.model = TrafficModel::scripted;
    CHECK_THROWS_AS(simulate(bad_script), Error);
}

TEST_CASE("csv export") {
    SUBCASE("empty results give header-only files") {
        auto dir = testing::scratch("empty_export");
        export_wireless_csv(WirelessTables{}, dir);
        CHECK(testing::slurp(dir / "transmissions.csv") ==
              "time_s,device_id,channel_hz,sf,airtime_s,best_gw,best_rssi_dbm,outcome\n");
        CHECK(testing::slurp(dir / "energy.csv") ==
              "device_id,sent,delivered,lost_no_coverage,lost_collision,energy_j,battery_end_j\n");
        CHECK(testing::slurp(dir / "battery.csv") == "time_s,device_id,battery_j\n");
    }
    SUBCASE("one transmission gives one matching row") {
        auto in = single_link(1);
        in.traffic.model = TrafficModel::scripted;
        in.traffic.scripted_times = {{12.5}};
        auto r = simulate(in);
        auto t = tabulate(r, in.devices);
        REQUIRE(t.transmissions.size() == 1);
        const auto& rec = r.transmissions[0];
        const auto& row = t.transmissions[0];
        CHECK(row.time_s == 12.5);
        CHECK(row.device_id == "D1");
        CHECK(row.channel_hz == rec.channel_hz);
        CHECK(row.sf == 7);
        CHECK(row.airtime_s == rec.airtime_s);
        CHECK(row.best_gw == std::optional<std::size_t>(0));
        CHECK(row.best_rssi_dbm == rec.best_rssi_dbm);
        CHECK(row.outcome == "delivered");
        std::ostringstream out;
        write_transmissions_csv(out, t.transmissions);
        std::istringstream lines(out.str());
        std::string line;
        std::size_t count = 0;
        while (std::getline(lines, line)) ++count;
        CHECK(count == 2);
    }
    SUBCASE("re-export of a loaded export is byte-identical") {
        auto in = small_field(7);
        auto r = simulate(in);
        auto t = tabulate(r, in.devices);
        auto a = testing::scratch("export_a");
        auto b = testing::scratch("export_b");
        export_wireless_csv(t, a);
        auto loaded = load_wireless_csv(a);
        CHECK(loaded.transmissions.size() == r.transmissions.size());
        export_wireless_csv(loaded, b);
        for (const char* f : {"transmissions.csv", "energy.csv", "battery.csv"})
            CHECK(testing::slurp(a / f) == testing::slurp(b / f));
        // Numbers survive the text form exactly.
        for (std::size_t i = 0; i < t.energy.size(); ++i)
            CHECK(loaded.energy[i].energy_j == t.energy[i].energy_j);
    }
    SUBCASE("wrong header is a schema error") {
        std::istringstream in("device_id,sent\nD1,3\n");
        try {
            read_energy_csv(in);
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SchemaMismatch);
        }
    }
}

}  // TEST_SUITE
