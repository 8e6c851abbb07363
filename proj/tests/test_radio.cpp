#include "support.hpp"

#include "swifeed/error.hpp"
#include "swifeed/radio.hpp"

#include <doctest.h>

#include <random>

using namespace swifeed;

TEST_SUITE("radio") {

TEST_CASE("airtime matches the reference calculator") {
    for (int payload : {1, 20, 51, 222})
        for (bool hdr : {true, false})
            for (int sf = 7; sf <= 12; ++sf) {
                RadioConfig cfg;
                cfg.payload_bytes = payload;
                cfg.explicit_header = hdr;
                CAPTURE(sf);
                CAPTURE(payload);
                CHECK(std::abs(airtime(sf, cfg) - testing::reference_airtime(sf, payload, hdr)) < 1e-6);
            }
}

TEST_CASE("airtime reference points") {
    RadioConfig cfg;
    // 43 payload symbols + 12.25 preamble symbols of 1.024 ms.
    CHECK(airtime(7, cfg) == doctest::Approx(0.056576).epsilon(1e-12));
    // 28 + 12.25 symbols of 32.768 ms, low-data-rate optimization on.
    CHECK(airtime(12, cfg) == doctest::Approx(1.318912).epsilon(1e-12));
    CHECK(airtime(12, cfg) / airtime(7, cfg) > 16.0);
    for (int sf = 8; sf <= 12; ++sf) CHECK(airtime(sf, cfg) > airtime(sf - 1, cfg));
}

TEST_CASE("airtime over other bandwidths and coding rates") {
    std::mt19937_64 gen(5);
    for (int i = 0; i < 200; ++i) {
        RadioConfig cfg;
        cfg.bandwidth_hz = std::vector<double>{125e3, 250e3, 500e3}[gen() % 3];
        cfg.coding_rate = 1 + static_cast<int>(gen() % 4);
        cfg.preamble_symbols = 6 + static_cast<int>(gen() % 10);
        cfg.payload_bytes = 1 + static_cast<int>(gen() % 222);
        cfg.explicit_header = gen() % 2 == 0;
        const int sf = 7 + static_cast<int>(gen() % 6);
        CHECK(std::abs(airtime(sf, cfg) - testing::reference_airtime(sf, cfg.payload_bytes, cfg.explicit_header,
                                                                     cfg.bandwidth_hz, cfg.coding_rate,
                                                                     cfg.preamble_symbols)) < 1e-9);
    }
}

TEST_CASE("airtime preconditions") {
    RadioConfig cfg;
    cfg.payload_bytes = 0;
    CHECK_THROWS_AS(airtime(7, cfg), Error);
    cfg.payload_bytes = 223;
    CHECK_THROWS_AS(airtime(7, cfg), Error);
    cfg.payload_bytes = 20;
    try {
        airtime(6, cfg);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidSf);
    }
    CHECK_THROWS_AS(airtime(13, cfg), Error);
}

TEST_CASE("config validation") {
    RadioConfig ok;
    CHECK_NOTHROW(ok.validate());
    auto bad = ok;
    bad.sensitivity_dbm[3] = bad.sensitivity_dbm[2];
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ok;
    bad.required_snr_db[5] = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ok;
    bad.channels_hz.clear();
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ok;
    bad.duty_cycle_limit = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("path loss") {
    PathLossModel m;
    CHECK(m.loss_db(1000.0) == 128.95);
    CHECK(rssi(14.0, m.loss_db(1000.0)) == 14.0 - 128.95);
    PathLossModel two;
    two.exponent = 2.0;
    CHECK(two.loss_db(10000.0) == doctest::Approx(128.95 + 20.0).epsilon(1e-14));
    CHECK(m.loss_db(0.0) == m.loss_db(1.0));
    CHECK(m.loss_db(0.3) == m.loss_db(1.0));
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(1.0, 20000.0);
    for (int i = 0; i < 100; ++i) {
        const double d = u(gen);
        CHECK(m.loss_db(d) == doctest::Approx(128.95 + 23.2 * std::log10(d / 1000.0)).epsilon(1e-13));
    }
}

TEST_CASE("shadowing is keyed per device and gateway") {
    std::vector<Point> devs{{0, 0}, {500, 0}};
    std::vector<Point> gws{{100, 0}, {900, 0}};
    RadioConfig radio;
    PathLossModel m;
    auto flat = link_rssi(devs, gws, radio, m, 1);
    CHECK(flat == link_rssi(devs, gws, radio, m, 2));
    m.shadowing_sigma_db = 8.0;
    auto a = link_rssi(devs, gws, radio, m, 1);
    CHECK(a == link_rssi(devs, gws, radio, m, 1));
    CHECK(a != link_rssi(devs, gws, radio, m, 2));
    // Dropping a gateway leaves the remaining pairs untouched.
    std::vector<Point> one{gws[0]};
    auto b = link_rssi(devs, one, radio, m, 1);
    CHECK(b[0][0] == a[0][0]);
    CHECK(b[1][0] == a[1][0]);
}

TEST_CASE("ADR extremes") {
    RadioConfig cfg;
    PathLossModel m;
    const double colocated = rssi(cfg.tx_power_dbm, m.loss_db(0.0));
    std::vector<double> row{colocated};
    auto d = adr_assign(row, cfg);
    CHECK(d.sf == 7);
    CHECK_FALSE(d.marginal);

    std::vector<double> weak{-140.0, -150.0};
    auto w = adr_assign(weak, cfg);
    CHECK(w.sf == 12);
    CHECK(w.marginal);

    // Exactly on a threshold: sensitivity(SF9) = best - margin.
    std::vector<double> edge{-125.0, -119.0};
    auto e = adr_assign(edge, cfg);
    CHECK(e.sf == 9);
    CHECK(e.best_gateway == 1);
    CHECK(e.best_rssi_dbm == -119.0);

    std::vector<double> none;
    try {
        adr_assign(none, cfg);
        FAIL("no error");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NoGateways);
    }
}

TEST_CASE("ADR agrees with the exhaustive scan on random devices") {
    RadioConfig cfg;
    PathLossModel m;
    m.shadowing_sigma_db = 6.0;
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> coord(0.0, 20000.0);
    std::vector<double> sens(cfg.sensitivity_dbm.begin(), cfg.sensitivity_dbm.end());
    std::vector<Point> devs, gws;
    for (int i = 0; i < 100; ++i) devs.push_back({coord(gen), coord(gen)});
    for (int i = 0; i < 4; ++i) gws.push_back({coord(gen), coord(gen)});
    auto table = link_rssi(devs, gws, cfg, m, 3);
    for (const auto& row : table) {
        auto got = adr_assign(row, cfg);
        auto ref = testing::reference_adr(row, cfg.adr_margin_db, sens);
        CHECK(got.sf == ref.sf);
        CHECK(got.marginal == ref.marginal);
    }
}

TEST_CASE("adding a gateway never raises the assigned SF") {
    RadioConfig cfg;
    PathLossModel m;
    m.shadowing_sigma_db = 4.0;
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> coord(0.0, 15000.0);
    std::vector<Point> devs, gws;
    for (int i = 0; i < 200; ++i) devs.push_back({coord(gen), coord(gen)});
    gws.push_back({coord(gen), coord(gen)});
    auto before = link_rssi(devs, gws, cfg, m, 9);
    for (int extra = 0; extra < 5; ++extra) {
        gws.push_back({coord(gen), coord(gen)});
        auto after = link_rssi(devs, gws, cfg, m, 9);
        for (std::size_t d = 0; d < devs.size(); ++d) {
            auto a = adr_assign(before[d], cfg);
            auto b = adr_assign(after[d], cfg);
            CHECK(b.best_rssi_dbm >= a.best_rssi_dbm);
            CHECK(b.sf <= a.sf);
        }
        before = after;
    }
}

}  // TEST_SUITE
