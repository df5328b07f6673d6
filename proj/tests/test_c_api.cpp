#include <doctest.h>

#include <thread>

#include "powermeter/c_api.h"
#include "powermeter/export.hpp"
#include "test_support.hpp"

using namespace std::chrono_literals;

TEST_CASE("c api: session lifecycle and tables") {
    pm_session* s = pm_session_start("synthetic:channels=2", 10);
    REQUIRE(s != nullptr);
    CHECK(pm_session_energy_csv(s) == nullptr);
    std::this_thread::sleep_for(50ms);
    CHECK(pm_session_stop(s) == 0);
    const std::string energy = pm_session_energy_csv(s);
    CHECK(energy.find("method,device,energy_wh") != std::string::npos);
    CHECK(energy.find("\nsynthetic,0,") != std::string::npos);
    CHECK(energy.find("\nsynthetic,1,") != std::string::npos);
    CHECK(std::string(pm_session_power_csv(s)).find("round,method,device,t,watts") != std::string::npos);
    CHECK(pm_session_stop(s) == -1);
    CHECK(std::string(pm_last_error()).find("stopped") != std::string::npos);
    pm_session_free(s);
}

TEST_CASE("c api: unknown method fails at start") {
    CHECK(pm_session_start("nosuch", 100) == nullptr);
    CHECK(std::string(pm_last_error()).find("nosuch") != std::string::npos);
}

TEST_CASE("c api: replayed trace matches the exported energy table bit for bit") {
    testsupport::TempDir dir;
    pm_session* live = pm_session_start("synthetic:kind=sinusoid,base=200,amplitude=100,period=0.5,jitter=7", 5);
    REQUIRE(live);
    std::this_thread::sleep_for(100ms);
    REQUIRE(pm_session_stop(live) == 0);
    testsupport::write_file(dir / "power.csv", pm_session_power_csv(live));
    testsupport::write_file(dir / "energy.csv", pm_session_energy_csv(live));

    const std::string spec = "replay:" + (dir / "power.csv").string();
    pm_session* replay = pm_session_start(spec.c_str(), 1);
    REQUIRE(replay);
    CHECK(pm_session_wait_exhausted(replay, 10000) == 1);
    REQUIRE(pm_session_stop(replay) == 0);
    testsupport::write_file(dir / "replayed.csv", pm_session_energy_csv(replay));

    const auto original = powermeter::read_energy_table(dir / "energy.csv");
    const auto replayed = powermeter::read_energy_table(dir / "replayed.csv");
    REQUIRE(original.rows.size() == replayed.rows.size());
    for (std::size_t i = 0; i < original.rows.size(); ++i) {
        CHECK(powermeter::csv::format17(*original.rows[i].energy_wh) ==
              powermeter::csv::format17(*replayed.rows[i].energy_wh));
    }
    pm_session_free(live);
    pm_session_free(replay);
}
