#include <doctest.h>

#include <set>
#include <thread>

#include "powermeter/errors.hpp"
#include "powermeter/export.hpp"
#include "powermeter/registry.hpp"
#include "powermeter/synthetic.hpp"
#include "test_support.hpp"

using namespace powermeter;
using namespace std::chrono_literals;
using testsupport::TempDir;

namespace {

SessionExport sample_export(std::size_t channels = 1) {
    SessionExport ex;
    ex.meta = {"2026-10-15T12:00:00", 100, {"synthetic"}, "node07"};
    for (std::size_t c = 0; c < channels; ++c) {
        PowerSeries s({"synthetic", std::to_string(c)});
        for (int i = 0; i <= 10; ++i) {
            s.append({0.1 * i, 100.0 + c, static_cast<std::uint64_t>(i)});
            ex.power.push_back({static_cast<std::uint64_t>(i), s.channel(), 0.1 * i, 100.0 + c});
        }
        ex.energy.push_back(summarize(s));
    }
    return ex;
}

} // namespace

TEST_CASE("render_suffix") {
    const SuffixContext ctx{"node07", 42, std::chrono::system_clock::now()};
    CHECK(render_suffix("_%h", ctx) == "_node07");
    CHECK(render_suffix("", ctx) == "");
    CHECK(render_suffix("_%h_%p", {"a", 42, {}}) == "_a_42");
    CHECK(render_suffix("100%%", ctx) == "100%");
    CHECK(render_suffix("_%t", ctx).size() == 1 + 15);
    CHECK(render_suffix("_%t", ctx)[9] == '-');
    CHECK_THROWS_AS(render_suffix("_%x", ctx), UsageError);
    CHECK_THROWS_AS(render_suffix("_%", ctx), UsageError);
}

TEST_CASE("render_suffix: distinct hosts never collide") {
    const auto now = std::chrono::system_clock::now();
    std::set<std::string> names;
    for (const char* host : {"node01", "node02", "node03"})
        for (long pid : {100L, 200L}) names.insert("energy" + render_suffix("_%h_%p", {host, pid, now}) + ".csv");
    CHECK(names.size() == 6);
}

TEST_CASE("export_tables: files, schema, metadata") {
    TempDir dir;
    const auto ex = sample_export(2);
    const auto files = export_tables(ex, dir / "out", "csv", "_n1");
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "power_n1.csv");
    CHECK(files[1].filename() == "energy_n1.csv");

    const auto energy = read_energy_table(files[1]);
    REQUIRE(energy.rows.size() == 2);
    CHECK(energy.rows[0].channel.device == "0");
    CHECK(energy.rows[1].channel.device == "1");
    CHECK(energy.meta.host == "node07");
    CHECK(energy.meta.interval_ms == 100);
    CHECK(energy.meta.methods == std::vector<std::string>{"synthetic"});

    const auto text = testsupport::read_file(files[1]);
    CHECK(text.find("# host: node07\n") != std::string::npos);
    CHECK(text.find("method,device,energy_wh,mean_w,max_w,duration_s,samples,gaps\n") != std::string::npos);
}

TEST_CASE("export_tables: collisions, force, filetypes, unwritable dirs") {
    TempDir dir;
    const auto ex = sample_export();
    export_tables(ex, dir.path(), "csv", "");
    CHECK_THROWS_AS(export_tables(ex, dir.path(), "csv", ""), CollisionError);
    CHECK_NOTHROW(export_tables(ex, dir.path(), "csv", "", true));
    CHECK_THROWS_AS(export_tables(ex, dir.path(), "h5", "_x"), UsageError);
    CHECK_THROWS_AS(export_tables(ex, dir.path(), "parquet", "_x"), UsageError);

    testsupport::write_file(dir / "blocker", "x");
    CHECK_THROWS_AS(export_tables(ex, dir / "blocker" / "sub", "csv", ""), IoError);
}

TEST_CASE("export: import(export(x)) is the identity for the power table") {
    TempDir dir;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> any(0.0, 1e4);
    SessionExport ex;
    ex.meta = {"2026-10-15T12:00:00", 7, {"synthetic", "gh"}, "h"};
    double t = 0;
    for (std::uint64_t r = 0; r < 300; ++r) {
        t += any(rng) * 1e-5 + 1e-9;
        ex.power.push_back({r, {"synthetic", "0"}, t, any(rng)});
    }
    ex.power.push_back({300, {"gh", "Module, \"Power\""}, 1.0 / 3.0, 0.1});
    const auto files = export_tables(ex, dir.path(), "csv", "");
    const auto back = read_power_table(files[0]);
    REQUIRE(back.rows.size() == ex.power.size());
    for (std::size_t i = 0; i < ex.power.size(); ++i) {
        CHECK(back.rows[i].round == ex.power[i].round);
        CHECK(back.rows[i].channel == ex.power[i].channel);
        CHECK(back.rows[i].t == ex.power[i].t);
        CHECK(back.rows[i].watts == ex.power[i].watts);
    }
    CHECK(back.meta.methods == ex.meta.methods);
}

TEST_CASE("export: re-integrating an imported power table reproduces the energy table exactly") {
    TempDir dir;
    const std::vector<std::string> names{"synthetic:kind=sinusoid,base=200,amplitude=100,period=0.3,channels=2,jitter=3"};
    auto s = session_start({registry_resolve(names), 5ms});
    std::this_thread::sleep_for(120ms);
    s->stop();
    const auto files = export_tables(make_export(*s, "h"), dir.path(), "csv", "");
    const auto power = read_power_table(files[0]);
    const auto energy = read_energy_table(files[1]);
    const auto series = to_series(power.rows);
    REQUIRE(series.size() == energy.rows.size());
    for (std::size_t c = 0; c < series.size(); ++c) {
        const auto row = summarize(series[c]);
        CHECK(*row.energy_wh == *energy.rows[c].energy_wh);
        CHECK(*row.mean_w == *energy.rows[c].mean_w);
        CHECK(*row.max_w == *energy.rows[c].max_w);
        CHECK(*row.duration_s == *energy.rows[c].duration_s);
    }
}

TEST_CASE("export: constant 100 W for ~1 s gives ~0.0278 Wh") {
    TempDir dir;
    const std::vector<std::string> names{"synthetic"};
    auto s = session_start({registry_resolve(names), 100ms});
    std::this_thread::sleep_for(1s);
    s->stop();
    const auto files = export_tables(make_export(*s, "h"), dir.path(), "csv", "_n1");
    const auto energy = read_energy_table(files[1]);
    REQUIRE(energy.rows.size() == 1);
    const double oracle = 100.0 * *energy.rows[0].duration_s / 3600.0;
    CHECK(*energy.rows[0].energy_wh == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(*energy.rows[0].energy_wh == doctest::Approx(0.0278).epsilon(0.05));
}

TEST_CASE("export: absent energies round-trip as empty cells") {
    TempDir dir;
    SessionExport ex = sample_export();
    EnergyRow missing;
    missing.channel = {"gh", "dead"};
    missing.gaps = 12;
    ex.energy.push_back(missing);
    const auto files = export_tables(ex, dir.path(), "csv", "");
    const auto back = read_energy_table(files[1]);
    REQUIRE(back.rows.size() == 2);
    CHECK_FALSE(back.rows[1].energy_wh.has_value());
    CHECK(back.rows[1].gaps == 12);
    CHECK(testsupport::read_file(files[1]).find("gh,dead,,,,,0,12\n") != std::string::npos);
}

TEST_CASE("merge_energy_tables") {
    TempDir dir;
    const auto a = export_tables(sample_export(2), dir.path(), "csv", "_nodeA")[1];
    const auto b = export_tables(sample_export(2), dir.path(), "csv", "_nodeB")[1];

    SUBCASE("two files of two channels") {
        const std::vector<std::filesystem::path> files{a, b};
        const auto t = merge_energy_tables(files);
        CHECK(t.columns.front() == "source");
        CHECK(t.columns.size() == 9);
        REQUIRE(t.rows.size() == 4);
        CHECK(t.at(0, "source") == "nodeA");
        CHECK(t.at(3, "source") == "nodeB");
    }
    SUBCASE("a single file keeps its rows verbatim") {
        const std::vector<std::filesystem::path> files{a};
        const auto t = merge_energy_tables(files);
        const auto original = read_energy_table(a);
        REQUIRE(t.rows.size() == 2);
        CHECK(csv::parse_double(t.at(1, "energy_wh")) == *original.rows[1].energy_wh);
    }
    SUBCASE("duplicate (source, channel) pairs") {
        const std::vector<std::filesystem::path> files{a, a};
        CHECK_THROWS_AS(merge_energy_tables(files), MergeError);
    }
    SUBCASE("schema mismatch names the file") {
        const auto power = dir / "power_nodeA.csv";
        const std::vector<std::filesystem::path> files{a, power};
        try {
            merge_energy_tables(files);
            FAIL("expected MergeError");
        } catch (const MergeError& e) {
            CHECK(std::string(e.what()).find("power_nodeA.csv") != std::string::npos);
        }
    }
    SUBCASE("empty suffix falls back to the recorded host") {
        TempDir other;
        const auto plain = export_tables(sample_export(1), other.path(), "csv", "")[1];
        const std::vector<std::filesystem::path> files{plain};
        CHECK(merge_energy_tables(files).at(0, "source") == "node07");
    }
}

TEST_CASE("ResultTable renderings agree") {
    ResultTable t{{"a", "long_column"}, {{"1", "x"}, {"22", ""}}};
    CHECK(t.to_csv() == "a,long_column\n1,x\n22,\n");
    CHECK(t.to_text() == "a   long_column\n1   x\n22  \n");
    CHECK(csv::split("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
    CHECK_THROWS_AS(csv::split("\"open"), ParseError);
    CHECK(csv::format17(0.1) == "0.10000000000000001");
    CHECK(csv::parse_double(csv::format17(1.0 / 3.0)) == 1.0 / 3.0);
}
