#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <json.hpp>

#include <tidelink/analysis.hpp>
#include <tidelink/geo.hpp>
#include <tidelink/tide.hpp>

using namespace tidelink;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kM2SpeedDegPerHour = 28.9841042;
constexpr double kM2QuarterPeriodS = 11178.541098399723;  // (360/speed)/4 hours
constexpr double kBeatPeriodS = 1275724.9643366605;       // defaults, 14.765 days

// Small in-memory grid builder: every cell of every raster set to one value.
nlohmann::json flat_grid_json(int nlat, int nlon, double amp, double phase,
                              const std::string& name = "M2",
                              double speed = kM2SpeedDegPerHour) {
    nlohmann::json j;
    j["lat0_deg"] = -10.0;
    j["lon0_deg"] = 0.0;
    j["dlat_deg"] = 10.0;
    j["dlon_deg"] = 10.0;
    j["nlat"] = nlat;
    j["nlon"] = nlon;
    j["epoch_utc"] = "2020-01-01T00:00:00Z";
    nlohmann::json amp_rows = nlohmann::json::array();
    nlohmann::json pha_rows = nlohmann::json::array();
    for (int r = 0; r < nlat; ++r) {
        nlohmann::json arow = nlohmann::json::array(), prow = nlohmann::json::array();
        for (int c = 0; c < nlon; ++c) {
            arow.push_back(amp);
            prow.push_back(phase);
        }
        amp_rows.push_back(arow);
        pha_rows.push_back(prow);
    }
    j["constituents"] = {{{"name", name},
                          {"speed_deg_per_hour", speed},
                          {"amplitude_m", amp_rows},
                          {"phase_deg", pha_rows}}};
    return j;
}

const double kGridEpochS = 1577836800.0;  // 2020-01-01T00:00:00Z

} // namespace

TEST_CASE("degree trig is exact on the quadrant boundaries") {
    REQUIRE(tide::cos_deg(0.0) == 1.0);
    REQUIRE(tide::sin_deg(0.0) == 0.0);
    REQUIRE(tide::cos_deg(90.0) == 0.0);
    REQUIRE(tide::sin_deg(90.0) == 1.0);
    REQUIRE(tide::cos_deg(180.0) == -1.0);
    REQUIRE(tide::sin_deg(180.0) == 0.0);
    REQUIRE(std::signbit(tide::sin_deg(180.0)));
    REQUIRE(tide::cos_deg(270.0) == 0.0);
    REQUIRE(tide::sin_deg(270.0) == -1.0);
    REQUIRE(tide::cos_deg(360.0) == 1.0);
    // half-turn antisymmetry for stored angles in [0, 360): the reduction
    // subtracts 180 exactly (Sterbenz), so f(x) == -f(x - 180) bitwise
    for (const double x : {181.0, 213.7, 225.0, 269.9, 271.2, 300.0, 359.0}) {
        REQUIRE(tide::cos_deg(x) == -tide::cos_deg(x - 180.0));
        REQUIRE(tide::sin_deg(x) == -tide::sin_deg(x - 180.0));
    }
}

TEST_CASE("equilibrium defaults and validation") {
    const tide::EquilibriumParams p{};
    REQUIRE(p.lunar_amplitude_m == 0.24);
    REQUIRE(p.solar_amplitude_m == 0.11);
    REQUIRE(p.lunar_semidiurnal_period_s == 44714.16);
    REQUIRE(p.solar_semidiurnal_period_s == 43200.0);
    REQUIRE_NOTHROW(p.validate());

    tide::EquilibriumParams bad = p;
    bad.lunar_amplitude_m = -0.1;
    REQUIRE_THROWS_AS(bad.validate(), NegativeAmplitude);
    bad = p;
    bad.solar_semidiurnal_period_s = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("spring-neap beat period of the default pair") {
    const tide::EquilibriumParams p{};
    REQUIRE(p.beat_period_s() == kBeatPeriodS);
    // about 14.77 days
    REQUIRE_THAT(p.beat_period_s(), WithinRel(14.77 * 86400.0, 1e-3));
}

TEST_CASE("equilibrium elevation limit cases") {
    tide::EquilibriumParams p{};
    const geo::GeoPoint equator(0.0, 0.0);

    tide::EquilibriumParams quiet = p;
    quiet.lunar_amplitude_m = 0.0;
    quiet.solar_amplitude_m = 0.0;
    for (const double t : {0.0, 3600.0, 1.0e9})
        REQUIRE(tide::equilibrium_elevation(quiet, equator, t) == 0.0);

    // polar nodes of the cos^2 shape
    for (const double t : {0.0, 7200.0, 5.5e8}) {
        REQUIRE_THAT(tide::equilibrium_elevation(p, {90.0, 0.0}, t), WithinAbs(0.0, 1e-30));
        REQUIRE_THAT(tide::equilibrium_elevation(p, {-90.0, 12.0}, t), WithinAbs(0.0, 1e-30));
    }

    // bulges aligned over the point: coherent spring maximum
    REQUIRE_THAT(tide::equilibrium_elevation(p, equator, 0.0), WithinAbs(0.35, 1e-15));
}

TEST_CASE("equilibrium elevation stays inside the amplitude budget") {
    const tide::EquilibriumParams p{};
    const double budget = p.lunar_amplitude_m + p.solar_amplitude_m;
    for (int i = 0; i < 500; ++i) {
        const double t = 977.0 * i * 131.3;
        const geo::GeoPoint at(-80.0 + (i % 161), (i * 37) % 360 - 180.0);
        REQUIRE(std::abs(tide::equilibrium_elevation(p, at, t)) <= budget + 1e-12);
    }
}

TEST_CASE("equilibrium model repeats with the semidiurnal period") {
    tide::EquilibriumParams lunar_only{};
    lunar_only.solar_amplitude_m = 0.0;
    const geo::GeoPoint at(37.0, -140.0);
    for (const double t0 : {0.0, 55555.0, 2.0e6}) {
        const double a = tide::equilibrium_elevation(lunar_only, at, t0);
        const double b = tide::equilibrium_elevation(lunar_only, at, t0 + lunar_only.lunar_semidiurnal_period_s);
        REQUIRE_THAT(b, WithinAbs(a, 1e-9));
    }
}

TEST_CASE("grid loader round trip and validation") {
    const auto good = flat_grid_json(2, 2, 1.0, 0.0);
    const auto grid = tide::load_constituent_grid(good.dump());
    REQUIRE(grid.nlat == 2);
    REQUIRE(grid.nlon == 2);
    REQUIRE(grid.layers.size() == 1);
    REQUIRE(grid.layers[0].constituent.name == "M2");

    auto mismatched = good;
    mismatched["constituents"][0]["phase_deg"][0].push_back(0.0);  // 2x3 phase raster
    REQUIRE_THROWS_AS(tide::load_constituent_grid(mismatched.dump()), DimensionMismatch);

    auto negative = good;
    negative["constituents"][0]["amplitude_m"][0][0] = -0.1;
    REQUIRE_THROWS_AS(tide::load_constituent_grid(negative.dump()), NegativeAmplitude);

    auto half_missing = good;
    half_missing["constituents"][0]["amplitude_m"][0][0] = nullptr;  // phase still present
    REQUIRE_THROWS_AS(tide::load_constituent_grid(half_missing.dump()), ParseError);

    REQUIRE_THROWS_AS(tide::load_constituent_grid("{ not json"), ParseError);

    auto zero_speed = good;
    zero_speed["constituents"][0]["speed_deg_per_hour"] = 0.0;
    REQUIRE_THROWS_AS(tide::load_constituent_grid(zero_speed.dump()), ParseError);

    auto one_row = flat_grid_json(1, 2, 1.0, 0.0);
    REQUIRE_THROWS_AS(tide::load_constituent_grid(one_row.dump()), DimensionMismatch);
}

TEST_CASE("phases are stored normalized to [0, 360)") {
    auto j = flat_grid_json(2, 2, 1.0, -30.0);
    const auto wrapped = tide::load_constituent_grid(j.dump());
    for (const double g : wrapped.layers[0].phase_deg) REQUIRE(g == 330.0);

    j = flat_grid_json(2, 2, 1.0, 370.0);
    const auto wrapped2 = tide::load_constituent_grid(j.dump());
    for (const double g : wrapped2.layers[0].phase_deg) REQUIRE(g == 10.0);

    // -30 and 330 describe the same harmonic
    const auto a = tide::load_constituent_grid(flat_grid_json(2, 2, 0.8, -30.0).dump());
    const auto b = tide::load_constituent_grid(flat_grid_json(2, 2, 0.8, 330.0).dump());
    const geo::GeoPoint at(-4.0, 7.0);
    for (const double t : {0.0, 1234.5, 99999.0})
        REQUIRE(tide::harmonic_elevation(a, at, kGridEpochS + t) ==
                tide::harmonic_elevation(b, at, kGridEpochS + t));
}

TEST_CASE("harmonic synthesis on a uniform block") {
    const auto grid = tide::load_constituent_grid(flat_grid_json(2, 2, 1.0, 0.0).dump());
    const geo::GeoPoint at(-3.0, 4.0);
    REQUIRE(tide::harmonic_elevation(grid, at, kGridEpochS) == 1.0);
    // quarter period later the cosine crosses zero
    REQUIRE_THAT(tide::harmonic_elevation(grid, at, kGridEpochS + kM2QuarterPeriodS),
                 WithinAbs(0.0, 1e-9));
    // full period closes the loop
    REQUIRE_THAT(tide::harmonic_elevation(grid, at, kGridEpochS + 4.0 * kM2QuarterPeriodS),
                 WithinAbs(1.0, 1e-9));
}

TEST_CASE("bilinear midpoint between dry and doubled columns") {
    auto j = flat_grid_json(2, 2, 0.0, 0.0);
    j["constituents"][0]["amplitude_m"] = {{0.0, 2.0}, {0.0, 2.0}};
    const auto grid = tide::load_constituent_grid(j.dump());
    // halfway across the single cell, on the epoch so cos = 1
    REQUIRE(tide::harmonic_elevation(grid, {-5.0, 5.0}, kGridEpochS) == 1.0);
}

TEST_CASE("grid bounds and land cells") {
    auto j = flat_grid_json(3, 3, 1.0, 0.0);
    j["constituents"][0]["amplitude_m"][0][0] = nullptr;
    j["constituents"][0]["phase_deg"][0][0] = nullptr;
    const auto grid = tide::load_constituent_grid(j.dump());

    REQUIRE_THROWS_AS(tide::harmonic_elevation(grid, {55.0, 5.0}, kGridEpochS), OutOfGrid);
    REQUIRE_THROWS_AS(tide::harmonic_elevation(grid, {-5.0, 100.0}, kGridEpochS), OutOfGrid);

    // the SW cell touches the masked corner
    REQUIRE_THROWS_AS(tide::harmonic_elevation(grid, {-5.0, 5.0}, kGridEpochS), MissingCell);
    REQUIRE(tide::harmonic_elevation(grid, {-5.0, 5.0}, kGridEpochS,
                                     tide::MissingCellPolicy::ZeroFill) == 0.0);
    // cells away from the mask are unaffected
    REQUIRE(tide::harmonic_elevation(grid, {5.0, 15.0}, kGridEpochS) == 1.0);
}

TEST_CASE("zero fill silences the whole point, not just the masked layer") {
    auto j = flat_grid_json(2, 2, 1.0, 0.0);
    j["constituents"].push_back(j["constituents"][0]);
    j["constituents"][1]["name"] = "S2";
    j["constituents"][1]["speed_deg_per_hour"] = 30.0;
    j["constituents"][1]["amplitude_m"][0][0] = nullptr;
    j["constituents"][1]["phase_deg"][0][0] = nullptr;
    const auto grid = tide::load_constituent_grid(j.dump());
    // M2 alone would contribute 1.0 here; the S2 mask suppresses the point
    REQUIRE(tide::harmonic_elevation(grid, {-5.0, 5.0}, kGridEpochS,
                                     tide::MissingCellPolicy::ZeroFill) == 0.0);
}

TEST_CASE("uniform field aggregates to itself") {
    const auto route = geo::sample_route({{10.0, 20.0}, {12.0, 40.0}, {8.0, 55.0}}, 50000.0);
    const tide::TideModel model = tide::UniformField{0.085};
    for (const double t : {0.0, 4444.0, 8.8e8})
        REQUIRE_THAT(tide::aggregated_tide(route, model, t), WithinRel(0.085, 1e-14));
    const auto series = tide::route_tide_series(route, model);
    REQUIRE(series.eval(0.0) == 0.085);
    REQUIRE(series.eval(7.7e7) == 0.085);
}

TEST_CASE("aggregation requires a sampled route") {
    const geo::CableRoute empty;
    REQUIRE_THROWS_AS(tide::aggregated_tide(empty, tide::UniformField{0.1}, 0.0),
                      NonPositiveLength);
    REQUIRE_THROWS_AS(tide::route_tide_series(empty, tide::UniformField{0.1}),
                      NonPositiveLength);
}

TEST_CASE("mirrored-phase halves cancel exactly") {
    // Two equal halves whose cells carry the same amplitude at opposite phase:
    // the east half's elevation is the bitwise negation of the west half's,
    // so the aggregate is exactly zero at every instant.
    nlohmann::json j;
    j["lat0_deg"] = -10.0;
    j["lon0_deg"] = 0.0;
    j["dlat_deg"] = 10.0;
    j["dlon_deg"] = 4.0;
    j["nlat"] = 3;
    j["nlon"] = 6;
    j["epoch_utc"] = "2020-01-01T00:00:00Z";
    nlohmann::json amp = nlohmann::json::array(), pha = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        nlohmann::json arow = nlohmann::json::array(), prow = nlohmann::json::array();
        for (int c = 0; c < 6; ++c) {
            arow.push_back(0.37);
            prow.push_back(c <= 2 ? 0.0 : 180.0);
        }
        amp.push_back(arow);
        pha.push_back(prow);
    }
    j["constituents"] = {{{"name", "M2"},
                          {"speed_deg_per_hour", kM2SpeedDegPerHour},
                          {"amplitude_m", amp},
                          {"phase_deg", pha}}};
    const tide::TideModel model = tide::load_constituent_grid(j.dump());

    // one leg, two segments: midpoints near lon 6 (phase 0) and lon 14 (180)
    const auto route = geo::sample_route({{0.0, 2.0}, {0.0, 18.0}}, 9.0e5);
    REQUIRE(route.segments.size() == 2);
    REQUIRE(route.segments[0].length_m == route.segments[1].length_m);

    const auto& grid = std::get<tide::ConstituentGrid>(model);
    for (int i = 0; i < 60; ++i) {
        const double t = kGridEpochS + 977.3 * i * i;
        const double west = tide::harmonic_elevation(grid, route.segments[0].midpoint, t);
        const double east = tide::harmonic_elevation(grid, route.segments[1].midpoint, t);
        REQUIRE(east == -west);
        REQUIRE(tide::aggregated_tide(route, model, t) == 0.0);
    }
    // at the epoch the halves sit at exactly +h and -h
    REQUIRE(tide::harmonic_elevation(grid, route.segments[0].midpoint, kGridEpochS) == 0.37);
    REQUIRE(tide::harmonic_elevation(grid, route.segments[1].midpoint, kGridEpochS) == -0.37);

    const auto series = tide::route_tide_series(route, model);
    for (int i = 0; i < 60; ++i) REQUIRE(series.eval(kGridEpochS + 1e4 * i) == 0.0);
}

TEST_CASE("aggregate is linear in the constituent layers") {
    auto j1 = flat_grid_json(3, 3, 0.6, 40.0, "M2", kM2SpeedDegPerHour);
    auto j2 = flat_grid_json(3, 3, 0.2, 310.0, "S2", 30.0);
    auto both = j1;
    both["constituents"].push_back(j2["constituents"][0]);

    const tide::TideModel m1 = tide::load_constituent_grid(j1.dump());
    const tide::TideModel m2 = tide::load_constituent_grid(j2.dump());
    const tide::TideModel msum = tide::load_constituent_grid(both.dump());
    const auto route = geo::sample_route({{-5.0, 3.0}, {5.0, 17.0}}, 100000.0);

    for (int i = 0; i < 10; ++i) {
        const double t = kGridEpochS + 13791.0 * i;
        const double sum = tide::aggregated_tide(route, m1, t) + tide::aggregated_tide(route, m2, t);
        REQUIRE_THAT(tide::aggregated_tide(route, msum, t), WithinAbs(sum, 1e-12 * 0.8 + 1e-15));
    }
}

TEST_CASE("aggreagate never exceeds the strongest midpoint elevation") {
    auto j = flat_grid_json(3, 3, 0.5, 0.0);
    // break the symmetry so midpoints differ
    j["constituents"][0]["amplitude_m"] = {{0.1, 0.4, 0.7}, {0.2, 0.5, 0.8}, {0.3, 0.6, 0.9}};
    j["constituents"][0]["phase_deg"] = {{0.0, 30.0, 60.0}, {90.0, 120.0, 150.0},
                                          {180.0, 210.0, 240.0}};
    const tide::TideModel model = tide::load_constituent_grid(j.dump());
    const auto route = geo::sample_route({{-5.0, 2.0}, {7.0, 18.0}}, 60000.0);
    for (int i = 0; i < 25; ++i) {
        const double t = kGridEpochS + 3937.0 * i;
        double strongest = 0.0;
        for (const auto& seg : route.segments)
            strongest = std::max(strongest,
                                 std::abs(tide::elevation(model, seg.midpoint, t)));
        REQUIRE(std::abs(tide::aggregated_tide(route, model, t)) <= strongest + 1e-15);
    }
}

TEST_CASE("single-constituent aggregate repeats with its own period") {
    const tide::TideModel model =
        tide::load_constituent_grid(flat_grid_json(3, 3, 0.31, 77.0).dump());
    const auto route = geo::sample_route({{-5.0, 2.0}, {7.0, 18.0}}, 60000.0);
    const double period_s = 360.0 / kM2SpeedDegPerHour * 3600.0;
    for (const double t0 : {0.0, 8.2e4, 5.0e6}) {
        const double a = tide::aggregated_tide(route, model, kGridEpochS + t0);
        const double b = tide::aggregated_tide(route, model, kGridEpochS + t0 + period_s);
        REQUIRE_THAT(b, WithinAbs(a, 1e-9));
    }
}

TEST_CASE("closed-form series matches the brute-force aggregate") {
    // spatially varying multi-constituent grid
    auto j = flat_grid_json(3, 3, 0.5, 0.0);
    j["constituents"][0]["amplitude_m"] = {{0.1, 0.4, 0.7}, {0.2, 0.5, 0.8}, {0.3, 0.6, 0.9}};
    j["constituents"][0]["phase_deg"] = {{10.0, 35.0, 65.0}, {95.0, 125.0, 155.0},
                                          {185.0, 215.0, 245.0}};
    j["constituents"].push_back(j["constituents"][0]);
    j["constituents"][1]["name"] = "K1";
    j["constituents"][1]["speed_deg_per_hour"] = 15.0410686;
    const tide::TideModel model = tide::load_constituent_grid(j.dump());
    const auto route = geo::sample_route({{-6.0, 1.5}, {6.5, 18.5}}, 40000.0);
    const auto series = tide::route_tide_series(route, model);
    for (int i = 0; i < 20; ++i) {
        const double t = kGridEpochS + 7919.0 * i + 0.25;
        const double brute = tide::aggregated_tide(route, model, t);
        REQUIRE_THAT(series.eval(t), WithinAbs(brute, std::abs(brute) * 1e-12 + 1e-15));
    }

    // same equivalence for the equilibrium model
    const tide::TideModel eq = tide::EquilibriumParams{};
    const auto eq_series = tide::route_tide_series(route, eq);
    for (int i = 0; i < 20; ++i) {
        const double t = 104729.0 * i + 11.0;
        const double brute = tide::aggregated_tide(route, eq, t);
        REQUIRE_THAT(eq_series.eval(t), WithinAbs(brute, std::abs(brute) * 1e-12 + 1e-15));
    }
}

TEST_CASE("series and brute force agree on zero-filled land") {
    auto j = flat_grid_json(3, 3, 1.0, 0.0);
    j["constituents"].push_back(j["constituents"][0]);
    j["constituents"][1]["name"] = "S2";
    j["constituents"][1]["speed_deg_per_hour"] = 30.0;
    j["constituents"][1]["amplitude_m"][1][1] = nullptr;
    j["constituents"][1]["phase_deg"][1][1] = nullptr;
    const tide::TideModel model = tide::load_constituent_grid(j.dump());
    const auto route = geo::sample_route({{-5.0, 2.0}, {5.0, 18.0}}, 60000.0);

    REQUIRE_THROWS_AS(tide::route_tide_series(route, model), MissingCell);
    const auto series = tide::route_tide_series(route, model, tide::MissingCellPolicy::ZeroFill);
    for (int i = 0; i < 12; ++i) {
        const double t = kGridEpochS + 5557.0 * i;
        const double brute = tide::aggregated_tide(route, model, t, tide::MissingCellPolicy::ZeroFill);
        REQUIRE_THAT(series.eval(t), WithinAbs(brute, std::abs(brute) * 1e-12 + 1e-15));
    }
}

TEST_CASE("thirty days of equilibrium forcing beat twice") {
    const tide::TideModel model = tide::EquilibriumParams{};
    const auto route = geo::sample_route({{0.0, -155.0}, {0.0, -150.0}}, 50000.0);
    const auto series = tide::route_tide_series(route, model);

    // springs fall at multiples of the beat period; start half a beat before
    // one so two maxima sit well inside the record instead of on its edges
    analysis::DecimatedSeries at;
    at.bin_width_s = 300.0;
    const double span_s = 30.0 * 86400.0;
    const double t0 = -0.5 * kBeatPeriodS;
    for (double t = 0.0; t <= span_s; t += 300.0) {
        at.t_s.push_back(t);
        at.value.push_back(series.eval(t0 + t));
        at.source_count.push_back(1);
    }
    const auto envelope = analysis::amplitude_envelope(at, 2.0 * 86400.0, 0.25 * 86400.0);
    const auto peaks = analysis::find_peaks(envelope, 0.02);
    REQUIRE(peaks.size() == 2);
    const double sep_days = std::abs(peaks[0].t_s - peaks[1].t_s) / 86400.0;
    REQUIRE_THAT(sep_days, WithinAbs(14.77, 0.2));
}
