#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tidelink/analysis.hpp"
#include "tidelink/elastic.hpp"
#include "tidelink/errors.hpp"
#include "tidelink/geo.hpp"
#include "tidelink/instrument.hpp"
#include "tidelink/tide.hpp"
#include "tidelink/timeutil.hpp"

namespace tidelink::cli {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("cannot read " + path);
    return ss.str();
}

namespace detail {

inline void expect_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                        const std::string& context) {
    if (!j.is_object())
        throw ConfigError(context + " must be a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) { ok = true; break; }
        if (!ok)
            throw ConfigError("unknown key \"" + item.key() + "\" in " + context);
    }
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("bad value for \"") + key + "\"");
    }
}

} // namespace detail

/// Parses the route interchange format: a name, an ordered waypoint list, and
/// optionally the declared physical cable length.
inline geo::CableRoute load_route_json(const std::string& text, double step_m) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("route JSON: ") + e.what());
    }
    detail::expect_keys(j, {"name", "waypoints", "declared_length_m"}, "route");
    if (!j.contains("waypoints") || !j.at("waypoints").is_array())
        throw ParseError("route JSON: waypoints array is required");
    std::vector<geo::GeoPoint> pts;
    for (const auto& wj : j.at("waypoints")) {
        detail::expect_keys(wj, {"lat_deg", "lon_deg"}, "waypoint");
        if (!wj.contains("lat_deg") || !wj.contains("lon_deg"))
            throw ParseError("route JSON: waypoint needs lat_deg and lon_deg");
        pts.emplace_back(wj.at("lat_deg").get<double>(), wj.at("lon_deg").get<double>());
    }
    std::optional<double> declared;
    if (j.contains("declared_length_m"))
        declared = j.at("declared_length_m").get<double>();
    auto route = geo::sample_route(pts, step_m, declared);
    route.name = detail::get_or<std::string>(j, "name", "");
    return route;
}

inline geo::CableRoute load_route_file(const std::string& path, double step_m) {
    return load_route_json(read_text_file(path), step_m);
}

struct RunConfig {
    std::string route_path;
    double step_m = 50000.0;
    bool zero_fill_land = false;

    // exactly one of these three tide sources; equilibrium is the default so
    // a freshly constructed config is already valid
    std::optional<double> uniform_elevation_m;
    std::optional<std::string> grid_path;
    std::optional<tide::EquilibriumParams> equilibrium = tide::EquilibriumParams{};

    std::string material = "steel";
    std::optional<elastic::TubeSpec> custom_tube;
    elastic::PressureModel pressure;
    elastic::ProbeSpec probe;
    instrument::RecordingConfig recording;
    instrument::ArtifactModel artifacts;
    analysis::AnalysisOptions analysis;
    double predict_step_s = 600.0;
    std::string out_dir = "out";
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
    using detail::expect_keys;
    using detail::get_or;
    expect_keys(j, {"route", "step_m", "zero_fill_land", "tide", "material", "tube", "pressure",
                    "probe", "recording", "artifacts", "analysis", "predict_step_s", "out"},
                "config");
    RunConfig cfg;
    cfg.route_path = get_or<std::string>(j, "route", "");
    cfg.step_m = get_or(j, "step_m", cfg.step_m);
    cfg.zero_fill_land = get_or(j, "zero_fill_land", cfg.zero_fill_land);
    cfg.predict_step_s = get_or(j, "predict_step_s", cfg.predict_step_s);
    cfg.out_dir = get_or<std::string>(j, "out", cfg.out_dir);

    if (j.contains("tide")) {
        const auto& tj = j.at("tide");
        expect_keys(tj, {"uniform_elevation_m", "grid", "equilibrium"}, "tide");
        cfg.equilibrium.reset();  // the named source replaces the default
        int sources = 0;
        if (tj.contains("uniform_elevation_m")) {
            cfg.uniform_elevation_m = tj.at("uniform_elevation_m").get<double>();
            ++sources;
        }
        if (tj.contains("grid")) {
            cfg.grid_path = tj.at("grid").get<std::string>();
            ++sources;
        }
        if (tj.contains("equilibrium")) {
            const auto& ej = tj.at("equilibrium");
            expect_keys(ej, {"lunar_amplitude_m", "solar_amplitude_m", "lunar_semidiurnal_period_s",
                             "solar_semidiurnal_period_s", "lunar_phase0_rad", "solar_phase0_rad"},
                        "tide.equilibrium");
            tide::EquilibriumParams p;
            p.lunar_amplitude_m = get_or(ej, "lunar_amplitude_m", p.lunar_amplitude_m);
            p.solar_amplitude_m = get_or(ej, "solar_amplitude_m", p.solar_amplitude_m);
            p.lunar_semidiurnal_period_s = get_or(ej, "lunar_semidiurnal_period_s", p.lunar_semidiurnal_period_s);
            p.solar_semidiurnal_period_s = get_or(ej, "solar_semidiurnal_period_s", p.solar_semidiurnal_period_s);
            p.lunar_phase0_rad = get_or(ej, "lunar_phase0_rad", p.lunar_phase0_rad);
            p.solar_phase0_rad = get_or(ej, "solar_phase0_rad", p.solar_phase0_rad);
            p.validate();
            cfg.equilibrium = p;
            ++sources;
        }
        if (sources != 1)
            throw ConfigError("tide must name exactly one source: uniform_elevation_m, grid, or equilibrium");
    }

    cfg.material = get_or<std::string>(j, "material", cfg.material);
    if (cfg.material != "steel" && cfg.material != "hdpe" && cfg.material != "custom")
        throw ConfigError("material must be steel, hdpe, or custom");
    if (j.contains("tube")) {
        const auto& uj = j.at("tube");
        expect_keys(uj, {"young_modulus_pa", "poisson_ratio", "r_outer_m", "r_inner_m", "coupling"},
                    "tube");
        elastic::TubeSpec t;
        t.young_modulus_pa = get_or(uj, "young_modulus_pa", 0.0);
        t.poisson_ratio = get_or(uj, "poisson_ratio", 0.0);
        t.r_outer_m = get_or(uj, "r_outer_m", 0.0);
        t.r_inner_m = get_or(uj, "r_inner_m", 0.0);
        t.coupling = get_or(uj, "coupling", 1.0);
        t.validate();
        cfg.custom_tube = t;
    }
    if (cfg.material == "custom" && !cfg.custom_tube)
        throw ConfigError("material custom requires a tube section");

    if (j.contains("pressure")) {
        const auto& pj = j.at("pressure");
        expect_keys(pj, {"rho_g_pa_per_m"}, "pressure");
        cfg.pressure.rho_g_pa_per_m = get_or(pj, "rho_g_pa_per_m", cfg.pressure.rho_g_pa_per_m);
        cfg.pressure.validate();
    }
    if (j.contains("probe")) {
        const auto& pj = j.at("probe");
        expect_keys(pj, {"rf_freq_hz", "group_velocity_m_per_s", "cd_ps_per_nm_km",
                         "carrier_wavelength_nm", "strain_optic_factor"},
                    "probe");
        cfg.probe.rf_freq_hz = get_or(pj, "rf_freq_hz", cfg.probe.rf_freq_hz);
        cfg.probe.group_velocity_m_per_s = get_or(pj, "group_velocity_m_per_s", cfg.probe.group_velocity_m_per_s);
        cfg.probe.cd_ps_per_nm_km = get_or(pj, "cd_ps_per_nm_km", cfg.probe.cd_ps_per_nm_km);
        cfg.probe.carrier_wavelength_nm = get_or(pj, "carrier_wavelength_nm", cfg.probe.carrier_wavelength_nm);
        cfg.probe.strain_optic_factor = get_or(pj, "strain_optic_factor", cfg.probe.strain_optic_factor);
        cfg.probe.validate();
    }
    if (j.contains("recording")) {
        const auto& rj = j.at("recording");
        expect_keys(rj, {"start_utc", "duration_s", "sample_rate_hz", "seed"}, "recording");
        if (rj.contains("start_utc"))
            cfg.recording.start_utc_s =
                static_cast<double>(timeutil::parse_utc(rj.at("start_utc").get<std::string>()));
        cfg.recording.duration_s = get_or(rj, "duration_s", cfg.recording.duration_s);
        cfg.recording.sample_rate_hz = get_or(rj, "sample_rate_hz", cfg.recording.sample_rate_hz);
        cfg.recording.seed = get_or<std::uint64_t>(rj, "seed", cfg.recording.seed);
        cfg.recording.validate();
    }
    if (j.contains("artifacts")) {
        const auto& aj = j.at("artifacts");
        expect_keys(aj, {"tilt_strain_per_s", "ecl_sigma_hz", "ecl_block_s", "synth_phase_sigma_deg",
                         "white_phase_sigma_deg", "ambient_temperature", "temperature_mean_c",
                         "temperature_sigma_c", "temperature_tau_s", "temperature_step_s"},
                    "artifacts");
        auto& a = cfg.artifacts;
        a.tilt_strain_per_s = get_or(aj, "tilt_strain_per_s", a.tilt_strain_per_s);
        a.ecl_sigma_hz = get_or(aj, "ecl_sigma_hz", a.ecl_sigma_hz);
        a.ecl_block_s = get_or(aj, "ecl_block_s", a.ecl_block_s);
        a.synth_phase_sigma_deg = get_or(aj, "synth_phase_sigma_deg", a.synth_phase_sigma_deg);
        a.white_phase_sigma_deg = get_or(aj, "white_phase_sigma_deg", a.white_phase_sigma_deg);
        a.ambient_temperature = get_or(aj, "ambient_temperature", a.ambient_temperature);
        a.temperature_mean_c = get_or(aj, "temperature_mean_c", a.temperature_mean_c);
        a.temperature_sigma_c = get_or(aj, "temperature_sigma_c", a.temperature_sigma_c);
        a.temperature_tau_s = get_or(aj, "temperature_tau_s", a.temperature_tau_s);
        a.temperature_step_s = get_or(aj, "temperature_step_s", a.temperature_step_s);
        a.validate();
    }
    if (j.contains("analysis")) {
        const auto& aj = j.at("analysis");
        expect_keys(aj, {"window_s", "period_min_s", "period_max_s", "period_grid"}, "analysis");
        auto& a = cfg.analysis;
        a.window_s = get_or(aj, "window_s", a.window_s);
        a.period_min_s = get_or(aj, "period_min_s", a.period_min_s);
        a.period_max_s = get_or(aj, "period_max_s", a.period_max_s);
        a.period_grid = get_or(aj, "period_grid", a.period_grid);
        if (!(a.window_s > 0.0))
            throw ConfigError("analysis.window_s must be positive");
    }
    if (!(cfg.step_m > 0.0))
        throw ConfigError("step_m must be positive");
    if (!(cfg.predict_step_s > 0.0))
        throw ConfigError("predict_step_s must be positive");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config JSON: ") + e.what());
    }
    return parse_run_config(j);
}

inline elastic::TubeSpec make_tube(const RunConfig& cfg) {
    if (cfg.material == "steel") return elastic::steel_tube();
    if (cfg.material == "hdpe") return elastic::hdpe_tube();
    return *cfg.custom_tube;
}

inline tide::TideModel make_tide_model(const RunConfig& cfg) {
    if (cfg.uniform_elevation_m)
        return tide::UniformField{*cfg.uniform_elevation_m};
    if (cfg.grid_path)
        return tide::load_constituent_grid(read_text_file(*cfg.grid_path));
    if (!cfg.equilibrium)
        throw ConfigError("no tide source configured");
    return *cfg.equilibrium;
}

/// Serializes the effective configuration, resolved defaults included, for
/// the run provenance echo.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["route"] = cfg.route_path;
    j["step_m"] = cfg.step_m;
    j["zero_fill_land"] = cfg.zero_fill_land;
    nlohmann::json tj;
    if (cfg.uniform_elevation_m) tj["uniform_elevation_m"] = *cfg.uniform_elevation_m;
    if (cfg.grid_path) tj["grid"] = *cfg.grid_path;
    if (cfg.equilibrium) {
        const auto& e = *cfg.equilibrium;
        tj["equilibrium"] = {{"lunar_amplitude_m", e.lunar_amplitude_m},
                             {"solar_amplitude_m", e.solar_amplitude_m},
                             {"lunar_semidiurnal_period_s", e.lunar_semidiurnal_period_s},
                             {"solar_semidiurnal_period_s", e.solar_semidiurnal_period_s},
                             {"lunar_phase0_rad", e.lunar_phase0_rad},
                             {"solar_phase0_rad", e.solar_phase0_rad}};
    }
    j["tide"] = tj;
    j["material"] = cfg.material;
    {
        const auto tube = make_tube(cfg);
        j["tube"] = {{"young_modulus_pa", tube.young_modulus_pa},
                     {"poisson_ratio", tube.poisson_ratio},
                     {"r_outer_m", tube.r_outer_m},
                     {"r_inner_m", tube.r_inner_m},
                     {"coupling", tube.coupling}};
    }
    j["pressure"] = {{"rho_g_pa_per_m", cfg.pressure.rho_g_pa_per_m}};
    j["probe"] = {{"rf_freq_hz", cfg.probe.rf_freq_hz},
                  {"group_velocity_m_per_s", cfg.probe.group_velocity_m_per_s},
                  {"cd_ps_per_nm_km", cfg.probe.cd_ps_per_nm_km},
                  {"carrier_wavelength_nm", cfg.probe.carrier_wavelength_nm},
                  {"strain_optic_factor", cfg.probe.strain_optic_factor}};
    const double start_whole = std::floor(cfg.recording.start_utc_s);
    j["recording"] = {{"start_utc", timeutil::format_utc(static_cast<std::int64_t>(start_whole))},
                      {"duration_s", cfg.recording.duration_s},
                      {"sample_rate_hz", cfg.recording.sample_rate_hz},
                      {"seed", cfg.recording.seed}};
    j["artifacts"] = {{"tilt_strain_per_s", cfg.artifacts.tilt_strain_per_s},
                      {"ecl_sigma_hz", cfg.artifacts.ecl_sigma_hz},
                      {"ecl_block_s", cfg.artifacts.ecl_block_s},
                      {"synth_phase_sigma_deg", cfg.artifacts.synth_phase_sigma_deg},
                      {"white_phase_sigma_deg", cfg.artifacts.white_phase_sigma_deg},
                      {"ambient_temperature", cfg.artifacts.ambient_temperature},
                      {"temperature_mean_c", cfg.artifacts.temperature_mean_c},
                      {"temperature_sigma_c", cfg.artifacts.temperature_sigma_c},
                      {"temperature_tau_s", cfg.artifacts.temperature_tau_s},
                      {"temperature_step_s", cfg.artifacts.temperature_step_s}};
    j["analysis"] = {{"window_s", cfg.analysis.window_s},
                     {"period_min_s", cfg.analysis.period_min_s},
                     {"period_max_s", cfg.analysis.period_max_s},
                     {"period_grid", cfg.analysis.period_grid}};
    j["predict_step_s"] = cfg.predict_step_s;
    j["out"] = cfg.out_dir;
    return j;
}

} // namespace tidelink::cli
