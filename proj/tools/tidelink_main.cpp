// tidelink command-line shell: predict tide-driven cable response, synthesize
// phase-meter recordings, analyze recordings, and check the bundled reference
// numbers.
//
// Exit codes: 0 ok, 1 reference-tolerance failure (reproduce), 2 config or
// parse error, 3 model evaluation error, 4 I/O error, 5 analysis precondition.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tidelink/tidelink.hpp>

namespace tl = tidelink;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTolerance = 1;
constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;
constexpr int kExitIo = 4;
constexpr int kExitAnalysis = 5;

int classify(const tl::Error& e) {
    if (dynamic_cast<const tl::IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const tl::SpanTooShort*>(&e) || dynamic_cast<const tl::TooFewPoints*>(&e) ||
        dynamic_cast<const tl::EmptySeries*>(&e) || dynamic_cast<const tl::WindowTooSmall*>(&e) ||
        dynamic_cast<const tl::GridMismatch*>(&e) || dynamic_cast<const tl::DegenerateTime*>(&e) ||
        dynamic_cast<const tl::ZeroVariance*>(&e))
        return kExitAnalysis;
    if (dynamic_cast<const tl::ConfigError*>(&e) || dynamic_cast<const tl::ParseError*>(&e) ||
        dynamic_cast<const tl::InvalidCoordinate*>(&e) || dynamic_cast<const tl::InvalidStep*>(&e) ||
        dynamic_cast<const tl::ScalingOutOfRange*>(&e) ||
        dynamic_cast<const tl::DimensionMismatch*>(&e) ||
        dynamic_cast<const tl::NegativeAmplitude*>(&e) ||
        dynamic_cast<const tl::OverflowSamples*>(&e))
        return kExitConfig;
    // OutOfGrid, MissingCell, AntipodalPoints, NonPositiveLength: the inputs
    // parsed but the model cannot be evaluated on them.
    return kExitModel;
}

// Values shared by all subcommands; only the parsed subcommand writes them.
struct Values {
    std::string config_path;
    std::string route_path;
    std::string material;
    std::string out_dir;
    std::string grid_path;
    std::string start_utc;
    std::string recording_path;
    std::string temperature_path;
    std::uint64_t seed = 0;
    double window_s = 0.0;
    double step_m = 0.0;
    double duration_s = 0.0;
    double rate_hz = 0.0;
    double uniform_m = 0.0;
    double period_min_s = 0.0;
    double period_max_s = 0.0;
    double predict_step_s = 0.0;
    double tube_e_pa = 0.0;
    double tube_nu = 0.0;
    double tube_ro_m = 0.0;
    double tube_ri_m = 0.0;
    double tube_coupling = 1.0;
    bool zero_fill = false;
    bool perturb = false;
};

struct Flags {
    CLI::Option* config = nullptr;
    CLI::Option* route = nullptr;
    CLI::Option* material = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* window = nullptr;
    CLI::Option* zero_fill = nullptr;
    CLI::Option* step = nullptr;
    CLI::Option* duration = nullptr;
    CLI::Option* rate = nullptr;
    CLI::Option* start = nullptr;
    CLI::Option* uniform = nullptr;
    CLI::Option* grid = nullptr;
    CLI::Option* period_min = nullptr;
    CLI::Option* period_max = nullptr;
    CLI::Option* predict_step = nullptr;
};

Flags add_common_flags(CLI::App* cmd, Values& v) {
    Flags f;
    f.config = cmd->add_option("--config", v.config_path, "JSON run configuration");
    f.route = cmd->add_option("--route", v.route_path, "route JSON (overrides config)");
    f.material = cmd->add_option("--material", v.material, "cable jacket preset: steel|hdpe|custom")
                     ->check(CLI::IsMember({"steel", "hdpe", "custom"}));
    f.seed = cmd->add_option("--seed", v.seed, "noise seed (overrides config)");
    f.out = cmd->add_option("--out", v.out_dir, "output directory");
    f.window = cmd->add_option("--window-s", v.window_s, "block-average window in seconds");
    f.zero_fill = cmd->add_flag("--zero-fill-land", v.zero_fill,
                                "treat unmapped grid cells as zero elevation");
    f.step = cmd->add_option("--step-m", v.step_m, "route discretization step in meters");
    f.duration = cmd->add_option("--duration-s", v.duration_s, "recording/prediction length");
    f.rate = cmd->add_option("--rate-hz", v.rate_hz, "sample rate");
    f.start = cmd->add_option("--start-utc", v.start_utc, "start instant, YYYY-MM-DDThh:mm:ssZ");
    f.uniform = cmd->add_option("--uniform-m", v.uniform_m,
                                "use a uniform tide elevation instead of the configured source");
    f.grid = cmd->add_option("--grid", v.grid_path,
                             "use a constituent grid JSON instead of the configured source");
    f.period_min = cmd->add_option("--period-min-s", v.period_min_s,
                                   "shortest period to scan (makes the scan mandatory)");
    f.period_max = cmd->add_option("--period-max-s", v.period_max_s,
                                   "longest period to scan (makes the scan mandatory)");
    f.predict_step = cmd->add_option("--predict-step-s", v.predict_step_s,
                                     "sampling step of the prediction CSV");
    return f;
}

tl::cli::RunConfig make_config(const Values& v, const Flags& f) {
    tl::cli::RunConfig cfg;
    if (*f.config) cfg = tl::cli::load_run_config(v.config_path);
    if (*f.route) cfg.route_path = v.route_path;
    if (*f.step) {
        if (!(v.step_m > 0.0)) throw tl::ConfigError("--step-m must be positive");
        cfg.step_m = v.step_m;
    }
    if (*f.uniform && *f.grid)
        throw tl::ConfigError("--uniform-m and --grid both name a tide source; pick one");
    if (*f.uniform) {
        cfg.uniform_elevation_m = v.uniform_m;
        cfg.grid_path.reset();
        cfg.equilibrium.reset();
    } else if (*f.grid) {
        cfg.grid_path = v.grid_path;
        cfg.uniform_elevation_m.reset();
        cfg.equilibrium.reset();
    }
    if (*f.zero_fill) cfg.zero_fill_land = true;
    if (*f.material) {
        cfg.material = v.material;
        if (cfg.material == "custom" && !cfg.custom_tube)
            throw tl::ConfigError("material custom requires a tube section in the config");
    }
    if (*f.seed) cfg.recording.seed = v.seed;
    if (*f.out) cfg.out_dir = v.out_dir;
    if (*f.window) {
        if (!(v.window_s > 0.0)) throw tl::ConfigError("--window-s must be positive");
        cfg.analysis.window_s = v.window_s;
    }
    if (*f.duration) cfg.recording.duration_s = v.duration_s;
    if (*f.rate) cfg.recording.sample_rate_hz = v.rate_hz;
    if (*f.start)
        cfg.recording.start_utc_s = static_cast<double>(tl::timeutil::parse_utc(v.start_utc));
    if (*f.period_min) {
        cfg.analysis.period_min_s = v.period_min_s;
        cfg.analysis.strict_periods = true;
    }
    if (*f.period_max) {
        cfg.analysis.period_max_s = v.period_max_s;
        cfg.analysis.strict_periods = true;
    }
    if (*f.predict_step) {
        if (!(v.predict_step_s > 0.0)) throw tl::ConfigError("--predict-step-s must be positive");
        cfg.predict_step_s = v.predict_step_s;
    }
    cfg.recording.validate();
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw tl::IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw tl::IoError("cannot open " + p.string() + " for writing");
    return os;
}

void finish_write(std::ofstream& os, const fs::path& p) {
    os.flush();
    if (!os) throw tl::IoError("write failed for " + p.string());
}

void echo_config(const tl::cli::RunConfig& cfg) {
    const fs::path p = fs::path(cfg.out_dir) / "config_echo.json";
    auto os = open_out(p);
    os << tl::cli::config_to_json(cfg).dump(2) << "\n";
    finish_write(os, p);
}

tl::geo::CableRoute load_route(const tl::cli::RunConfig& cfg) {
    if (cfg.route_path.empty())
        throw tl::ConfigError("a route is required (--route or the config's route key)");
    return tl::cli::load_route_file(cfg.route_path, cfg.step_m);
}

tl::tide::MissingCellPolicy policy_of(const tl::cli::RunConfig& cfg) {
    return cfg.zero_fill_land ? tl::tide::MissingCellPolicy::ZeroFill
                              : tl::tide::MissingCellPolicy::Error;
}

void print_material_table_header() {
    std::printf("  %-8s %9s %6s %8s %8s %10s %10s %10s\n", "material", "E[GPa]", "nu",
                "r_o[mm]", "r_i[mm]", "dP[Pa]", "dl[cm]", "mpd[deg]");
}

void print_material_row(const char* name, const tl::elastic::TubeSpec& tube, double dp_pa,
                        double length_m, const tl::elastic::ProbeSpec& probe) {
    const double dl = tl::elastic::poisson_length_change(tube, dp_pa, length_m);
    const double mpd = tl::elastic::phase_from_path_change(probe, dl);
    std::printf("  %-8s %9.1f %6.2f %8.2f %8.2f %10.3f %10.3f %10.3f\n", name,
                tube.young_modulus_pa / 1e9, tube.poisson_ratio, tube.r_outer_m * 1e3,
                tube.r_inner_m * 1e3, dp_pa, dl * 100.0, mpd);
}

int run_predict(const tl::cli::RunConfig& cfg) {
    const auto route = load_route(cfg);
    const auto model = tl::cli::make_tide_model(cfg);
    const auto tube = tl::cli::make_tube(cfg);
    const auto series = tl::tide::route_tide_series(route, model, policy_of(cfg));

    ensure_out_dir(cfg.out_dir);
    echo_config(cfg);

    const double length_m = route.total_length_m;
    const double head_m = cfg.uniform_elevation_m ? *cfg.uniform_elevation_m : 0.085;
    const double dp_pa = tl::elastic::hydrostatic_pressure_delta(cfg.pressure, head_m);
    std::printf("steady-state response to a %.3f m head over %.1f km of cable\n", head_m,
                length_m / 1000.0);
    print_material_table_header();
    print_material_row(cfg.material.c_str(), tube, dp_pa, length_m, cfg.probe);

    // strain per meter of surface head; the time series is then one multiply
    const double strain_per_m = tl::elastic::poisson_unit_strain(tube, cfg.pressure.rho_g_pa_per_m);

    const fs::path csv_path = fs::path(cfg.out_dir) / "prediction.csv";
    auto os = open_out(csv_path);
    const double start_whole = std::floor(cfg.recording.start_utc_s);
    if (start_whole != cfg.recording.start_utc_s)
        throw tl::ConfigError("prediction start must be a whole UTC second");
    std::string buf;
    buf += "# start_utc=" + tl::timeutil::format_utc(static_cast<std::int64_t>(start_whole)) + "\n";
    buf += "# step_s=";
    tl::instrument::detail::append_double(buf, cfg.predict_step_s);
    buf += "\n# schema=1\nt_s,at_m,dl_m,mpd_deg\n";
    const auto rows =
        static_cast<std::int64_t>(std::floor(cfg.recording.duration_s / cfg.predict_step_s)) + 1;
    for (std::int64_t i = 0; i < rows; ++i) {
        const double t_s = static_cast<double>(i) * cfg.predict_step_s;
        const double at = series.eval(cfg.recording.start_utc_s + t_s);
        const double dl = strain_per_m * at * length_m;
        const double mpd = tl::elastic::phase_from_path_change(cfg.probe, dl);
        tl::instrument::detail::append_double(buf, t_s);
        buf += ',';
        tl::instrument::detail::append_double(buf, at);
        buf += ',';
        tl::instrument::detail::append_double(buf, dl);
        buf += ',';
        tl::instrument::detail::append_double(buf, mpd);
        buf += '\n';
        if (buf.size() > (1u << 16)) {
            os << buf;
            buf.clear();
        }
    }
    os << buf;
    finish_write(os, csv_path);
    std::printf("wrote %" PRId64 " prediction rows to %s\n", rows, csv_path.c_str());
    return kExitOk;
}

int run_simulate(const tl::cli::RunConfig& cfg) {
    const auto route = load_route(cfg);
    const auto model = tl::cli::make_tide_model(cfg);
    const auto tube = tl::cli::make_tube(cfg);

    ensure_out_dir(cfg.out_dir);
    echo_config(cfg);

    const fs::path rec_path = fs::path(cfg.out_dir) / "recording.csv";
    const fs::path truth_path = fs::path(cfg.out_dir) / "truth.csv";
    auto rec_os = open_out(rec_path);
    auto truth_os = open_out(truth_path);

    tl::instrument::RecordingCsvWriter writer(rec_os, cfg.recording, cfg.probe, false);
    std::string truth_buf;
    truth_buf += "# start_utc=" +
                 tl::timeutil::format_utc(static_cast<std::int64_t>(cfg.recording.start_utc_s)) +
                 "\n# sample_rate_hz=";
    tl::instrument::detail::append_double(truth_buf, cfg.recording.sample_rate_hz);
    truth_buf += "\n# schema=1\nt_s,dl_m,at_m\n";

    std::int64_t rows = 0;
    tl::instrument::synthesize_mpd(
        route, model, tube, cfg.pressure, cfg.probe, cfg.recording, cfg.artifacts,
        [&](std::int64_t, double t_s, double mpd, double dl, double at) {
            writer.row(t_s, mpd);
            tl::instrument::detail::append_double(truth_buf, t_s);
            truth_buf += ',';
            tl::instrument::detail::append_double(truth_buf, dl);
            truth_buf += ',';
            tl::instrument::detail::append_double(truth_buf, at);
            truth_buf += '\n';
            if (truth_buf.size() > (1u << 16)) {
                truth_os << truth_buf;
                truth_buf.clear();
            }
            ++rows;
        },
        policy_of(cfg));
    writer.flush();
    truth_os << truth_buf;
    finish_write(rec_os, rec_path);
    finish_write(truth_os, truth_path);

    if (cfg.artifacts.ambient_temperature) {
        const auto temp = tl::instrument::make_ambient_temperature(cfg.recording, cfg.artifacts);
        const fs::path temp_path = fs::path(cfg.out_dir) / "temperature.csv";
        auto temp_os = open_out(temp_path);
        std::string buf = "# step_s=";
        tl::instrument::detail::append_double(buf, cfg.artifacts.temperature_step_s);
        buf += "\n# schema=1\nt_s,celsius\n";
        for (const auto& p : temp) {
            tl::instrument::detail::append_double(buf, p.t_s);
            buf += ',';
            tl::instrument::detail::append_double(buf, p.celsius);
            buf += '\n';
        }
        temp_os << buf;
        finish_write(temp_os, temp_path);
    }

    std::printf("wrote %" PRId64 " samples to %s (truth sidecar %s)\n", rows, rec_path.c_str(),
                truth_path.c_str());
    return kExitOk;
}

std::optional<tl::analysis::DecimatedSeries> load_temperature_binned(const std::string& path,
                                                                     double window_s) {
    if (path.empty()) return std::nullopt;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw tl::IoError("cannot open " + path);
    tl::analysis::StreamingBinner binner(window_s, 0.0);
    std::string line;
    std::size_t line_no = 0;
    bool saw_columns = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_columns) {
            if (line != "t_s,celsius")
                throw tl::ParseError("temperature line " + std::to_string(line_no) +
                                     ": bad column header");
            saw_columns = true;
            continue;
        }
        std::size_t pos = 0;
        const double t_s = tl::instrument::detail::parse_double_field(line, pos, line_no, ',');
        const double c = tl::instrument::detail::parse_double_field(line, pos, line_no, '\n');
        binner.add(t_s, c);
    }
    if (!saw_columns) throw tl::ParseError("temperature file has no samples");
    return binner.finish();
}

int run_analyze(const tl::cli::RunConfig& cfg, const std::string& recording_path,
                const std::string& temperature_path) {
    const auto route = load_route(cfg);
    const auto model = tl::cli::make_tide_model(cfg);
    const auto series = tl::tide::route_tide_series(route, model, policy_of(cfg));

    std::ifstream is(recording_path, std::ios::binary);
    if (!is) throw tl::IoError("cannot open " + recording_path);

    const double window_s = cfg.analysis.window_s;
    tl::analysis::StreamingBinner mpd_binner(window_s, 0.0);
    tl::analysis::StreamingBinner at_binner(window_s, 0.0);
    bool window_checked = false;
    const auto header = tl::instrument::read_recording_csv_stream(
        is, [&](const tl::instrument::RecordingHeader& h, double t_s, double mpd, double, double) {
            if (!window_checked) {
                if (!(window_s > 2.0 / h.config.sample_rate_hz))
                    throw tl::WindowTooSmall(
                        "averaging window must cover more than two sample intervals");
                window_checked = true;
            }
            mpd_binner.add(t_s, mpd);
            at_binner.add(t_s, series.eval(h.config.start_utc_s + t_s));
        });
    const auto mpd = mpd_binner.finish();
    const auto at = at_binner.finish();
    const auto temperature = load_temperature_binned(temperature_path, window_s);

    // the phase-to-length conversions must use the probe the recording ran with
    tl::elastic::ProbeSpec probe = cfg.probe;
    probe.rf_freq_hz = header.rf_freq_hz;

    const auto report = tl::analysis::analyze_binned(mpd, at, probe, route.total_length_m,
                                                     temperature, cfg.analysis);

    ensure_out_dir(cfg.out_dir);
    echo_config(cfg);

    {
        const fs::path p = fs::path(cfg.out_dir) / "report.json";
        auto os = open_out(p);
        auto j = tl::analysis::report_to_json(report);
        j["recording"] = recording_path;
        j["rows"] = header.rows;
        j["sample_rate_hz"] = header.config.sample_rate_hz;
        j["cable_length_m"] = route.total_length_m;
        j["route"] = route.name;
        os << j.dump(2) << "\n";
        finish_write(os, p);
    }

    auto write_series = [&](const char* name, const tl::analysis::DecimatedSeries& s,
                            const char* columns) {
        const fs::path p = fs::path(cfg.out_dir) / name;
        auto os = open_out(p);
        std::string buf = "# window_s=";
        tl::instrument::detail::append_double(buf, s.bin_width_s);
        buf += "\n# schema=1\n";
        buf += columns;
        buf += '\n';
        for (std::size_t k = 0; k < s.size(); ++k) {
            tl::instrument::detail::append_double(buf, s.t_s[k]);
            buf += ',';
            tl::instrument::detail::append_double(buf, s.value[k]);
            buf += '\n';
            if (buf.size() > (1u << 16)) {
                os << buf;
                buf.clear();
            }
        }
        os << buf;
        finish_write(os, p);
    };
    write_series("binned_mpd.csv", mpd, "t_s,mpd_deg");
    write_series("at_binned.csv", at, "t_s,at_m");

    const auto detrended = tl::analysis::linear_detrend(mpd).second;
    write_series("detrended_mpd.csv", detrended, "t_s,mpd_deg");

    try {
        const auto curve = tl::analysis::periodogram_curve(detrended, cfg.analysis.period_min_s,
                                                           cfg.analysis.period_max_s,
                                                           cfg.analysis.period_grid);
        const fs::path p = fs::path(cfg.out_dir) / "periodogram.csv";
        auto os = open_out(p);
        std::string buf = "# schema=1\nperiod_s,amplitude_deg\n";
        for (const auto& pk : curve) {
            tl::instrument::detail::append_double(buf, pk.period_s);
            buf += ',';
            tl::instrument::detail::append_double(buf, pk.amplitude);
            buf += '\n';
        }
        os << buf;
        finish_write(os, p);
    } catch (const tl::SpanTooShort&) {
        if (cfg.analysis.strict_periods) throw;
        // short series: the report already carries the note
    }

    const double top_period_h =
        report.dominant_periods.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : report.dominant_periods.front().period_s / 3600.0;
    std::printf("r=%.4f tilt=%.4e strain/s top_period=%.4f h (report in %s)\n", report.pearson_r,
                report.trend.implied_strain_rate_per_s, top_period_h, cfg.out_dir.c_str());
    return kExitOk;
}

struct Check {
    const char* label;
    double value;
    double expect;
    double tol;
};

int run_reproduce(const Values& v, bool custom_given) {
    const tl::elastic::PressureModel pressure{};
    const tl::elastic::ProbeSpec probe{};
    const double length_m = 10.4e6;
    const double head_m = 0.085;

    tl::elastic::TubeSpec steel = tl::elastic::steel_tube();
    const tl::elastic::TubeSpec hdpe = tl::elastic::hdpe_tube();
    if (v.perturb) steel.young_modulus_pa *= 1.35;  // failure-path hook for CI

    const double dp_pa = tl::elastic::hydrostatic_pressure_delta(pressure, head_m);
    const double steel_cm = tl::elastic::poisson_length_change(steel, dp_pa, length_m) * 100.0;
    const double hdpe_cm = tl::elastic::poisson_length_change(hdpe, dp_pa, length_m) * 100.0;
    const double phase_ref_deg = tl::elastic::phase_from_path_change(probe, 0.045);

    std::printf("reference scenario: %.3f m tide head on a %.1f km cable\n", head_m,
                length_m / 1000.0);
    print_material_table_header();
    print_material_row("steel", steel, dp_pa, length_m, probe);
    print_material_row("hdpe", hdpe, dp_pa, length_m, probe);
    if (custom_given) {
        tl::elastic::TubeSpec custom{v.tube_e_pa, v.tube_nu, v.tube_ro_m, v.tube_ri_m,
                                     v.tube_coupling};
        custom.validate();
        print_material_row("custom", custom, dp_pa, length_m, probe);
        std::printf("  (custom material printed for comparison only; no reference value)\n");
    }

    const Check checks[] = {
        {"steel length change [cm]", steel_cm, 4.5, 0.1},
        {"hdpe length change [cm]", hdpe_cm, 1375.0, 13.75},
        {"pressure delta for 0.085 m [Pa]", dp_pa, 830.0, 0.5},
        {"phase for 4.5 cm one-way [deg]", phase_ref_deg, 3.24, 0.05},
    };
    bool all_ok = true;
    for (const auto& c : checks) {
        const bool ok = std::abs(c.value - c.expect) <= c.tol;
        all_ok = all_ok && ok;
        std::printf("%-34s %12.4f  expect %g +/- %g  %s\n", c.label, c.value, c.expect, c.tol,
                    ok ? "PASS" : "FAIL");
    }

    std::printf("predicted phase swing %.2f deg vs 3.4 deg from the field recording; "
                "the %.1f deg gap is the published residual (reported, not asserted)\n",
                phase_ref_deg, 3.4 - phase_ref_deg);
    std::printf("note: the length change applies to the one-way cable length; the probe "
                "tone crosses the cable twice and the phase conversion accounts for it\n");
    return all_ok ? kExitOk : kExitTolerance;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tide-driven length and phase variation toolkit for subsea cables"};
    app.require_subcommand(1);

    Values v;
    CLI::App* predict = app.add_subcommand("predict", "model curves and steady-state table");
    CLI::App* simulate = app.add_subcommand("simulate", "synthesize a phase-meter recording");
    CLI::App* analyze = app.add_subcommand("analyze", "detrend, average, and correlate a recording");
    CLI::App* reproduce = app.add_subcommand("reproduce", "check the bundled reference numbers");

    const Flags predict_flags = add_common_flags(predict, v);
    const Flags simulate_flags = add_common_flags(simulate, v);
    const Flags analyze_flags = add_common_flags(analyze, v);
    analyze->add_option("recording", v.recording_path, "recording CSV to analyze")->required();
    analyze->add_option("--temperature", v.temperature_path, "ambient temperature CSV");

    reproduce->add_option("--material", v.material, "steel|hdpe|custom")
        ->check(CLI::IsMember({"steel", "hdpe", "custom"}));
    CLI::Option* tube_e = reproduce->add_option("--tube-e-pa", v.tube_e_pa, "custom Young modulus");
    reproduce->add_option("--tube-nu", v.tube_nu, "custom Poisson ratio");
    reproduce->add_option("--tube-ro-m", v.tube_ro_m, "custom outer radius");
    reproduce->add_option("--tube-ri-m", v.tube_ri_m, "custom inner radius");
    reproduce->add_option("--tube-coupling", v.tube_coupling, "custom coupling factor");
    reproduce->add_flag("--perturb-presets", v.perturb, "")->group("");  // hidden failure hook

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (predict->parsed()) return run_predict(make_config(v, predict_flags));
        if (simulate->parsed()) return run_simulate(make_config(v, simulate_flags));
        if (analyze->parsed())
            return run_analyze(make_config(v, analyze_flags), v.recording_path,
                               v.temperature_path);
        if (reproduce->parsed()) {
            const bool custom_given = v.material == "custom" || static_cast<bool>(*tube_e);
            return run_reproduce(v, custom_given);
        }
    } catch (const tl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitModel;
    }
    return kExitConfig;  // unreachable with require_subcommand(1)
}
