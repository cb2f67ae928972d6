#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "tidelink/elastic.hpp"
#include "tidelink/errors.hpp"
#include "tidelink/geo.hpp"
#include "tidelink/rng.hpp"
#include "tidelink/tide.hpp"
#include "tidelink/timeutil.hpp"

namespace tidelink::instrument {

inline constexpr std::int64_t kMaxSamples = std::int64_t{1} << 31;

struct RecordingConfig {
    double start_utc_s = 1582869989.0;  // 2020-02-28T06:06:29Z
    double duration_s = 12.0 * 86400.0;
    double sample_rate_hz = 30.0;
    std::uint64_t seed = 1;

    std::int64_t sample_count() const {
        const double n = std::floor(duration_s * sample_rate_hz);
        if (!(n >= 1.0))
            throw ConfigError("recording must contain at least one sample");
        if (n > static_cast<double>(kMaxSamples))
            throw OverflowSamples("recording of " + std::to_string(n) + " samples exceeds the supported size");
        return static_cast<std::int64_t>(n);
    }

    void validate() const {
        if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0))
            throw ConfigError("recording duration and sample rate must be positive");
        (void)sample_count();
    }
};

/// Phase-meter imperfections layered onto the physical signal. Sigmas of zero
/// disable the corresponding process. The temperature channel is an exogenous
/// side recording (it does not enter the MPD) used to check analysis against
/// spurious correlations.
struct ArtifactModel {
    double tilt_strain_per_s = -8e-14;      // slow monotone drift of effective length
    double ecl_sigma_hz = 26.0e6;           // laser center-frequency wander, per block
    double ecl_block_s = 60.0;
    double synth_phase_sigma_deg = 0.01;    // synthesizer phase jitter, per sample
    double white_phase_sigma_deg = 0.05;    // receiver white phase noise, per sample
    bool ambient_temperature = false;
    double temperature_mean_c = 21.0;
    double temperature_sigma_c = 0.8;
    double temperature_tau_s = 10800.0;
    double temperature_step_s = 60.0;

    void validate() const {
        if (ecl_sigma_hz < 0.0 || synth_phase_sigma_deg < 0.0 || white_phase_sigma_deg < 0.0)
            throw ConfigError("noise sigmas must be non-negative");
        if (!(ecl_block_s > 0.0))
            throw ConfigError("laser drift block length must be positive");
        if (ambient_temperature && (!(temperature_tau_s > 0.0) || !(temperature_step_s > 0.0)
                                    || temperature_sigma_c < 0.0))
            throw ConfigError("bad ambient temperature parameters");
    }
};

// Noise stream identifiers; part of the reproducibility contract.
inline constexpr std::uint64_t kStreamEcl = 1;
inline constexpr std::uint64_t kStreamSynth = 2;
inline constexpr std::uint64_t kStreamWhite = 3;
inline constexpr std::uint64_t kStreamTemperature = 4;

struct PhaseRecord {
    double t_s = 0.0;      // seconds since recording start
    double mpd_deg = 0.0;  // measured phase delta of the RF tone
};

struct TemperaturePoint {
    double t_s = 0.0;
    double celsius = 0.0;
};

struct RecordingSeries {
    RecordingConfig config;
    elastic::ProbeSpec probe;
    std::vector<PhaseRecord> records;
    std::vector<double> truth_dl_m;  // per-record deterministic one-way length change
    std::vector<double> truth_at_m;  // per-record aggregated tide
    std::vector<TemperaturePoint> temperature;

    bool has_truth() const { return !truth_dl_m.empty(); }
};

/// Ornstein-Uhlenbeck ambient temperature track at a fixed cadence.
inline std::vector<TemperaturePoint> make_ambient_temperature(const RecordingConfig& rc,
                                                              const ArtifactModel& am) {
    std::vector<TemperaturePoint> out;
    if (!am.ambient_temperature) return out;
    const double dt = am.temperature_step_s;
    const auto n = static_cast<std::int64_t>(std::floor(rc.duration_s / dt)) + 1;
    out.reserve(static_cast<std::size_t>(n));
    const double alpha = std::exp(-dt / am.temperature_tau_s);
    const double kick = am.temperature_sigma_c * std::sqrt(1.0 - alpha * alpha);
    double x = am.temperature_sigma_c * rng::gaussian(rc.seed, kStreamTemperature, 0);
    for (std::int64_t k = 0; k < n; ++k) {
        out.push_back({static_cast<double>(k) * dt, am.temperature_mean_c + x});
        x = alpha * x + kick * rng::gaussian(rc.seed, kStreamTemperature, static_cast<std::uint64_t>(k) + 1);
    }
    return out;
}

/// Synthesizes the measured phase delta sample by sample and hands each row to
/// the sink as sink(i, t_s, mpd_deg, dl_one_way_m, at_m). Streaming keeps peak
/// memory independent of the recording length.
///
/// The physical part uses the closed-form aggregated-tide series, so the cost
/// per sample does not grow with the number of route segments. Noise terms
/// are summed separately and added to the physical phase once; with every
/// sigma at zero the output is bit-identical to the noise-free signal, and a
/// noise-only run (flat tide, no tilt) is bit-identical to the difference.
template <class Sink>
void synthesize_mpd(const geo::CableRoute& route, const tide::TideModel& model,
                    const elastic::TubeSpec& tube, const elastic::PressureModel& pm,
                    const elastic::ProbeSpec& probe, const RecordingConfig& rc,
                    const ArtifactModel& am, Sink&& sink,
                    tide::MissingCellPolicy policy = tide::MissingCellPolicy::Error) {
    tube.validate();
    pm.validate();
    probe.validate();
    rc.validate();
    am.validate();
    const std::int64_t n = rc.sample_count();
    const tide::RouteTideSeries at_series = tide::route_tide_series(route, model, policy);
    const double strain_per_m_head = elastic::poisson_unit_strain(tube, pm.rho_g_pa_per_m);
    const double length_m = route.total_length_m;
    const double round_trip_m = 2.0 * length_m;

    for (std::int64_t i = 0; i < n; ++i) {
        const double t_s = static_cast<double>(i) / rc.sample_rate_hz;
        const double t_abs = rc.start_utc_s + t_s;
        const double at = at_series.eval(t_abs);
        const double dl = strain_per_m_head * at * length_m + am.tilt_strain_per_s * t_s * length_m;
        const double phys = elastic::phase_from_path_change(probe, dl);

        double noise = 0.0;
        if (am.ecl_sigma_hz > 0.0) {
            const auto block = static_cast<std::uint64_t>(t_s / am.ecl_block_s);
            const double d_nu = am.ecl_sigma_hz * rng::gaussian(rc.seed, kStreamEcl, block);
            noise += elastic::phase_from_delay(probe,
                         elastic::cd_delay_from_wavelength_drift(probe, d_nu, round_trip_m));
        }
        if (am.synth_phase_sigma_deg > 0.0)
            noise += am.synth_phase_sigma_deg * rng::gaussian(rc.seed, kStreamSynth, static_cast<std::uint64_t>(i));
        if (am.white_phase_sigma_deg > 0.0)
            noise += am.white_phase_sigma_deg * rng::gaussian(rc.seed, kStreamWhite, static_cast<std::uint64_t>(i));

        sink(i, t_s, phys + noise, dl, at);
    }
}

inline RecordingSeries synthesize_mpd_series(const geo::CableRoute& route, const tide::TideModel& model,
                                             const elastic::TubeSpec& tube, const elastic::PressureModel& pm,
                                             const elastic::ProbeSpec& probe, const RecordingConfig& rc,
                                             const ArtifactModel& am, bool with_truth = false,
                                             tide::MissingCellPolicy policy = tide::MissingCellPolicy::Error) {
    RecordingSeries series;
    series.config = rc;
    series.probe = probe;
    const std::int64_t n = rc.sample_count();
    series.records.reserve(static_cast<std::size_t>(n));
    if (with_truth) {
        series.truth_dl_m.reserve(static_cast<std::size_t>(n));
        series.truth_at_m.reserve(static_cast<std::size_t>(n));
    }
    synthesize_mpd(route, model, tube, pm, probe, rc, am,
                   [&](std::int64_t, double t_s, double mpd, double dl, double at) {
                       series.records.push_back({t_s, mpd});
                       if (with_truth) {
                           series.truth_dl_m.push_back(dl);
                           series.truth_at_m.push_back(at);
                       }
                   },
                   policy);
    series.temperature = make_ambient_temperature(rc, am);
    return series;
}

// ---------------------------------------------------------------------------
// Recording interchange format: '#'-prefixed key=value header lines, a column
// header, then one row per sample. Numbers use shortest round-trip formatting,
// so write -> read -> write is byte-stable.

namespace detail {

inline void append_double(std::string& buf, double v) {
    char tmp[32];
    const auto res = std::to_chars(tmp, tmp + sizeof tmp, v);
    buf.append(tmp, res.ptr);
}

inline double parse_double_field(const std::string& line, std::size_t& pos, std::size_t line_no,
                                 char terminator) {
    const char* begin = line.data() + pos;
    const char* end = line.data() + line.size();
    double v = 0.0;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc())
        throw ParseError("recording line " + std::to_string(line_no) + ": bad number");
    pos = static_cast<std::size_t>(res.ptr - line.data());
    if (terminator == ',') {
        if (pos >= line.size() || line[pos] != ',')
            throw ParseError("recording line " + std::to_string(line_no) + ": missing field");
        ++pos;
    } else if (pos != line.size()) {
        throw ParseError("recording line " + std::to_string(line_no) + ": trailing characters");
    }
    return v;
}

} // namespace detail

/// Streams recording rows to CSV as they are produced.
class RecordingCsvWriter {
public:
    RecordingCsvWriter(std::ostream& os, const RecordingConfig& rc, const elastic::ProbeSpec& probe,
                       bool with_truth)
        : os_(os), with_truth_(with_truth) {
        const double start_whole = std::floor(rc.start_utc_s);
        if (start_whole != rc.start_utc_s)
            throw ConfigError("recording start must be a whole UTC second for CSV headers");
        std::string head;
        head += "# start_utc=" + timeutil::format_utc(static_cast<std::int64_t>(start_whole)) + "\n";
        head += "# sample_rate_hz=";
        detail::append_double(head, rc.sample_rate_hz);
        head += "\n# rf_freq_hz=";
        detail::append_double(head, probe.rf_freq_hz);
        head += "\n# seed=" + std::to_string(rc.seed) + "\n";
        head += "# schema=1\n";
        head += with_truth_ ? "t_s,mpd_deg,truth_dl_m,truth_at_m\n" : "t_s,mpd_deg\n";
        os_ << head;
        buf_.reserve(1 << 16);
    }

    void row(double t_s, double mpd_deg, double dl_m = 0.0, double at_m = 0.0) {
        detail::append_double(buf_, t_s);
        buf_ += ',';
        detail::append_double(buf_, mpd_deg);
        if (with_truth_) {
            buf_ += ',';
            detail::append_double(buf_, dl_m);
            buf_ += ',';
            detail::append_double(buf_, at_m);
        }
        buf_ += '\n';
        if (buf_.size() > (1u << 16) - 128) flush();
    }

    void flush() {
        os_ << buf_;
        buf_.clear();
    }

    ~RecordingCsvWriter() { flush(); }

private:
    std::ostream& os_;
    bool with_truth_;
    std::string buf_;
};

inline void write_recording_csv(std::ostream& os, const RecordingSeries& series) {
    RecordingCsvWriter w(os, series.config, series.probe, series.has_truth());
    for (std::size_t k = 0; k < series.records.size(); ++k)
        w.row(series.records[k].t_s, series.records[k].mpd_deg,
              series.has_truth() ? series.truth_dl_m[k] : 0.0,
              series.has_truth() ? series.truth_at_m[k] : 0.0);
    w.flush();
}

struct RecordingHeader {
    RecordingConfig config;  // duration_s derived from the row count
    double rf_freq_hz = 20.0e6;
    bool with_truth = false;
    std::size_t rows = 0;
};

/// Streaming CSV reader: parses headers, then hands each row to
/// fn(header, t_s, mpd_deg, truth_dl_m, truth_at_m) without materializing the
/// series. The header argument is complete by the first row because all
/// '#' lines precede the data. Truth columns are 0.0 when absent. Errors
/// carry the offending line number.
template <class RowFn>
RecordingHeader read_recording_csv_stream(std::istream& is, RowFn&& fn) {
    RecordingHeader header;
    std::string line;
    std::size_t line_no = 0;
    bool saw_columns = false;
    bool saw_schema = false;

    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("recording line " + std::to_string(line_no) + ": bad header");
            std::size_t key_begin = 1;
            while (key_begin < eq && line[key_begin] == ' ') ++key_begin;
            const std::string key = line.substr(key_begin, eq - key_begin);
            const std::string value = line.substr(eq + 1);
            try {
                if (key == "start_utc")
                    header.config.start_utc_s = static_cast<double>(timeutil::parse_utc(value));
                else if (key == "sample_rate_hz")
                    header.config.sample_rate_hz = std::stod(value);
                else if (key == "rf_freq_hz")
                    header.rf_freq_hz = std::stod(value);
                else if (key == "seed")
                    header.config.seed = std::stoull(value);
                else if (key == "schema") {
                    if (value != "1")
                        throw ParseError("recording line " + std::to_string(line_no)
                                         + ": unsupported schema " + value);
                    saw_schema = true;
                }
                // unknown header keys pass through for forward compatibility
            } catch (const std::logic_error&) {
                throw ParseError("recording line " + std::to_string(line_no) + ": bad header value");
            }
            continue;
        }
        if (!saw_columns) {
            if (line == "t_s,mpd_deg")
                header.with_truth = false;
            else if (line == "t_s,mpd_deg,truth_dl_m,truth_at_m")
                header.with_truth = true;
            else
                throw ParseError("recording line " + std::to_string(line_no) + ": bad column header");
            saw_columns = true;
            continue;
        }
        std::size_t pos = 0;
        const double t_s = detail::parse_double_field(line, pos, line_no, ',');
        const double mpd = detail::parse_double_field(line, pos, line_no, header.with_truth ? ',' : '\n');
        double dl = 0.0, at = 0.0;
        if (header.with_truth) {
            dl = detail::parse_double_field(line, pos, line_no, ',');
            at = detail::parse_double_field(line, pos, line_no, '\n');
        }
        ++header.rows;
        fn(static_cast<const RecordingHeader&>(header), t_s, mpd, dl, at);
    }
    if (!saw_schema)
        throw ParseError("recording is missing the schema header");
    if (!saw_columns || header.rows == 0)
        throw ParseError("recording contains no samples");
    if (header.config.sample_rate_hz <= 0.0)
        throw ParseError("recording is missing a positive sample_rate_hz header");
    header.config.duration_s = static_cast<double>(header.rows) / header.config.sample_rate_hz;
    return header;
}

inline RecordingSeries read_recording_csv(std::istream& is) {
    RecordingSeries series;
    const RecordingHeader header =
        read_recording_csv_stream(
            is, [&](const RecordingHeader&, double t_s, double mpd, double dl, double at) {
                series.records.push_back({t_s, mpd});
                series.truth_dl_m.push_back(dl);
                series.truth_at_m.push_back(at);
            });
    series.config = header.config;
    series.probe.rf_freq_hz = header.rf_freq_hz;
    if (!header.with_truth) {
        series.truth_dl_m.clear();
        series.truth_at_m.clear();
    }
    return series;
}

} // namespace tidelink::instrument
