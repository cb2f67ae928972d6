#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tidelink/elastic.hpp"
#include "tidelink/errors.hpp"
#include "tidelink/instrument.hpp"
#include "tidelink/tide.hpp"

namespace tidelink::analysis {

/// Regularly binned series. Bins can be missing (gaps in t_s); present bins
/// carry the number of source samples they were averaged from.
struct DecimatedSeries {
    std::vector<double> t_s;     // bin centers
    std::vector<double> value;
    std::vector<std::int64_t> source_count;
    double bin_width_s = 0.0;

    std::size_t size() const { return t_s.size(); }
    double span_s() const { return t_s.empty() ? 0.0 : t_s.back() - t_s.front(); }
};

/// Accumulates time-ordered samples into fixed-width bins anchored at a given
/// origin. A trailing bin shorter than half the nominal fill is dropped, so a
/// recording that does not end on a bin boundary does not produce a noisier
/// final point.
class StreamingBinner {
public:
    StreamingBinner(double window_s, double origin_t_s)
        : window_s_(window_s), origin_(origin_t_s) {
        if (!(window_s > 0.0))
            throw WindowTooSmall("averaging window must be positive");
    }

    void add(double t_s, double v, std::int64_t weight = 1) {
        if (!(t_s >= last_t_))
            throw ConfigError("binner requires time-ordered input");
        last_t_ = t_s;
        const auto k = static_cast<std::int64_t>(std::floor((t_s - origin_) / window_s_));
        if (open_ && k != open_k_) emit();
        if (!open_) {
            open_ = true;
            open_k_ = k;
            open_sum_ = 0.0;
            open_weight_ = 0;
        }
        open_sum_ += v * static_cast<double>(weight);
        open_weight_ += weight;
    }

    DecimatedSeries finish() {
        if (open_) emit();
        if (out_.t_s.empty())
            throw EmptySeries("no samples to average");
        std::int64_t nominal = 0;
        for (const auto c : out_.source_count) nominal = std::max(nominal, c);
        if (out_.size() > 1 && out_.source_count.back() * 2 < nominal) {
            out_.t_s.pop_back();
            out_.value.pop_back();
            out_.source_count.pop_back();
        }
        out_.bin_width_s = window_s_;
        return std::move(out_);
    }

private:
    void emit() {
        out_.t_s.push_back(origin_ + (static_cast<double>(open_k_) + 0.5) * window_s_);
        out_.value.push_back(open_sum_ / static_cast<double>(open_weight_));
        out_.source_count.push_back(open_weight_);
        open_ = false;
    }

    double window_s_;
    double origin_;
    double last_t_ = -std::numeric_limits<double>::infinity();
    bool open_ = false;
    std::int64_t open_k_ = 0;
    double open_sum_ = 0.0;
    std::int64_t open_weight_ = 0;
    DecimatedSeries out_;
};

inline DecimatedSeries block_average(const instrument::RecordingSeries& rec, double window_s) {
    if (rec.records.empty())
        throw EmptySeries("recording is empty");
    if (!(window_s > 2.0 / rec.config.sample_rate_hz))
        throw WindowTooSmall("averaging window must cover more than two sample intervals");
    StreamingBinner binner(window_s, 0.0);
    for (const auto& r : rec.records) binner.add(r.t_s, r.mpd_deg);
    return binner.finish();
}

/// Re-bins an already decimated series; bins are weighted by their source
/// counts. A window equal to the current bin width is the identity.
inline DecimatedSeries block_average(const DecimatedSeries& in, double window_s) {
    if (in.t_s.empty())
        throw EmptySeries("series is empty");
    if (window_s < in.bin_width_s)
        throw WindowTooSmall("averaging window is below the current bin width");
    StreamingBinner binner(window_s, in.t_s.front() - 0.5 * in.bin_width_s);
    for (std::size_t k = 0; k < in.size(); ++k)
        binner.add(in.t_s[k], in.value[k], in.source_count[k]);
    return binner.finish();
}

struct TrendFit {
    double slope_deg_per_s = 0.0;
    double intercept_deg = 0.0;  // value of the fit at t_s = 0
    double residual_rms_deg = 0.0;
    double implied_strain_rate_per_s = std::numeric_limits<double>::quiet_NaN();
};

/// Ordinary least squares line fit; returns the fit and the residual series.
inline std::pair<TrendFit, DecimatedSeries> linear_detrend(const DecimatedSeries& in) {
    const std::size_t n = in.size();
    if (n < 3)
        throw TooFewPoints("linear detrend needs at least 3 bins");
    double t_mean = 0.0, v_mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        t_mean += in.t_s[k];
        v_mean += in.value[k];
    }
    t_mean /= static_cast<double>(n);
    v_mean /= static_cast<double>(n);
    double stt = 0.0, stv = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dt = in.t_s[k] - t_mean;
        stt += dt * dt;
        stv += dt * (in.value[k] - v_mean);
    }
    if (!(stt > 0.0))
        throw DegenerateTime("all bins share one timestamp");
    TrendFit fit;
    fit.slope_deg_per_s = stv / stt;
    fit.intercept_deg = v_mean - fit.slope_deg_per_s * t_mean;
    DecimatedSeries resid = in;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        resid.value[k] = in.value[k] - (fit.intercept_deg + fit.slope_deg_per_s * in.t_s[k]);
        ss += resid.value[k] * resid.value[k];
    }
    fit.residual_rms_deg = std::sqrt(ss / static_cast<double>(n));
    return {fit, std::move(resid)};
}

/// One-way cable length change behind a measured phase, in meters.
inline double phase_to_length(double phase_deg, const elastic::ProbeSpec& probe) {
    return elastic::path_change_from_phase(probe, phase_deg);
}

/// Converts a phase trend into the cable strain rate that would produce it.
inline double implied_strain_rate(double slope_deg_per_s, const elastic::ProbeSpec& probe,
                                  double cable_length_m) {
    if (!(cable_length_m > 0.0))
        throw NonPositiveLength("cable length must be positive");
    return phase_to_length(slope_deg_per_s, probe) / cable_length_m;
}

namespace detail {

inline bool same_grid(const DecimatedSeries& a, const DecimatedSeries& b) {
    if (a.size() != b.size()) return false;
    const double tol = 1e-6 * a.bin_width_s;
    if (std::abs(a.bin_width_s - b.bin_width_s) > tol) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (std::abs(a.t_s[k] - b.t_s[k]) > tol) return false;
    return true;
}

/// Linear interpolation of (t, v) at time t; t outside the span returns NaN.
inline double interp_linear(const std::vector<double>& t, const std::vector<double>& v, double at) {
    if (t.empty() || at < t.front() || at > t.back())
        return std::numeric_limits<double>::quiet_NaN();
    const auto it = std::lower_bound(t.begin(), t.end(), at);
    const auto hi = static_cast<std::size_t>(it - t.begin());
    if (hi == 0) return v.front();
    const std::size_t lo = hi - 1;
    if (t[hi] == t[lo]) return v[lo];
    const double f = (at - t[lo]) / (t[hi] - t[lo]);
    return v[lo] + f * (v[hi] - v[lo]);
}

} // namespace detail

/// Pearson correlation of two binned series. Series on different grids are
/// compared by resampling b onto a's bin centers (linear interpolation,
/// overlap only).
inline double pearson_correlation(const DecimatedSeries& a, const DecimatedSeries& b) {
    std::vector<double> x, y;
    if (detail::same_grid(a, b)) {
        x = a.value;
        y = b.value;
    } else {
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double bv = detail::interp_linear(b.t_s, b.value, a.t_s[k]);
            if (!std::isnan(bv)) {
                x.push_back(a.value[k]);
                y.push_back(bv);
            }
        }
    }
    if (x.size() < 3)
        throw GridMismatch("fewer than 3 overlapping bins to correlate");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx;
        const double dy = y[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // a constant input leaves only summation roundoff in its moments, which
    // lands near n * (n * eps * |mean|)^2; variance at that scale is zero
    const double eps = std::numeric_limits<double>::epsilon();
    const double ex = n * eps * std::abs(mx);
    const double ey = n * eps * std::abs(my);
    if (!(sxx > n * ex * ex) || !(syy > n * ey * ey))
        throw ZeroVariance("a series with zero variance has no correlation");
    // (sxy/sxx) * sqrt(sxx/syy) rather than sxy/sqrt(sxx*syy): identical
    // inputs give exactly 1.0, a negated copy exactly -1.0.
    return (sxy / sxx) * std::sqrt(sxx / syy);
}

struct PeriodPeak {
    double period_s = 0.0;
    double amplitude = 0.0;
};

namespace detail {

/// Least-squares fit of a*cos(w t) + b*sin(w t) + c; returns hypot(a, b).
/// Works on irregular or gapped time grids, unlike an FFT periodogram.
inline double sinusoid_amplitude(const std::vector<double>& t, const std::vector<double>& v,
                                 double t_mean, double period_s) {
    const double w = 2.0 * std::numbers::pi / period_s;
    double scc = 0.0, sss = 0.0, scs = 0.0, sc = 0.0, ss = 0.0;
    double syc = 0.0, sys = 0.0, sy = 0.0;
    const auto n = static_cast<double>(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double ph = w * (t[k] - t_mean);
        const double c = std::cos(ph);
        const double s = std::sin(ph);
        scc += c * c;
        sss += s * s;
        scs += c * s;
        sc += c;
        ss += s;
        syc += v[k] * c;
        sys += v[k] * s;
        sy += v[k];
    }
    // Solve the 3x3 normal equations [scc scs sc; scs sss ss; sc ss n] via
    // elimination of the intercept first.
    const double a11 = scc - sc * sc / n;
    const double a12 = scs - sc * ss / n;
    const double a22 = sss - ss * ss / n;
    const double b1 = syc - sc * sy / n;
    const double b2 = sys - ss * sy / n;
    const double det = a11 * a22 - a12 * a12;
    if (!(std::abs(det) > 1e-12 * std::max(1.0, std::abs(a11 * a22))))
        return 0.0;  // degenerate sampling for this period
    const double pa = (b1 * a22 - b2 * a12) / det;
    const double pb = (a11 * b2 - a12 * b1) / det;
    return std::hypot(pa, pb);
}

} // namespace detail

/// Least-squares single-tone amplitude over a log-spaced period grid.
/// The fit tolerates gaps and uneven spacing, so masked series work too.
inline std::vector<PeriodPeak> periodogram_curve(const DecimatedSeries& series, double period_min_s,
                                                 double period_max_s, int grid_points = 1536) {
    if (series.size() < 8)
        throw TooFewPoints("periodogram needs at least 8 bins");
    if (!(period_min_s > 0.0) || !(period_max_s > period_min_s))
        throw ConfigError("need 0 < period_min < period_max");
    if (series.span_s() < 2.0 * period_max_s)
        throw SpanTooShort("series spans less than two cycles of the longest requested period");
    if (grid_points < 8)
        throw ConfigError("periodogram grid too coarse");

    double t_mean = 0.0;
    for (const double t : series.t_s) t_mean += t;
    t_mean /= static_cast<double>(series.size());

    const double log_lo = std::log(period_min_s);
    const double log_hi = std::log(period_max_s);
    std::vector<PeriodPeak> curve(static_cast<std::size_t>(grid_points));
    for (int j = 0; j < grid_points; ++j) {
        const double p =
            std::exp(log_lo + (log_hi - log_lo) * j / static_cast<double>(grid_points - 1));
        curve[static_cast<std::size_t>(j)] = {
            p, detail::sinusoid_amplitude(series.t_s, series.value, t_mean, p)};
    }
    return curve;
}

/// Scans a log-spaced period grid with a least-squares single-tone fit and
/// returns the local maxima of the amplitude curve, strongest first. Peak
/// periods are refined by a parabola through the three neighboring grid
/// amplitudes in log-period. Resolution is limited by the grid density and
/// by the series length.
inline std::vector<PeriodPeak> dominant_periods(const DecimatedSeries& series, double period_min_s,
                                                double period_max_s, int grid_points = 1536) {
    const std::vector<PeriodPeak> curve =
        periodogram_curve(series, period_min_s, period_max_s, grid_points);

    double t_mean = 0.0, v_mean = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        t_mean += series.t_s[k];
        v_mean += series.value[k];
    }
    t_mean /= static_cast<double>(series.size());
    v_mean /= static_cast<double>(series.size());
    double var = 0.0;
    for (const double v : series.value) var += (v - v_mean) * (v - v_mean);
    if (!(var > 0.0))
        return {};  // constant series has no periodic content

    const double log_lo = std::log(period_min_s);
    const double log_hi = std::log(period_max_s);
    std::vector<double> amp(static_cast<std::size_t>(grid_points));
    auto period_at = [&](double idx) {
        return std::exp(log_lo + (log_hi - log_lo) * idx / static_cast<double>(grid_points - 1));
    };
    for (int j = 0; j < grid_points; ++j)
        amp[static_cast<std::size_t>(j)] = curve[static_cast<std::size_t>(j)].amplitude;

    std::vector<PeriodPeak> peaks;
    for (int j = 1; j + 1 < grid_points; ++j) {
        const double a0 = amp[static_cast<std::size_t>(j - 1)];
        const double a1 = amp[static_cast<std::size_t>(j)];
        const double a2 = amp[static_cast<std::size_t>(j + 1)];
        if (!(a1 > a0 && a1 >= a2)) continue;
        double idx = static_cast<double>(j);
        const double denom = a0 - 2.0 * a1 + a2;
        if (denom < 0.0) {
            const double shift = 0.5 * (a0 - a2) / denom;
            if (std::abs(shift) <= 1.0) idx += shift;
        }
        const double p = period_at(idx);
        peaks.push_back({p, detail::sinusoid_amplitude(series.t_s, series.value, t_mean, p)});
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const PeriodPeak& a, const PeriodPeak& b) { return a.amplitude > b.amplitude; });
    return peaks;
}

/// Drops bins whose absolute time (series time + t_offset) falls in
/// [t_lo, t_hi). Used to mask known degenerate stretches before a period scan.
inline DecimatedSeries exclude_interval(const DecimatedSeries& in, double t_offset, double t_lo,
                                        double t_hi) {
    DecimatedSeries out;
    out.bin_width_s = in.bin_width_s;
    for (std::size_t k = 0; k < in.size(); ++k) {
        const double t_abs = in.t_s[k] + t_offset;
        if (t_abs >= t_lo && t_abs < t_hi) continue;
        out.t_s.push_back(in.t_s[k]);
        out.value.push_back(in.value[k]);
        out.source_count.push_back(in.source_count[k]);
    }
    return out;
}

struct SeriesPeak {
    double t_s = 0.0;
    double value = 0.0;
};

/// Sliding-window amplitude envelope: sqrt(2) times the RMS of the series
/// over a centered window, sampled every stride_s. For a slowly modulated
/// sinusoid this tracks the instantaneous amplitude.
inline DecimatedSeries amplitude_envelope(const DecimatedSeries& in, double window_s, double stride_s) {
    if (in.size() < 2)
        throw TooFewPoints("envelope needs at least 2 bins");
    if (!(window_s > 0.0) || !(stride_s > 0.0))
        throw WindowTooSmall("envelope window and stride must be positive");
    if (in.span_s() < window_s)
        throw SpanTooShort("series shorter than the envelope window");
    DecimatedSeries out;
    out.bin_width_s = stride_s;
    std::size_t lo = 0, hi = 0;
    for (double tc = in.t_s.front() + 0.5 * window_s; tc <= in.t_s.back() - 0.5 * window_s + 1e-9;
         tc += stride_s) {
        while (lo < in.size() && in.t_s[lo] < tc - 0.5 * window_s) ++lo;
        if (hi < lo) hi = lo;
        while (hi < in.size() && in.t_s[hi] <= tc + 0.5 * window_s) ++hi;
        const std::size_t count = hi - lo;
        if (count < 2) continue;
        double ss = 0.0;
        for (std::size_t k = lo; k < hi; ++k) ss += in.value[k] * in.value[k];
        out.t_s.push_back(tc);
        out.value.push_back(std::sqrt(2.0 * ss / static_cast<double>(count)));
        out.source_count.push_back(static_cast<std::int64_t>(count));
    }
    if (out.t_s.empty())
        throw EmptySeries("envelope produced no points");
    return out;
}

/// Strict local maxima with a prominence filter, refined by a parabolic fit,
/// strongest first. Prominence is measured against the lowest saddle on the
/// way to higher ground on each side (series edges count as higher ground).
inline std::vector<SeriesPeak> find_peaks(const DecimatedSeries& in, double min_prominence) {
    std::vector<SeriesPeak> out;
    const auto n = in.size();
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double v = in.value[j];
        if (!(v > in.value[j - 1] && v > in.value[j + 1])) continue;
        double valley_l = v;
        for (std::size_t k = j; k-- > 0;) {
            valley_l = std::min(valley_l, in.value[k]);
            if (in.value[k] > v) break;
        }
        double valley_r = v;
        for (std::size_t k = j + 1; k < n; ++k) {
            valley_r = std::min(valley_r, in.value[k]);
            if (in.value[k] > v) break;
        }
        const double prominence = v - std::max(valley_l, valley_r);
        if (prominence < min_prominence) continue;
        double t = in.t_s[j];
        const double denom = in.value[j - 1] - 2.0 * v + in.value[j + 1];
        if (denom < 0.0) {
            const double shift = 0.5 * (in.value[j - 1] - in.value[j + 1]) / denom;
            if (std::abs(shift) <= 1.0)
                t += shift * (in.t_s[j + 1] - in.t_s[j - 1]) * 0.5;
        }
        out.push_back({t, v});
    }
    std::sort(out.begin(), out.end(),
              [](const SeriesPeak& a, const SeriesPeak& b) { return a.value > b.value; });
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end analysis of a recording against a predicted aggregated tide.

struct AnalysisOptions {
    double window_s = 600.0;
    double period_min_s = 6.0 * 3600.0;
    double period_max_s = 16.0 * 3600.0;
    int period_grid = 1536;
    double semidiurnal_band_lo_s = 10.0 * 3600.0;
    double semidiurnal_band_hi_s = 14.0 * 3600.0;
    int max_reported_periods = 5;
    // With an explicitly requested period range a short series is an error;
    // with defaults it only degrades to a report note.
    bool strict_periods = false;
};

struct AnalysisReport {
    double window_s = 0.0;
    std::size_t bins = 0;
    TrendFit trend;
    double pearson_r = std::numeric_limits<double>::quiet_NaN();
    std::vector<PeriodPeak> dominant_periods;
    double semidiurnal_amplitude_deg = 0.0;
    double temperature_r = std::numeric_limits<double>::quiet_NaN();
    std::string notes;
};

/// Core analysis on pre-binned series; all series share the recording's
/// relative time base.
inline AnalysisReport analyze_binned(const DecimatedSeries& mpd, const DecimatedSeries& predicted_at,
                                     const elastic::ProbeSpec& probe, double cable_length_m,
                                     const std::optional<DecimatedSeries>& temperature,
                                     const AnalysisOptions& opt = {}) {
    AnalysisReport report;
    report.window_s = mpd.bin_width_s;
    report.bins = mpd.size();
    auto [fit, resid] = linear_detrend(mpd);
    fit.implied_strain_rate_per_s = implied_strain_rate(fit.slope_deg_per_s, probe, cable_length_m);
    report.trend = fit;

    try {
        report.pearson_r = pearson_correlation(resid, predicted_at);
    } catch (const ZeroVariance&) {
        report.notes += "predicted tide or residual has zero variance, correlation undefined; ";
    }

    try {
        report.dominant_periods = dominant_periods(resid, opt.period_min_s, opt.period_max_s,
                                                   opt.period_grid);
        if (report.dominant_periods.size() > static_cast<std::size_t>(opt.max_reported_periods))
            report.dominant_periods.resize(static_cast<std::size_t>(opt.max_reported_periods));
        for (const auto& p : report.dominant_periods) {
            if (p.period_s >= opt.semidiurnal_band_lo_s && p.period_s <= opt.semidiurnal_band_hi_s) {
                report.semidiurnal_amplitude_deg = p.amplitude;
                break;
            }
        }
        if (report.semidiurnal_amplitude_deg == 0.0)
            report.notes += "no spectral peak in the semidiurnal band; ";
    } catch (const SpanTooShort&) {
        if (opt.strict_periods) throw;
        report.notes += "series too short for the requested period scan; ";
    }

    if (temperature) {
        try {
            report.temperature_r = pearson_correlation(resid, *temperature);
        } catch (const Error&) {
            report.notes += "temperature channel not correlatable; ";
        }
    }
    return report;
}

/// Convenience wrapper: bins the raw recording, evaluates the predicted
/// aggregated tide at every sample instant, and averages it onto the same bin
/// grid before correlating.
inline AnalysisReport analyze(const instrument::RecordingSeries& rec,
                              const tide::RouteTideSeries& predicted,
                              const elastic::ProbeSpec& probe, double cable_length_m,
                              const AnalysisOptions& opt = {}) {
    const DecimatedSeries mpd = block_average(rec, opt.window_s);
    StreamingBinner at_binner(opt.window_s, 0.0);
    for (const auto& r : rec.records)
        at_binner.add(r.t_s, predicted.eval(rec.config.start_utc_s + r.t_s));
    const DecimatedSeries at = at_binner.finish();

    std::optional<DecimatedSeries> temp;
    if (!rec.temperature.empty()) {
        StreamingBinner temp_binner(opt.window_s, 0.0);
        for (const auto& p : rec.temperature) temp_binner.add(p.t_s, p.celsius);
        temp = temp_binner.finish();
    }
    return analyze_binned(mpd, at, probe, cable_length_m, temp, opt);
}

inline nlohmann::json report_to_json(const AnalysisReport& r) {
    auto num_or_null = [](double v) {
        return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
    };
    nlohmann::json j;
    j["window_s"] = r.window_s;
    j["bins"] = r.bins;
    j["trend"] = {{"slope_deg_per_s", r.trend.slope_deg_per_s},
                  {"intercept_deg", r.trend.intercept_deg},
                  {"residual_rms_deg", r.trend.residual_rms_deg},
                  {"implied_strain_rate_per_s", num_or_null(r.trend.implied_strain_rate_per_s)}};
    j["pearson_r"] = num_or_null(r.pearson_r);
    j["dominant_periods"] = nlohmann::json::array();
    for (const auto& p : r.dominant_periods)
        j["dominant_periods"].push_back({{"period_s", p.period_s}, {"amplitude_deg", p.amplitude}});
    j["semidiurnal_amplitude_deg"] = r.semidiurnal_amplitude_deg;
    j["temperature_r"] = num_or_null(r.temperature_r);
    j["notes"] = r.notes;
    return j;
}

} // namespace tidelink::analysis
