#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tidelink/errors.hpp"
#include "tidelink/geo.hpp"
#include "tidelink/timeutil.hpp"

namespace tidelink::tide {

inline double wrap_deg_360(double d) {
    double r = std::fmod(d, 360.0);
    return r < 0.0 ? r + 360.0 : r;
}

/// Sine and cosine of an angle in degrees. Range reduction happens in degrees,
/// so multiples of 90 come out exact (cos 180 = -1, sin 180 = -0) and the
/// identity f(d + 180) = -f(d) holds bitwise for angles already in [0, 360).
/// That exactness is what lets mirrored-phase constituent pairs cancel to a
/// true 0.0 instead of a small residual.
inline void sincos_deg(double d, double& sn, double& cs) {
    double r = wrap_deg_360(d);
    double sign = 1.0;
    if (r >= 180.0) {
        r -= 180.0;  // exact: r and 180 are within a factor of 2
        sign = -1.0;
    }
    double c, s;
    if (r == 0.0) {
        c = 1.0; s = 0.0;
    } else if (r == 90.0) {
        c = 0.0; s = 1.0;
    } else if (r < 90.0) {
        c = std::cos(r * geo::kRadPerDeg);
        s = std::sin(r * geo::kRadPerDeg);
    } else {
        const double q = 180.0 - r;  // exact for the same reason
        c = -std::cos(q * geo::kRadPerDeg);
        s = std::sin(q * geo::kRadPerDeg);
    }
    cs = sign * c;
    sn = sign * s;
}

inline double cos_deg(double d) { double s, c; sincos_deg(d, s, c); return c; }
inline double sin_deg(double d) { double s, c; sincos_deg(d, s, c); return s; }

// ---------------------------------------------------------------------------
// Uniform field: one elevation everywhere. Mostly a test and calibration aid.

struct UniformField {
    double elevation_m = 0.0;
};

// ---------------------------------------------------------------------------
// Equilibrium two-bulge model. Elevation follows the sub-body/antipodal bulge
// pattern cos^2(lat) * cos(2 * (lon - bulge_lon(t))) for the lunar and solar
// contributions; each bulge circles the Earth once per full period (two
// semidiurnal cycles). Times are seconds since the Unix epoch; the bulge
// phases are defined at t = 0.

struct EquilibriumParams {
    double lunar_amplitude_m = 0.24;
    double solar_amplitude_m = 0.11;
    double lunar_semidiurnal_period_s = 44714.16;  // M2
    double solar_semidiurnal_period_s = 43200.0;   // S2
    double lunar_phase0_rad = 0.0;                 // bulge longitude at t = 0
    double solar_phase0_rad = 0.0;

    void validate() const {
        if (lunar_amplitude_m < 0.0 || solar_amplitude_m < 0.0)
            throw NegativeAmplitude("equilibrium amplitudes must be non-negative");
        if (!(lunar_semidiurnal_period_s > 0.0) || !(solar_semidiurnal_period_s > 0.0))
            throw ConfigError("equilibrium periods must be positive");
    }

    /// Spring-neap beat period 1 / (1/T_s - 1/T_m), about 14.77 days.
    double beat_period_s() const {
        return 1.0 / (1.0 / solar_semidiurnal_period_s - 1.0 / lunar_semidiurnal_period_s);
    }
};

inline double equilibrium_elevation(const EquilibriumParams& p, const geo::GeoPoint& at, double t_utc_s) {
    const double lat = at.lat_deg * geo::kRadPerDeg;
    const double lon = at.lon_deg * geo::kRadPerDeg;
    const double two_pi = 2.0 * std::numbers::pi;
    const double phi_m = p.lunar_phase0_rad + two_pi * t_utc_s / (2.0 * p.lunar_semidiurnal_period_s);
    const double phi_s = p.solar_phase0_rad + two_pi * t_utc_s / (2.0 * p.solar_semidiurnal_period_s);
    const double shape = std::cos(lat) * std::cos(lat);
    return shape * (p.lunar_amplitude_m * std::cos(2.0 * (lon - phi_m))
                  + p.solar_amplitude_m * std::cos(2.0 * (lon - phi_s)));
}

// ---------------------------------------------------------------------------
// Gridded harmonic constituents: regular lat/lon rasters of amplitude and
// Greenwich phase per constituent, bilinearly interpolated. A cell value of
// NaN marks land.

enum class MissingCellPolicy { Error, ZeroFill };

struct TideConstituent {
    std::string name;
    double speed_deg_per_hour = 0.0;
};

struct ConstituentGrid {
    double lat0_deg = 0.0;
    double lon0_deg = 0.0;
    double dlat_deg = 0.0;
    double dlon_deg = 0.0;
    int nlat = 0;
    int nlon = 0;
    double epoch_utc_s = 0.0;

    struct Layer {
        TideConstituent constituent;
        std::vector<double> amplitude_m;  // row-major [j * nlon + i], NaN = land
        std::vector<double> phase_deg;    // normalized to [0, 360)
        // cached in-phase/quadrature components: A*cos(g), A*sin(g)
        std::vector<double> comp_cos;
        std::vector<double> comp_sin;
    };
    std::vector<Layer> layers;

    std::size_t cell_count() const { return static_cast<std::size_t>(nlat) * static_cast<std::size_t>(nlon); }

    void validate() {
        if (nlat < 2 || nlon < 2)
            throw DimensionMismatch("grid must be at least 2x2");
        if (!(dlat_deg > 0.0) || !(dlon_deg > 0.0))
            throw DimensionMismatch("grid spacing must be positive");
        const double lat_top = lat0_deg + dlat_deg * (nlat - 1);
        if (lat0_deg < -90.0 || lat_top > 90.0)
            throw DimensionMismatch("grid latitude extent leaves [-90, 90]");
        if (dlon_deg * (nlon - 1) > 360.0)
            throw DimensionMismatch("grid longitude extent exceeds 360 degrees");
        for (auto& layer : layers) {
            if (layer.constituent.name.empty())
                throw ParseError("constituent without a name");
            if (!(layer.constituent.speed_deg_per_hour > 0.0))
                throw ParseError("constituent speed must be positive: " + layer.constituent.name);
            if (layer.amplitude_m.size() != cell_count() || layer.phase_deg.size() != cell_count())
                throw DimensionMismatch("raster size mismatch for " + layer.constituent.name);
            layer.comp_cos.resize(cell_count());
            layer.comp_sin.resize(cell_count());
            for (std::size_t k = 0; k < cell_count(); ++k) {
                const double a = layer.amplitude_m[k];
                double& g = layer.phase_deg[k];
                if (std::isnan(a) != std::isnan(g))
                    throw ParseError("cell with amplitude xor phase missing in " + layer.constituent.name);
                if (std::isnan(a)) {
                    layer.comp_cos[k] = layer.comp_sin[k] = std::numeric_limits<double>::quiet_NaN();
                    continue;
                }
                if (a < 0.0)
                    throw NegativeAmplitude("negative amplitude in " + layer.constituent.name);
                if (!std::isfinite(g))
                    throw ParseError("non-finite phase in " + layer.constituent.name);
                g = wrap_deg_360(g);
                double s, c;
                sincos_deg(g, s, c);
                layer.comp_cos[k] = a * c;
                layer.comp_sin[k] = a * s;
            }
        }
    }

    struct CellRef {
        std::size_t i00, i10, i01, i11;  // corner indices: (lon, lat), (lon+1, lat), ...
        double fx, fy;                   // local coordinates in [0, 1]
    };

    /// Locates the enclosing cell. Longitude is wrapped onto the grid origin,
    /// so grids spanning the antimeridian work with any input convention.
    CellRef locate(const geo::GeoPoint& at) const {
        const double fy_full = (at.lat_deg - lat0_deg) / dlat_deg;
        if (!(fy_full >= 0.0 && fy_full <= nlat - 1))
            throw OutOfGrid("latitude " + std::to_string(at.lat_deg) + " outside grid");
        const double fx_full = wrap_deg_360(at.lon_deg - lon0_deg) / dlon_deg;
        if (!(fx_full >= 0.0 && fx_full <= nlon - 1))
            throw OutOfGrid("longitude " + std::to_string(at.lon_deg) + " outside grid");
        int i = std::min(static_cast<int>(fx_full), nlon - 2);
        int j = std::min(static_cast<int>(fy_full), nlat - 2);
        CellRef c;
        c.fx = fx_full - i;
        c.fy = fy_full - j;
        const std::size_t row = static_cast<std::size_t>(j) * nlon;
        c.i00 = row + i;
        c.i10 = row + i + 1;
        c.i01 = row + nlon + i;
        c.i11 = row + nlon + i + 1;
        return c;
    }

    /// Bilinear interpolation written incrementally so that four equal corners
    /// reproduce the corner value bit for bit. NaN if any corner is missing.
    static double interp(const std::vector<double>& z, const CellRef& c) {
        const double z00 = z[c.i00], z10 = z[c.i10], z01 = z[c.i01], z11 = z[c.i11];
        return z00 + c.fx * (z10 - z00) + c.fy * (z01 - z00)
                   + c.fx * c.fy * (((z00 + z11) - z10) - z01);
    }
};

/// Time argument of a constituent in degrees.
inline double constituent_arg_deg(const TideConstituent& c, double t_utc_s, double epoch_utc_s) {
    return c.speed_deg_per_hour * ((t_utc_s - epoch_utc_s) / 3600.0);
}

inline double harmonic_elevation(const ConstituentGrid& grid, const geo::GeoPoint& at, double t_utc_s,
                                 MissingCellPolicy policy = MissingCellPolicy::Error) {
    const auto cell = grid.locate(at);
    double eta = 0.0;
    for (const auto& layer : grid.layers) {
        const double u = ConstituentGrid::interp(layer.comp_cos, cell);
        const double v = ConstituentGrid::interp(layer.comp_sin, cell);
        if (std::isnan(u) || std::isnan(v)) {
            if (policy == MissingCellPolicy::ZeroFill) return 0.0;
            throw MissingCell("point (" + std::to_string(at.lat_deg) + ", " + std::to_string(at.lon_deg)
                              + ") touches a land cell");
        }
        double s, c;
        sincos_deg(constituent_arg_deg(layer.constituent, t_utc_s, grid.epoch_utc_s), s, c);
        eta += u * c + v * s;
    }
    return eta;
}

/// Parses the constituent grid interchange format (JSON text). Raster rows run
/// south to north, columns west to east from (lat0, lon0); null cells are land.
inline ConstituentGrid load_constituent_grid(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("grid JSON: ") + e.what());
    }
    ConstituentGrid g;
    try {
        g.lat0_deg = j.at("lat0_deg").get<double>();
        g.lon0_deg = j.at("lon0_deg").get<double>();
        g.dlat_deg = j.at("dlat_deg").get<double>();
        g.dlon_deg = j.at("dlon_deg").get<double>();
        g.nlat = j.at("nlat").get<int>();
        g.nlon = j.at("nlon").get<int>();
        g.epoch_utc_s = static_cast<double>(timeutil::parse_utc(j.at("epoch_utc").get<std::string>()));
        for (const auto& cj : j.at("constituents")) {
            ConstituentGrid::Layer layer;
            layer.constituent.name = cj.at("name").get<std::string>();
            layer.constituent.speed_deg_per_hour = cj.at("speed_deg_per_hour").get<double>();
            auto read_raster = [&](const char* key, std::vector<double>& out) {
                const auto& rows = cj.at(key);
                if (!rows.is_array() || static_cast<int>(rows.size()) != g.nlat)
                    throw DimensionMismatch(std::string(key) + " must have nlat rows in " + layer.constituent.name);
                out.reserve(static_cast<std::size_t>(g.nlat) * g.nlon);
                for (const auto& row : rows) {
                    if (!row.is_array() || static_cast<int>(row.size()) != g.nlon)
                        throw DimensionMismatch(std::string(key) + " row must have nlon entries in "
                                                + layer.constituent.name);
                    for (const auto& cell : row)
                        out.push_back(cell.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                     : cell.get<double>());
                }
            };
            read_raster("amplitude_m", layer.amplitude_m);
            read_raster("phase_deg", layer.phase_deg);
            g.layers.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("grid JSON: ") + e.what());
    }
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Model variant and route aggregation.

using TideModel = std::variant<UniformField, EquilibriumParams, ConstituentGrid>;

inline double elevation(const TideModel& model, const geo::GeoPoint& at, double t_utc_s,
                        MissingCellPolicy policy = MissingCellPolicy::Error) {
    if (const auto* u = std::get_if<UniformField>(&model)) {
        (void)at;
        return u->elevation_m;
    }
    if (const auto* e = std::get_if<EquilibriumParams>(&model))
        return equilibrium_elevation(*e, at, t_utc_s);
    return harmonic_elevation(std::get<ConstituentGrid>(model), at, t_utc_s, policy);
}

/// Length-weighted mean elevation over the route's segment midpoints:
/// AT(t) = sum(eta_k * len_k) / L.
inline double aggregated_tide(const geo::CableRoute& route, const TideModel& model, double t_utc_s,
                              MissingCellPolicy policy = MissingCellPolicy::Error) {
    if (route.segments.empty())
        throw NonPositiveLength("route has no segments");
    double acc = 0.0;
    for (const auto& seg : route.segments)
        acc += elevation(model, seg.midpoint, t_utc_s, policy) * seg.length_m;
    return acc / route.total_length_m;
}

// ---------------------------------------------------------------------------
// Closed-form aggregated-tide series. Because AT is linear in the per-point
// elevations and every model term is sinusoidal in time with a space-dependent
// amplitude and phase, the route sum collapses to one cos/sin pair per
// constituent. Evaluation cost is then independent of the segment count,
// which is what makes multi-day synthesis at tens of samples per second cheap.

struct RouteTideSeries {
    struct Term {
        bool degree_mode = false;     // degree-argument constituents vs radian terms
        double rate = 0.0;            // deg/hour when degree_mode, else rad/s
        double t_ref_s = 0.0;
        double coef_cos = 0.0;
        double coef_sin = 0.0;
    };
    double mean_m = 0.0;
    std::vector<Term> terms;

    double eval(double t_utc_s) const {
        double acc = mean_m;
        for (const auto& term : terms) {
            double s, c;
            if (term.degree_mode) {
                sincos_deg(term.rate * ((t_utc_s - term.t_ref_s) / 3600.0), s, c);
            } else {
                const double a = term.rate * (t_utc_s - term.t_ref_s);
                s = std::sin(a);
                c = std::cos(a);
            }
            acc += term.coef_cos * c + term.coef_sin * s;
        }
        return acc;
    }
};

inline RouteTideSeries route_tide_series(const geo::CableRoute& route, const TideModel& model,
                                         MissingCellPolicy policy = MissingCellPolicy::Error) {
    if (route.segments.empty())
        throw NonPositiveLength("route has no segments");
    RouteTideSeries series;
    if (const auto* u = std::get_if<UniformField>(&model)) {
        series.mean_m = u->elevation_m;
        return series;
    }
    if (const auto* e = std::get_if<EquilibriumParams>(&model)) {
        // cos(2 lon - 2 phi(t)) = cos(2 lon - 2 phase0) cos(theta) + sin(...) sin(theta)
        // with theta = 2 pi t / T_semi.
        double cm = 0.0, sm = 0.0, cs = 0.0, ss = 0.0;
        for (const auto& seg : route.segments) {
            const double lat = seg.midpoint.lat_deg * geo::kRadPerDeg;
            const double lon = seg.midpoint.lon_deg * geo::kRadPerDeg;
            const double w = std::cos(lat) * std::cos(lat) * seg.length_m;
            cm += w * std::cos(2.0 * lon - 2.0 * e->lunar_phase0_rad);
            sm += w * std::sin(2.0 * lon - 2.0 * e->lunar_phase0_rad);
            cs += w * std::cos(2.0 * lon - 2.0 * e->solar_phase0_rad);
            ss += w * std::sin(2.0 * lon - 2.0 * e->solar_phase0_rad);
        }
        const double two_pi = 2.0 * std::numbers::pi;
        RouteTideSeries::Term lunar;
        lunar.rate = two_pi / e->lunar_semidiurnal_period_s;
        lunar.coef_cos = e->lunar_amplitude_m * cm / route.total_length_m;
        lunar.coef_sin = e->lunar_amplitude_m * sm / route.total_length_m;
        RouteTideSeries::Term solar;
        solar.rate = two_pi / e->solar_semidiurnal_period_s;
        solar.coef_cos = e->solar_amplitude_m * cs / route.total_length_m;
        solar.coef_sin = e->solar_amplitude_m * ss / route.total_length_m;
        series.terms = {lunar, solar};
        return series;
    }
    const auto& grid = std::get<ConstituentGrid>(model);
    // A midpoint touching a land cell in any layer is dropped from every
    // layer, matching the point-evaluation semantics of harmonic_elevation.
    std::vector<ConstituentGrid::CellRef> cells;
    std::vector<char> usable(route.segments.size(), 1);
    cells.reserve(route.segments.size());
    for (std::size_t k = 0; k < route.segments.size(); ++k) {
        cells.push_back(grid.locate(route.segments[k].midpoint));
        for (const auto& layer : grid.layers) {
            if (std::isnan(ConstituentGrid::interp(layer.comp_cos, cells[k]))) {
                if (policy != MissingCellPolicy::ZeroFill)
                    throw MissingCell("route midpoint touches a land cell in " + layer.constituent.name);
                usable[k] = 0;
                break;
            }
        }
    }
    for (const auto& layer : grid.layers) {
        RouteTideSeries::Term term;
        term.degree_mode = true;
        term.rate = layer.constituent.speed_deg_per_hour;
        term.t_ref_s = grid.epoch_utc_s;
        double uc = 0.0, vs = 0.0;
        for (std::size_t k = 0; k < route.segments.size(); ++k) {
            if (!usable[k]) continue;
            uc += ConstituentGrid::interp(layer.comp_cos, cells[k]) * route.segments[k].length_m;
            vs += ConstituentGrid::interp(layer.comp_sin, cells[k]) * route.segments[k].length_m;
        }
        term.coef_cos = uc / route.total_length_m;
        term.coef_sin = vs / route.total_length_m;
        series.terms.push_back(term);
    }
    return series;
}

} // namespace tidelink::tide
