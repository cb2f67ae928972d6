#pragma once

#include <cmath>
#include <string>

#include "tidelink/errors.hpp"
#include "tidelink/geo.hpp"
#include "tidelink/tide.hpp"

namespace tidelink::elastic {

/// Thick-walled cylinder standing in for the cable's load-bearing layer.
/// coupling scales how much of the wall strain the fiber actually sees.
struct TubeSpec {
    double young_modulus_pa = 0.0;
    double poisson_ratio = 0.0;
    double r_outer_m = 0.0;
    double r_inner_m = 0.0;
    double coupling = 1.0;

    void validate() const {
        if (!(young_modulus_pa > 0.0))
            throw ConfigError("Young's modulus must be positive");
        if (!(poisson_ratio > 0.0 && poisson_ratio <= 0.5))
            throw ConfigError("Poisson ratio must lie in (0, 0.5]");
        if (r_inner_m < 0.0 || !(r_outer_m > r_inner_m))
            throw ConfigError("need 0 <= r_inner < r_outer");
        if (!(coupling >= 0.0 && coupling <= 1.0))
            throw ConfigError("coupling must lie in [0, 1]");
    }
};

/// Armored repeater-cable values: steel strength member.
inline TubeSpec steel_tube() { return {200.0e9, 0.30, 4.0e-3, 2.6e-3, 1.0}; }

/// Unarmored insulation-dominated values: HDPE jacket.
inline TubeSpec hdpe_tube() { return {0.8e9, 0.45, 8.5e-3, 4.6e-3, 1.0}; }

/// Hydrostatic weight of the water column per meter of surface elevation.
struct PressureModel {
    double rho_g_pa_per_m = 9765.0;

    void validate() const {
        if (!(rho_g_pa_per_m > 0.0))
            throw ConfigError("rho*g must be positive");
    }
};

/// Hydrostatic pressure change for a sea-surface elevation change.
inline double hydrostatic_pressure_delta(const PressureModel& pm, double elevation_m) {
    return pm.rho_g_pa_per_m * elevation_m;
}

/// Axial strain of a thick-walled tube under an external pressure change dP
/// (Lame solution): eps = 2 nu / E * r_o^2 / (r_o^2 - r_i^2) * dP, scaled by
/// the fiber coupling factor. Radial squeeze extends the tube axially, so a
/// positive dP gives a positive strain.
inline double poisson_unit_strain(const TubeSpec& tube, double pressure_delta_pa) {
    tube.validate();
    const double ro2 = tube.r_outer_m * tube.r_outer_m;
    const double ri2 = tube.r_inner_m * tube.r_inner_m;
    return 2.0 * tube.poisson_ratio / tube.young_modulus_pa * ro2 / (ro2 - ri2)
         * pressure_delta_pa * tube.coupling;
}

/// Cable length change for a uniform pressure change over length L0.
inline double poisson_length_change(const TubeSpec& tube, double pressure_delta_pa, double length_m) {
    if (!(length_m > 0.0))
        throw NonPositiveLength("cable length must be positive");
    return poisson_unit_strain(tube, pressure_delta_pa) * length_m;
}

/// Phase-measurement probe: an RF tone amplitude-modulated onto the optical
/// carrier, observed after the round trip. rf_wavelength is the tone's
/// wavelength in the fiber (group velocity over tone frequency).
struct ProbeSpec {
    double rf_freq_hz = 20.0e6;
    double group_velocity_m_per_s = 2.0e8;
    double cd_ps_per_nm_km = 21.0;         // chromatic dispersion of the path
    double carrier_wavelength_nm = 1550.0;
    double strain_optic_factor = 1.0;      // optical vs geometric length change

    void validate() const {
        if (!(rf_freq_hz > 0.0) || !(group_velocity_m_per_s > 0.0))
            throw ConfigError("probe tone frequency and group velocity must be positive");
        if (!(carrier_wavelength_nm > 0.0))
            throw ConfigError("carrier wavelength must be positive");
        if (!(strain_optic_factor > 0.0))
            throw ConfigError("strain-optic factor must be positive");
        if (cd_ps_per_nm_km < 0.0)
            throw ConfigError("dispersion must be non-negative");
    }

    double rf_wavelength_m() const { return group_velocity_m_per_s / rf_freq_hz; }
};

/// Measured phase delta of the returned tone for a one-way cable length
/// change: the light travels the change twice.
inline double phase_from_path_change(const ProbeSpec& probe, double dl_one_way_m) {
    return 360.0 * (2.0 * dl_one_way_m * probe.strain_optic_factor) / probe.rf_wavelength_m();
}

/// Inverse of phase_from_path_change.
inline double path_change_from_phase(const ProbeSpec& probe, double phase_deg) {
    return phase_deg * probe.rf_wavelength_m() / (720.0 * probe.strain_optic_factor);
}

/// Group delay change caused by a laser frequency excursion d_nu through the
/// chromatic dispersion of path_m of fiber: the excursion maps to a carrier
/// wavelength shift d_lambda = lambda^2 d_nu / c, and tau = D * L * d_lambda.
/// Returns seconds.
inline double cd_delay_from_wavelength_drift(const ProbeSpec& probe, double d_nu_hz, double path_m) {
    if (!(path_m >= 0.0))
        throw NonPositiveLength("dispersion path must be non-negative");
    const double c_m_per_s = 299792458.0;
    const double lambda_m = probe.carrier_wavelength_nm * 1e-9;
    const double d_lambda_nm = lambda_m * lambda_m * d_nu_hz / c_m_per_s * 1e9;
    const double tau_ps = probe.cd_ps_per_nm_km * (path_m / 1000.0) * d_lambda_nm;
    return tau_ps * 1e-12;
}

/// Phase error of the RF tone caused by a group delay change.
inline double phase_from_delay(const ProbeSpec& probe, double delay_s) {
    return 360.0 * probe.rf_freq_hz * delay_s;
}

/// Length change of a sampled route under a tide model at time t: every
/// segment strains according to the local elevation, so dl is the
/// length-weighted strain sum. Exactly poisson_length_change applied to the
/// aggregated tide, by linearity.
inline double route_length_change(const geo::CableRoute& route, const tide::TideModel& model,
                                  const TubeSpec& tube, const PressureModel& pm, double t_utc_s,
                                  tide::MissingCellPolicy policy = tide::MissingCellPolicy::Error) {
    if (route.segments.empty())
        throw NonPositiveLength("route has no segments");
    tube.validate();
    double acc = 0.0;
    for (const auto& seg : route.segments) {
        const double eta = tide::elevation(model, seg.midpoint, t_utc_s, policy);
        acc += poisson_unit_strain(tube, hydrostatic_pressure_delta(pm, eta)) * seg.length_m;
    }
    return acc;
}

} // namespace tidelink::elastic
