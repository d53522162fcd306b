#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "railnoise/beam.hpp"
#include "railnoise/errors.hpp"
#include "railnoise/noise_spectrum.hpp"
#include "railnoise/suspension.hpp"

namespace railnoise {

// ---------------------------------------------------------------------------
// Interferometer geometry
// ---------------------------------------------------------------------------

struct InterferometerSpec {
    double grating_wavevector = 0.0;       ///< k_G [rad/m]
    double inter_grating_distance = 0.0;   ///< L_12 [m]; gratings at -L_12, 0, +L_12
    double atom_velocity = 0.0;            ///< u [m/s]
    int diffraction_order = 1;             ///< p >= 1
    std::optional<double> optical_grating_wavevector;  ///< for the optical readout [rad/m]

    void validate(const RailSpec& rail) const {
        if (!(grating_wavevector > 0.0))
            throw validation_error("interferometer.grating_wavevector must be positive");
        if (!(inter_grating_distance > 0.0))
            throw validation_error("interferometer.inter_grating_distance must be positive");
        if (inter_grating_distance > rail.half_length * (1.0 + 1e-12))
            throw validation_error(
                "interferometer.inter_grating_distance exceeds the rail half length");
        if (!(atom_velocity > 0.0))
            throw validation_error("interferometer.atom_velocity must be positive");
        if (diffraction_order < 1)
            throw validation_error("interferometer.diffraction_order must be >= 1");
        if (optical_grating_wavevector && !(*optical_grating_wavevector > 0.0))
            throw validation_error("interferometer.optical_grating_wavevector must be positive");
    }

    /// Atom time of flight between neighbouring gratings [s].
    double time_of_flight() const { return inter_grating_distance / atom_velocity; }
};

// ---------------------------------------------------------------------------
// Phase transfer: Phi(omega) = p k_G [2 X(0) - X(-L12) e^{+i w T} - X(+L12) e^{-i w T}]
// decomposed operationally into
//   bending       = value at T = 0,
//   sagnac        = part odd in T,
//   acceleration  = remaining even-in-T part.
// ---------------------------------------------------------------------------

struct PhaseParts {
    complexd total{};
    complexd bending{};
    complexd sagnac{};
    complexd acceleration{};
};

struct PhaseTransfer {
    double nu = 0.0;       ///< [Hz]
    PhaseParts minus_end;  ///< response to unit motion of the minus support
    PhaseParts plus_end;   ///< response to unit motion of the plus support
};

namespace detail {

inline PhaseParts delayed_sum_parts(complexd x0, complexd xm, complexd xp, double prefactor,
                                    double omega, double time_of_flight) {
    const double wt = omega * time_of_flight;
    const complexd sum = xm + xp;
    const complexd diff = xp - xm;
    PhaseParts parts;
    parts.bending = prefactor * (2.0 * x0 - sum);
    parts.sagnac = prefactor * complexd(0.0, 1.0) * diff * std::sin(wt);
    parts.acceleration = prefactor * sum * (1.0 - std::cos(wt));
    parts.total = parts.bending + parts.sagnac + parts.acceleration;
    return parts;
}

inline PhaseParts parts_from_solution(const ResponseAmplitudes& amps,
                                      const InterferometerSpec& interf, double omega,
                                      double sample_distance) {
    const complexd x0 = shape(amps, 0.0);
    const complexd xm = shape(amps, -sample_distance);
    const complexd xp = shape(amps, +sample_distance);
    const double pref = interf.diffraction_order * interf.grating_wavevector;
    return delayed_sum_parts(x0, xm, xp, pref, omega, interf.time_of_flight());
}

}  // namespace detail

/// Exact delayed-sum phase for given complex support motions.
inline PhaseParts phase_response(const RailSpec& rail, const SuspensionSpec& suspension,
                                 const InterferometerSpec& interf, double omega,
                                 complexd x_minus, complexd x_plus) {
    interf.validate(rail);
    const ResponseAmplitudes amps = solve_amplitudes(rail, suspension, omega, x_minus, x_plus);
    return detail::parts_from_solution(amps, interf, omega, interf.inter_grating_distance);
}

/// Per-end unit-motion transfers (rad per meter of support motion, at the
/// configured diffraction order).
inline PhaseTransfer phase_transfer_exact(const RailSpec& rail, const SuspensionSpec& suspension,
                                          const InterferometerSpec& interf, double omega) {
    PhaseTransfer t;
    t.nu = omega / two_pi;
    t.minus_end = phase_response(rail, suspension, interf, omega, 1.0, 0.0);
    t.plus_end = phase_response(rail, suspension, interf, omega, 0.0, 1.0);
    return t;
}

/// Low-frequency closed form (identical ends, kappa L < 0.3, omega T < 0.3):
///   Phi/(p k_G) = (x+ - x-) 3 i (w T)/(3 - R)
///               + (x+ + x-) [0.330 (w T0)^2 + (w T)^2] / (2 (1 - R))
/// The inter-grating distance is replaced by the half length, which is what
/// makes the formula this compact.
inline complexd phase_transfer_lowfreq(const RailSpec& rail, const SuspensionSpec& suspension,
                                       const InterferometerSpec& interf, double omega,
                                       complexd x_minus, complexd x_plus) {
    interf.validate(rail);
    suspension.validate();
    if (!suspension.symmetric())
        throw unsupported_configuration("phase_transfer_lowfreq: requires identical ends");
    const double y = dispersion_kappa(rail, omega) * rail.half_length;
    if (!(y < 0.5))
        throw unsupported_configuration("phase_transfer_lowfreq: kappa L must be < 0.5");
    const double wt = omega * interf.time_of_flight();
    if (!(wt < 0.5))
        throw unsupported_configuration("phase_transfer_lowfreq: omega T must be < 0.5");

    const complexd r = ratio_R(suspension.minus_end, rail.default_mass(), omega);
    const double wt0 = omega * two_pi / find_bending_modes(rail, 0).omega0;
    const double pk = interf.diffraction_order * interf.grating_wavevector;
    const complexd sagnac = (x_plus - x_minus) * complexd(0.0, 3.0) * wt / (3.0 - r);
    const complexd common = (x_plus + x_minus) * (0.330 * wt0 * wt0 + wt * wt) / (2.0 * (1.0 - r));
    return pk * (sagnac + common);
}

// ---------------------------------------------------------------------------
// Frequency grid: logarithmic lattice anchored at 1 Hz so that grids over
// adjoining bands share their interior points, densified around known
// resonances so Q-amplified peaks are resolved by the trapezoid rule.
// ---------------------------------------------------------------------------

struct Band {
    double nu_min = 2.0;
    double nu_max = 1000.0;
};

struct GridSpec {
    /// ~2000 points across the default 2-1000 Hz band.
    int points_per_decade = 741;
    int resonance_densify = 10;       ///< extra density factor near resonances
    double densify_halfwidths = 5.0;  ///< window half-size in resonance half-widths
    bool allow_low_band = false;      ///< permit nu_min below the 2 Hz guard
};

struct ResonanceWindow {
    double nu = 0.0;
    double half_width = 0.0;  ///< nu / (2 Q)
};

namespace detail {

inline std::vector<double> lattice_points(double lo, double hi, int per_decade) {
    std::vector<double> pts;
    const double step = 1.0 / per_decade;
    const long k0 = static_cast<long>(std::ceil(std::log10(lo) / step - 1e-9));
    const long k1 = static_cast<long>(std::floor(std::log10(hi) / step + 1e-9));
    pts.reserve(static_cast<std::size_t>(std::max(0L, k1 - k0 + 1)));
    for (long k = k0; k <= k1; ++k) pts.push_back(std::pow(10.0, k * step));
    return pts;
}

}  // namespace detail

/// Pendular and first two bending resonances of the configuration, with the
/// half-widths implied by the suspension damping. Throws when a resonance
/// falls inside the band while the suspension is undamped.
inline std::vector<ResonanceWindow> resonance_windows(const RailSpec& rail,
                                                      const SuspensionSpec& suspension,
                                                      Band band) {
    std::vector<ResonanceWindow> windows;
    std::vector<std::pair<double, double>> res;  // (nu, Q)

    // Resonance locations of the solve itself use the strict mass.
    const double mass = rail.default_mass();
    const double mu = 0.5 * (suspension.minus_end.damping + suspension.plus_end.damping);
    if (suspension.symmetric() && suspension.minus_end.stiffness > 0.0) {
        const double w_osc = std::sqrt(suspension.minus_end.stiffness / mass);
        const double w_rot = w_osc * std::sqrt(3.0);
        const double q_osc =
            mu > 0.0 ? mass * w_osc / mu : std::numeric_limits<double>::infinity();
        res.push_back({w_osc / two_pi, q_osc});
        res.push_back({w_rot / two_pi, q_osc / std::sqrt(3.0)});
    }
    const ModalSolution modal = find_bending_modes(rail, 1);
    for (const auto& m : modal.modes) {
        const double q = (mu > 0.0)
                             ? bending_mode_q(mass, m.omega, m.kappa * rail.half_length,
                                              m.parity, mu)
                             : std::numeric_limits<double>::infinity();
        res.push_back({m.omega / two_pi, q});
    }

    for (const auto& [nu, q] : res) {
        if (nu < band.nu_min || nu > band.nu_max) continue;
        if (!std::isfinite(q))
            throw resonance_error(
                "undamped resonance at " + std::to_string(nu) +
                    " Hz inside the integration band; supply a damping coefficient",
                nu * two_pi);
        windows.push_back({nu, nu / (2.0 * q)});
    }
    return windows;
}

inline std::vector<double> frequency_grid(Band band, const GridSpec& grid,
                                          const std::vector<ResonanceWindow>& windows) {
    if (!(band.nu_min > 0.0) || !(band.nu_max > band.nu_min))
        throw validation_error("frequency grid: band must satisfy 0 < nu_min < nu_max");
    if (!grid.allow_low_band && band.nu_min < 2.0 * (1.0 - 1e-12))
        throw validation_error(
            "band extends below 2 Hz where end motions are correlated and the "
            "uncorrelated-ends assumption fails; set allow_low_band to override");

    std::vector<double> pts = detail::lattice_points(band.nu_min, band.nu_max,
                                                     grid.points_per_decade);
    for (const auto& w : windows) {
        const double lo = std::max(band.nu_min, w.nu - grid.densify_halfwidths * w.half_width);
        const double hi = std::min(band.nu_max, w.nu + grid.densify_halfwidths * w.half_width);
        if (!(hi > lo)) continue;
        auto extra = detail::lattice_points(lo, hi,
                                            grid.points_per_decade * grid.resonance_densify);
        pts.insert(pts.end(), extra.begin(), extra.end());
    }
    pts.push_back(band.nu_min);
    pts.push_back(band.nu_max);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double u, double v) { return std::abs(u - v) <= 1e-12 * u; }),
              pts.end());
    // clamp to the band (lattice rounding can land epsilon outside)
    while (!pts.empty() && pts.front() < band.nu_min) pts.erase(pts.begin());
    while (!pts.empty() && pts.back() > band.nu_max) pts.pop_back();
    if (pts.empty() || pts.front() != band.nu_min) pts.insert(pts.begin(), band.nu_min);
    if (pts.back() != band.nu_max) pts.push_back(band.nu_max);
    return pts;
}

// ---------------------------------------------------------------------------
// Noise propagation. The two support motions share no phase relation, so the
// cross term is dropped and per-end powers add:
//   |Phi(nu)/p|^2 = |H-(nu)/p|^2 S-(nu) + |H+(nu)/p|^2 S+(nu).
// ---------------------------------------------------------------------------

struct PhaseNoiseSample {
    double nu = 0.0;           ///< [Hz]
    double phi2_total = 0.0;   ///< [rad^2/Hz] per p^2
    double phi2_sagnac = 0.0;  ///< [rad^2/Hz] per p^2
};

struct PhaseNoiseResult {
    std::vector<PhaseNoiseSample> spectrum;
    Band band;
    double mean_square_total = 0.0;   ///< <Phi^2>/p^2 [rad^2]
    double mean_square_sagnac = 0.0;  ///< Sagnac part alone [rad^2]
    double mean_square_bending_displacement = 0.0;  ///< <delta^2> [m^2]
};

namespace detail {

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return acc;
}

}  // namespace detail

inline PhaseNoiseResult phase_noise_spectrum_on_grid(
    const RailSpec& rail, const SuspensionSpec& suspension, const InterferometerSpec& interf,
    const NoiseSpectrum& noise_minus, const NoiseSpectrum& noise_plus,
    const std::vector<double>& grid_nu) {
    interf.validate(rail);
    noise_minus.validate();
    noise_plus.validate();
    if (grid_nu.size() < 2) throw validation_error("phase_noise_spectrum: empty grid");
    const Band band{grid_nu.front(), grid_nu.back()};
    if (band.nu_min < noise_minus.nu_min() * (1.0 - 1e-12) ||
        band.nu_max > noise_minus.nu_max() * (1.0 + 1e-12) ||
        band.nu_min < noise_plus.nu_min() * (1.0 - 1e-12) ||
        band.nu_max > noise_plus.nu_max() * (1.0 + 1e-12))
        throw validation_error("phase_noise_spectrum: band not covered by the noise spectra");

    const double p = interf.diffraction_order;
    const double pk = p * interf.grating_wavevector;

    PhaseNoiseResult out;
    out.band = band;
    out.spectrum.reserve(grid_nu.size());
    std::vector<double> tot(grid_nu.size()), sag(grid_nu.size()), del(grid_nu.size());
    for (std::size_t i = 0; i < grid_nu.size(); ++i) {
        const double nu = grid_nu[i];
        const double omega = two_pi * nu;
        const PhaseTransfer h = phase_transfer_exact(rail, suspension, interf, omega);
        const double sm = sample_psd(noise_minus, nu);
        const double sp = sample_psd(noise_plus, nu);
        const double t = (std::norm(h.minus_end.total) * sm + std::norm(h.plus_end.total) * sp) /
                         (p * p);
        const double s = (std::norm(h.minus_end.sagnac) * sm +
                          std::norm(h.plus_end.sagnac) * sp) /
                         (p * p);
        const double d = (std::norm(h.minus_end.bending) * sm +
                          std::norm(h.plus_end.bending) * sp) /
                         (pk * pk);
        tot[i] = t;
        sag[i] = s;
        del[i] = d;
        out.spectrum.push_back({nu, t, s});
    }
    std::vector<double> nus = grid_nu;
    out.mean_square_total = detail::trapezoid(nus, tot);
    out.mean_square_sagnac = detail::trapezoid(nus, sag);
    out.mean_square_bending_displacement = detail::trapezoid(nus, del);
    return out;
}

inline PhaseNoiseResult phase_noise_spectrum(const RailSpec& rail,
                                             const SuspensionSpec& suspension,
                                             const InterferometerSpec& interf,
                                             const NoiseSpectrum& noise_minus,
                                             const NoiseSpectrum& noise_plus, Band band,
                                             const GridSpec& grid = GridSpec{}) {
    const auto windows = resonance_windows(rail, suspension, band);
    const auto nus = frequency_grid(band, grid, windows);
    return phase_noise_spectrum_on_grid(rail, suspension, interf, noise_minus, noise_plus, nus);
}

/// RMS of the grating-alignment defect delta = 2 x2 - x1 - x3 [m], from the
/// zero-time-of-flight (bending) transfer alone.
inline double rms_bending(const RailSpec& rail, const SuspensionSpec& suspension,
                          const InterferometerSpec& interf, const NoiseSpectrum& noise_minus,
                          const NoiseSpectrum& noise_plus, Band band,
                          const GridSpec& grid = GridSpec{}) {
    const auto r =
        phase_noise_spectrum(rail, suspension, interf, noise_minus, noise_plus, band, grid);
    return std::sqrt(r.mean_square_bending_displacement);
}

/// Phase of the optical three-grating readout for a bending delta [m].
inline double optical_phase(double delta, int order, double k_g_opt) {
    return order * k_g_opt * delta;
}

// ---------------------------------------------------------------------------
// Fringe visibility vs diffraction order:  V(p) = V_max exp(-<Phi_1^2> p^2 / 2)
// ---------------------------------------------------------------------------

struct VisibilityModel {
    double v_max = 1.0;    ///< in (0, 1]
    double phi1_sq = 0.0;  ///< <Phi_1^2> [rad^2]
    std::optional<double> v_max_sigma;
    std::optional<double> phi1_sq_sigma;

    void validate() const {
        if (!(v_max > 0.0) || v_max > 1.0 + 1e-12)
            throw validation_error("visibility v_max must lie in (0, 1]");
        if (phi1_sq < 0.0) throw validation_error("visibility phi1_sq must be >= 0");
    }
};

inline double visibility(const VisibilityModel& model, int p) {
    model.validate();
    if (p < 0) throw validation_error("visibility: order must be >= 0");
    return model.v_max * std::exp(-model.phi1_sq * p * p / 2.0);
}

struct VisibilityPoint {
    int order = 0;
    double visibility = 0.0;
    std::optional<double> sigma;  ///< one-sigma uncertainty of the visibility
};

/// Weighted least squares of ln v against p^2, exact for the model class.
/// Weights are sigma_lnv = sigma_v / v when uncertainties are supplied and
/// uniform otherwise. Parameter uncertainties come from the regression
/// covariance; with supplied sigmas the covariance is used as-is, with
/// uniform weights it is scaled by the residual variance.
inline VisibilityModel fit_visibility(const std::vector<VisibilityPoint>& data) {
    if (data.size() < 2) throw validation_error("fit_visibility: need at least 2 points");
    bool have_sigma = true;
    double first_q = -1.0;
    bool degenerate = true;
    for (const auto& d : data) {
        if (d.order < 0) throw validation_error("fit_visibility: negative order");
        if (!(d.visibility > 0.0) || d.visibility > 1.0 + 1e-12)
            throw validation_error("fit_visibility: visibilities must lie in (0, 1]");
        if (d.sigma && !(*d.sigma > 0.0))
            throw validation_error("fit_visibility: sigma must be positive");
        if (!d.sigma) have_sigma = false;
        const double q = static_cast<double>(d.order) * d.order;
        if (first_q < 0.0)
            first_q = q;
        else if (q != first_q)
            degenerate = false;
    }
    if (degenerate)
        throw validation_error("fit_visibility: all points share one order; fit is degenerate");

    // normal equations for y = c0 + c1 q, q = p^2
    double sw = 0.0, sq = 0.0, sqq = 0.0, sy = 0.0, sqy = 0.0;
    for (const auto& d : data) {
        const double q = static_cast<double>(d.order) * d.order;
        const double y = std::log(d.visibility);
        const double sig = have_sigma ? (*d.sigma / d.visibility) : 1.0;
        const double w = 1.0 / (sig * sig);
        sw += w;
        sq += w * q;
        sqq += w * q * q;
        sy += w * y;
        sqy += w * q * y;
    }
    const double det = sw * sqq - sq * sq;
    if (!(std::abs(det) > 0.0)) throw validation_error("fit_visibility: singular design");
    const double c0 = (sqq * sy - sq * sqy) / det;
    const double c1 = (sw * sqy - sq * sy) / det;

    double var0 = sqq / det;
    double var1 = sw / det;
    if (!have_sigma) {
        double ssr = 0.0;
        for (const auto& d : data) {
            const double q = static_cast<double>(d.order) * d.order;
            const double r = std::log(d.visibility) - (c0 + c1 * q);
            ssr += r * r;
        }
        const double dof = static_cast<double>(data.size()) - 2.0;
        const double s2 = dof > 0.0 ? ssr / dof : 0.0;
        var0 *= s2;
        var1 *= s2;
    }

    VisibilityModel m;
    m.v_max = std::exp(c0);
    m.phi1_sq = -2.0 * c1;
    if (m.phi1_sq < 0.0 && m.phi1_sq > -1e-12) m.phi1_sq = 0.0;
    m.v_max_sigma = m.v_max * std::sqrt(std::max(0.0, var0));
    m.phi1_sq_sigma = 2.0 * std::sqrt(std::max(0.0, var1));
    m.validate();
    return m;
}

}  // namespace railnoise
