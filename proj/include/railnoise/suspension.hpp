#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>

#include "railnoise/beam.hpp"
#include "railnoise/errors.hpp"

namespace railnoise {

using complexd = std::complex<double>;

// ---------------------------------------------------------------------------
// Suspension description
// ---------------------------------------------------------------------------

struct SuspensionEnd {
    double stiffness = 0.0;  ///< K [N/m]
    double damping = 0.0;    ///< mu [kg/s], effective

    void validate() const {
        if (stiffness < 0.0 || !std::isfinite(stiffness))
            throw validation_error("suspension stiffness must be >= 0 and finite");
        if (damping < 0.0 || !std::isfinite(damping))
            throw validation_error("suspension damping must be >= 0 and finite");
    }
};

struct SuspensionSpec {
    SuspensionEnd minus_end;
    SuspensionEnd plus_end;
    /// Mass parameter of the pendular bookkeeping formulas (frequencies and
    /// Q factors). Defaults to the strict rho*A*half_length; profiles may pin
    /// the full rail mass instead. The boundary solve itself has no mass
    /// freedom: its coefficients are fixed by the rail through the dispersion
    /// relation, equivalent to the strict reading.
    std::optional<double> mass_override;

    void validate() const {
        minus_end.validate();
        plus_end.validate();
        if (mass_override && !(*mass_override > 0.0))
            throw validation_error("suspension.mass_override must be positive");
    }

    double mass(const RailSpec& rail) const { return mass_override.value_or(rail.default_mass()); }

    bool symmetric(double rel_tol = 1e-9) const {
        auto close = [rel_tol](double u, double v) {
            return std::abs(u - v) <= rel_tol * std::max(std::abs(u), std::abs(v));
        };
        return close(minus_end.stiffness, plus_end.stiffness) &&
               close(minus_end.damping, plus_end.damping);
    }
};

// ---------------------------------------------------------------------------
// Frequency-domain boundary solve
//
// Convention: time dependence x(t) = Re[x(omega) e^{-i omega t}], so a time
// delay tau multiplies a Fourier amplitude by e^{+i omega tau}.
// ---------------------------------------------------------------------------

/// R = mass omega^2 / (K - i mu omega). A free end (K = mu = 0) returns the
/// infinity marker; callers work with 1/R which is then exactly zero.
inline complexd ratio_R(const SuspensionEnd& end, double mass, double omega) {
    if (!(omega > 0.0)) throw validation_error("ratio_R: omega must be positive");
    if (!(mass > 0.0)) throw validation_error("ratio_R: mass must be positive");
    if (end.stiffness == 0.0 && end.damping == 0.0)
        return {std::numeric_limits<double>::infinity(), 0.0};
    return mass * omega * omega / complexd(end.stiffness, -end.damping * omega);
}

namespace detail {

/// 1/R, finite for every admissible end (0 for a free end).
inline complexd inv_ratio_R(const SuspensionEnd& end, double mass, double omega) {
    return complexd(end.stiffness, -end.damping * omega) / (mass * omega * omega);
}

}  // namespace detail

/// End coefficients of the torque-free boundary system, with the common
/// factor cosh(kappa L) sinh(kappa L) divided out and all hyperbolics
/// expressed through tanh so the evaluation cannot overflow.
struct EndCoefficients {
    complexd alpha{};
    complexd beta{};
    complexd gamma{};
};

struct BoundaryCoefficients {
    double kappa = 0.0;
    double kappa_l = 0.0;
    EndCoefficients minus_end;
    EndCoefficients plus_end;
};

inline BoundaryCoefficients boundary_coefficients(const RailSpec& rail,
                                                  const SuspensionSpec& suspension,
                                                  double omega) {
    suspension.validate();
    const double kappa = dispersion_kappa(rail, omega);
    const double y = kappa * rail.half_length;
    const double s = std::sin(y);
    const double c = std::cos(y);
    const double th = std::tanh(y);
    // kappa L / R equals (K - i mu w) / (E I kappa^3) through the dispersion
    // relation only for the strict rho*A*half_length, so the solve never
    // honours a mass override.
    const double mass = rail.default_mass();

    auto one_end = [&](const SuspensionEnd& end) {
        const complexd ir = detail::inv_ratio_R(end, mass, omega);
        EndCoefficients e;
        e.alpha = s / th - c - 2.0 * y * s * ir;
        e.beta = s + th * c - 2.0 * y * c * ir;
        e.gamma = -y * ir;
        return e;
    };

    BoundaryCoefficients out;
    out.kappa = kappa;
    out.kappa_l = y;
    out.minus_end = one_end(suspension.minus_end);
    out.plus_end = one_end(suspension.plus_end);
    return out;
}

/// Complex amplitudes of X(z,omega) = a sin(kappa z) + b cos(kappa z)
///                                  + c sinh(kappa z) + d cosh(kappa z).
struct ResponseAmplitudes {
    double kappa = 0.0;
    double half_length = 0.0;
    complexd a{}, b{}, c{}, d{};
};

/// Solve the two-by-two boundary system for the support motions
/// x_minus(omega), x_plus(omega). Throws resonance_error when the system is
/// singular (an undamped resonance hit exactly).
inline ResponseAmplitudes solve_amplitudes(const RailSpec& rail, const SuspensionSpec& suspension,
                                           double omega, complexd x_minus, complexd x_plus) {
    const BoundaryCoefficients bc = boundary_coefficients(rail, suspension, omega);
    const EndCoefficients& em = bc.minus_end;
    const EndCoefficients& ep = bc.plus_end;

    // eps = -1:  alpha a - beta b = -gamma x_minus
    // eps = +1:  alpha a + beta b = +gamma x_plus
    const complexd det = em.alpha * ep.beta + ep.alpha * em.beta;
    const double scale = (std::abs(em.alpha) + std::abs(em.beta)) *
                         (std::abs(ep.alpha) + std::abs(ep.beta));
    if (!(std::abs(det) > 1e-12 * scale))
        throw resonance_error(
            "solve_amplitudes: boundary system singular (undamped resonance) at omega=" +
                std::to_string(omega) + " rad/s; supply damping to probe this frequency",
            omega);

    ResponseAmplitudes r;
    r.kappa = bc.kappa;
    r.half_length = rail.half_length;
    r.a = (em.beta * ep.gamma * x_plus - ep.beta * em.gamma * x_minus) / det;
    r.b = (em.alpha * ep.gamma * x_plus + ep.alpha * em.gamma * x_minus) / det;
    const double y = bc.kappa_l;
    r.c = r.a * std::sin(y) / std::sinh(y);
    r.d = r.b * std::cos(y) / std::cosh(y);
    return r;
}

/// Closed-form small-kappa-L amplitudes for identical ends:
///   a = (x_plus - x_minus) / (4 kappa L) * 3 / (3 - R)
///   b = (x_plus + x_minus) / (4 (1 - R))
/// A diagnostic companion to solve_amplitudes, not the production path.
struct LowFreqAmplitudes {
    complexd a{};
    complexd b{};
};

inline LowFreqAmplitudes amplitudes_lowfreq(const RailSpec& rail,
                                            const SuspensionSpec& suspension, double omega,
                                            complexd x_minus, complexd x_plus) {
    suspension.validate();
    if (!suspension.symmetric())
        throw unsupported_configuration(
            "amplitudes_lowfreq: requires identical suspension ends");
    const double y = dispersion_kappa(rail, omega) * rail.half_length;
    if (!(y < 0.3))
        throw unsupported_configuration(
            "amplitudes_lowfreq: valid only for kappa L < 0.3 (got " + std::to_string(y) + ")");
    const complexd r = ratio_R(suspension.minus_end, rail.default_mass(), omega);
    if (std::abs(3.0 - r) < 1e-12 || std::abs(1.0 - r) < 1e-12)
        throw resonance_error("amplitudes_lowfreq: undamped pendular resonance", omega);
    LowFreqAmplitudes lf;
    lf.a = (x_plus - x_minus) / (4.0 * y) * 3.0 / (3.0 - r);
    lf.b = (x_plus + x_minus) / (4.0 * (1.0 - r));
    return lf;
}

/// Transverse displacement of the neutral line at position z in [-L, L].
inline complexd shape(const ResponseAmplitudes& amps, double z) {
    const double l = amps.half_length;
    if (!(std::abs(z) <= l * (1.0 + 1e-12)))
        throw validation_error("shape: z outside [-half_length, half_length]");
    const double kz = amps.kappa * z;
    const double y = amps.kappa * l;
    if (y < 350.0)
        return amps.a * std::sin(kz) + amps.b * std::cos(kz) + amps.c * std::sinh(kz) +
               amps.d * std::cosh(kz);
    // Large kappa L: evaluate the hyperbolic part through ratios of
    // exponentials so neither factor overflows.
    const double az = std::abs(kz);
    const double e = std::exp(az - y);  // <= 1
    const double sinh_ratio = std::copysign(
        e * (1.0 - std::exp(-2.0 * az)) / (1.0 - std::exp(-2.0 * y)), kz);
    const double cosh_ratio = e * (1.0 + std::exp(-2.0 * az)) / (1.0 + std::exp(-2.0 * y));
    return amps.a * std::sin(kz) + amps.b * std::cos(kz) +
           amps.a * std::sin(y) * sinh_ratio + amps.b * std::cos(y) * cosh_ratio;
}

// ---------------------------------------------------------------------------
// Rigid-body (pendular) resonances
// ---------------------------------------------------------------------------

struct PendularModes {
    double omega_osc = 0.0;  ///< in-phase oscillation [rad/s]
    double omega_rot = 0.0;  ///< rotation about the center, sqrt(3) * omega_osc
    double q_osc = 0.0;      ///< infinite when the suspension is undamped
    double q_rot = 0.0;
};

inline PendularModes pendular_modes(const RailSpec& rail, const SuspensionSpec& suspension) {
    rail.validate();
    suspension.validate();
    if (!suspension.symmetric())
        throw unsupported_configuration(
            "pendular_modes: ends differ; the two pendular resonances mix and are not "
            "covered by this model");
    const double k = suspension.minus_end.stiffness;
    if (!(k > 0.0))
        throw validation_error("pendular_modes: requires a restoring stiffness K > 0");
    const double mass = suspension.mass(rail);
    PendularModes pm;
    pm.omega_osc = std::sqrt(k / mass);
    pm.omega_rot = pm.omega_osc * std::sqrt(3.0);
    const double mu = suspension.minus_end.damping;
    if (mu > 0.0) {
        const PendularQ q = pendular_q_factors(rail, mu, pm.omega_osc, pm.omega_rot, mass);
        pm.q_osc = q.q_osc;
        pm.q_rot = q.q_rot;
    } else {
        pm.q_osc = std::numeric_limits<double>::infinity();
        pm.q_rot = std::numeric_limits<double>::infinity();
    }
    return pm;
}

}  // namespace railnoise
