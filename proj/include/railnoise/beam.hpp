#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "railnoise/errors.hpp"

namespace railnoise {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// ---------------------------------------------------------------------------
// Rail description
// ---------------------------------------------------------------------------

struct Material {
    double young_modulus = 0.0;  ///< E [N/m^2]
    double density = 0.0;        ///< rho [kg/m^3]

    void validate() const {
        if (!(young_modulus > 0.0) || !std::isfinite(young_modulus))
            throw validation_error("material.young_modulus must be positive and finite");
        if (!(density > 0.0) || !std::isfinite(density))
            throw validation_error("material.density must be positive and finite");
    }
};

struct CrossSection {
    double area = 0.0;             ///< A [m^2]
    double second_moment_y = 0.0;  ///< I_y [m^4], about the neutral line
    /// Optional largest transverse distance from the neutral line [m].
    /// When supplied, I_y is checked against the physical bound A*extent^2.
    std::optional<double> max_extent;

    void validate() const {
        if (!(area > 0.0) || !std::isfinite(area))
            throw validation_error("section.area must be positive and finite");
        if (!(second_moment_y > 0.0) || !std::isfinite(second_moment_y))
            throw validation_error("section.second_moment_y must be positive and finite");
        if (max_extent) {
            if (!(*max_extent > 0.0))
                throw validation_error("section.max_extent must be positive");
            if (second_moment_y >= area * (*max_extent) * (*max_extent))
                throw validation_error(
                    "section.second_moment_y exceeds area * max_extent^2; "
                    "not a physical section");
        }
    }
};

/// Uniform rail of total length 2*half_length that bends in one transverse
/// direction only. All quantities SI; angular frequencies in rad/s.
struct RailSpec {
    Material material;
    CrossSection section;
    double half_length = 0.0;  ///< L [m]; gratings live on z in [-L, +L]

    void validate() const {
        material.validate();
        section.validate();
        if (!(half_length > 0.0) || !std::isfinite(half_length))
            throw validation_error("rail.half_length must be positive and finite");
    }

    /// E * I_y [N m^2]
    double bending_stiffness() const { return material.young_modulus * section.second_moment_y; }
    /// rho * A [kg/m]
    double linear_mass() const { return material.density * section.area; }
    /// sqrt(E I_y / (rho A)); omega = dispersion_constant * kappa^2
    double dispersion_constant() const { return std::sqrt(bending_stiffness() / linear_mass()); }
    /// rho * A * half_length [kg], the strict reading of the mass parameter
    double default_mass() const { return linear_mass() * half_length; }
};

// ---------------------------------------------------------------------------
// Dispersion and free bending modes
// ---------------------------------------------------------------------------

/// kappa(omega) from rho A omega^2 = E I_y kappa^4.
inline double dispersion_kappa(const RailSpec& rail, double omega) {
    rail.validate();
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw validation_error("dispersion_kappa: omega must be positive");
    return std::sqrt(omega / rail.dispersion_constant());
}

enum class Parity { even, odd };

inline const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

struct BendingMode {
    int index = 0;       ///< n, starting at 0
    double kappa = 0.0;  ///< [1/m]
    double omega = 0.0;  ///< [rad/s]
    Parity parity = Parity::even;
    std::optional<double> q_factor;  ///< filled once a damping coefficient is known
};

struct ModalSolution {
    std::vector<BendingMode> modes;  ///< sorted by omega ascending
    double omega0 = 0.0;             ///< modes[0].omega [rad/s]
    double period_t0 = 0.0;          ///< 2 pi / omega0 [s]
};

namespace detail {

/// Conditioned resonance function for the free rail: cos(2x) - 1/cosh(2x),
/// zero exactly where cos(2x) cosh(2x) = 1. 1/cosh underflows harmlessly
/// for large x, where cosh(2x) itself would overflow.
inline double mode_characteristic(double x) {
    return std::cos(2.0 * x) - 1.0 / std::cosh(2.0 * x);
}

/// Asymptotic root location (2n+3) pi/4 + (-1)^n / cosh((2n+3) pi/2).
inline double mode_root_estimate(int n) {
    const double base = (2.0 * n + 3.0) * pi / 4.0;
    const double c = std::cosh((2.0 * n + 3.0) * pi / 2.0);
    const double corr = std::isinf(c) ? 0.0 : 1.0 / c;
    return base + ((n % 2 == 0) ? corr : -corr);
}

/// Root of the resonance condition near (2n+3) pi/4, bracketed in +-0.4 and
/// refined by bisection with secant steps to ~1e-12 relative in x.
inline double solve_mode_root(int n) {
    const double base = (2.0 * n + 3.0) * pi / 4.0;
    double lo = base - 0.4;
    double hi = base + 0.4;
    double flo = mode_characteristic(lo);
    double fhi = mode_characteristic(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw numeric_error("bending-mode root bracketing failed for n=" + std::to_string(n));

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        // secant proposal, clipped to the current bracket
        double xs = hi - fhi * (hi - lo) / (fhi - flo);
        double xm = 0.5 * (lo + hi);
        x = (xs > lo && xs < hi) ? xs : xm;
        double fx = mode_characteristic(x);
        if (fx == 0.0 || (hi - lo) < 1e-13 * base) break;
        if (flo * fx < 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        // alternate with a plain bisection step to guarantee shrinkage
        xm = 0.5 * (lo + hi);
        double fm = mode_characteristic(xm);
        if (fm == 0.0) return xm;
        if (flo * fm < 0.0) {
            hi = xm;
            fhi = fm;
        } else {
            lo = xm;
            flo = fm;
        }
    }
    x = 0.5 * (lo + hi);
    if (std::abs(mode_characteristic(x)) > 1e-10)
        throw numeric_error("bending-mode root refinement failed for n=" + std::to_string(n));
    return x;
}

}  // namespace detail

/// First bending angular frequency from the closed form 5.593 sqrt(E I_y / (rho A L^4)).
inline double omega0_closed_form(const RailSpec& rail) {
    const double l2 = rail.half_length * rail.half_length;
    return 5.593 * rail.dispersion_constant() / l2;
}

/// Free bending resonances n = 0..n_max of the rail (rigid-body roots excluded).
inline ModalSolution find_bending_modes(const RailSpec& rail, int n_max) {
    rail.validate();
    if (n_max < 0) throw validation_error("find_bending_modes: n_max must be >= 0");

    ModalSolution out;
    out.modes.reserve(static_cast<std::size_t>(n_max) + 1);
    const double c = rail.dispersion_constant();
    for (int n = 0; n <= n_max; ++n) {
        const double kl = detail::solve_mode_root(n);
        BendingMode m;
        m.index = n;
        m.kappa = kl / rail.half_length;
        m.omega = c * m.kappa * m.kappa;
        m.parity = (n % 2 == 0) ? Parity::even : Parity::odd;
        out.modes.push_back(m);
    }
    out.omega0 = out.modes.front().omega;
    out.period_t0 = two_pi / out.omega0;

    // independent closed-form cross-check of the fundamental
    const double ref = omega0_closed_form(rail);
    if (std::abs(out.omega0 - ref) > 1e-3 * ref)
        throw numeric_error("find_bending_modes: omega0 disagrees with closed form");
    return out;
}

// ---------------------------------------------------------------------------
// Q factors
// ---------------------------------------------------------------------------

/// Parity-dependent factor g(kappa_n L) entering the bending-mode Q.
inline double bending_mode_g(double kappa_l, Parity parity) {
    const double s2 = std::sin(2.0 * kappa_l) / (2.0 * kappa_l);
    if (parity == Parity::even) {
        const double c = std::cos(kappa_l);
        const double ch = std::cosh(kappa_l);
        return (1.0 + s2) * (1.0 / (c * c) + 1.0 / (ch * ch));
    }
    const double s = std::sin(kappa_l);
    const double sh = std::sinh(kappa_l);
    return (1.0 - s2) * (1.0 / (s * s) + 1.0 / (sh * sh));
}

/// Q of one bending mode: mass * omega * g(kappa L) / (8 mu).
inline double bending_mode_q(double mass, double omega, double kappa_l, Parity parity,
                             double mu) {
    if (!(mu > 0.0)) throw validation_error("bending_mode_q: mu must be positive");
    if (!(mass > 0.0)) throw validation_error("bending_mode_q: mass must be positive");
    if (!(omega > 0.0)) throw validation_error("bending_mode_q: omega must be positive");
    return mass * omega * bending_mode_g(kappa_l, parity) / (8.0 * mu);
}

/// Fill q_factor for every mode of a modal solution. The mass parameter
/// defaults to rho*A*half_length; pass the full rail mass instead when that
/// is the convention in use (see README on the mass conventions).
inline ModalSolution mode_q_factors(const RailSpec& rail, double mu, ModalSolution modes,
                                    std::optional<double> mass = std::nullopt) {
    if (!(mu > 0.0)) throw validation_error("mode_q_factors: mu must be positive");
    const double m = mass.value_or(rail.default_mass());
    for (auto& mode : modes.modes)
        mode.q_factor =
            bending_mode_q(m, mode.omega, mode.kappa * rail.half_length, mode.parity, mu);
    return modes;
}

struct PendularQ {
    double q_osc = 0.0;
    double q_rot = 0.0;
};

/// Pendular Q factors: Q_osc = mass omega_osc / mu, Q_rot = mass omega_rot / (3 mu).
inline PendularQ pendular_q_factors(const RailSpec& rail, double mu, double omega_osc,
                                    double omega_rot,
                                    std::optional<double> mass = std::nullopt) {
    if (!(mu > 0.0)) throw validation_error("pendular_q_factors: mu must be positive");
    if (!(omega_osc > 0.0) || !(omega_rot > 0.0))
        throw validation_error("pendular_q_factors: frequencies must be positive");
    const double m = mass.value_or(rail.default_mass());
    return {m * omega_osc / mu, m * omega_rot / (3.0 * mu)};
}

}  // namespace railnoise
