// Acceptance suite: end-to-end checks of the shipped profiles and the
// library pipeline, one PASS/FAIL line per criterion. Exits non-zero when
// any criterion fails.

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "railnoise/cli.hpp"
#include "railnoise/config.hpp"
#include "railnoise/railnoise.hpp"

using namespace railnoise;
using cd = std::complex<double>;

namespace {

const std::string data_dir = RAILNOISE_DATA_DIR;

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!pass) ++failures;
}

std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

// --- small deterministic generator (same scheme as the unit tests) ---------
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double log_uniform(double lo, double hi) { return lo * std::pow(hi / lo, uniform()); }
    cd box() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }
};

RailSpec random_rail(Rng& rng) {
    RailSpec rail;
    rail.material.young_modulus = rng.log_uniform(5e9, 4e11);
    rail.material.density = rng.log_uniform(5e2, 2e4);
    rail.section.area = rng.log_uniform(1e-4, 5e-2);
    rail.section.second_moment_y = rng.log_uniform(1e-8, 1e-4);
    rail.half_length = rng.uniform(0.25, 1.5);
    return rail;
}

// Independent transcription of the closed-form transfer in terms of a, b.
cd closed_form_total(const ResponseAmplitudes& amps, const InterferometerSpec& interf,
                     double omega) {
    const double k = amps.kappa;
    const double x = k * interf.inter_grating_distance;
    const double y = k * amps.half_length;
    const double wt = omega * interf.time_of_flight();
    const cd bend = amps.b * ((1.0 - std::cos(x)) +
                              (1.0 - std::cosh(x)) * std::cos(y) / std::cosh(y));
    const cd sag = cd(0.0, 1.0) * amps.a *
                   (std::sin(x) + std::sinh(x) * std::sin(y) / std::sinh(y)) * std::sin(wt);
    const cd acc = amps.b * (std::cos(x) + std::cosh(x) * std::cos(y) / std::cosh(y)) *
                   (1.0 - std::cos(wt));
    return 2.0 * interf.diffraction_order * interf.grating_wavevector * (bend + sag + acc);
}

double ternary_peak(const std::function<double(double)>& f, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (f(m1) < f(m2))
            lo = m1;
        else
            hi = m2;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

// ---------------------------------------------------------------------------

static void criterion_1_2(const Config& bench) {
    const ModalSolution modal = find_bending_modes(bench.rail, 6);
    const double nu0 = modal.omega0 / two_pi;
    report(1, nu0 > 433.0 && nu0 < 439.0,
           "fundamental bending resonance " + fmt(nu0) + " Hz within [433, 439]");

    const double k0l = modal.modes[0].kappa * bench.rail.half_length;
    const double ratio = modal.modes[1].omega / modal.omega0;
    bool ok = std::abs(k0l - 2.3650) <= 0.0005 && std::abs(ratio - 2.757) <= 0.005;
    ok = ok && std::abs(k0l - detail::mode_root_estimate(0)) < 0.01;
    for (int n = 1; n <= 6; ++n)
        ok = ok && std::abs(modal.modes[n].kappa * bench.rail.half_length -
                            detail::mode_root_estimate(n)) < 1e-3;
    report(2, ok,
           "root table: kappa0 L = " + fmt(k0l, 7) + " (2.3650 +- 0.0005), omega1/omega0 = " +
               fmt(ratio, 5) + " (2.757 +- 0.005), estimate gaps bounded");
}

static void criterion_3(const Config& bench) {
    SuspensionSpec s58 = bench.suspension;
    s58.minus_end = {1e6, 0.0};
    s58.plus_end = {1e6, 0.0};
    s58.mass_override = 58.0;
    const PendularModes pm58 = pendular_modes(bench.rail, s58);
    SuspensionSpec s29 = s58;
    s29.mass_override = 29.1;
    const PendularModes pm29 = pendular_modes(bench.rail, s29);

    const double osc = pm58.omega_osc / two_pi;
    const double rot = pm58.omega_rot / two_pi;
    const double osc29 = pm29.omega_osc / two_pi;
    const bool ok = std::abs(osc - 20.9) <= 0.1 && std::abs(rot - 36.2) <= 0.2 &&
                    std::abs(osc29 - 29.5) <= 0.05;
    report(3, ok,
           "pendular arithmetic: " + fmt(osc, 4) + " / " + fmt(rot, 4) +
               " Hz at 58 kg; " + fmt(osc29, 4) + " Hz at 29.1 kg");
}

static void criterion_4(const Config& bench) {
    const ModalSolution modal = find_bending_modes(bench.rail, 0);
    const double k0l = modal.modes[0].kappa * bench.rail.half_length;
    const double mass = bench.suspension.mass(bench.rail);
    const double mu =
        mass * (two_pi * 460.4) * bending_mode_g(k0l, Parity::even) / (8.0 * 60.0);
    report(4, mu >= 530.0 && mu <= 575.0,
           "damping inversion from Q0 = 60 at 460.4 Hz gives mu = " + fmt(mu, 4) +
               " kg/s within [530, 575]");
}

static void criterion_5() {
    Rng rng(20260808);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const RailSpec rail = random_rail(rng);
        SuspensionSpec susp;
        susp.minus_end = {rng.log_uniform(1e4, 1e8), rng.log_uniform(1.0, 2e3)};
        susp.plus_end = susp.minus_end;
        InterferometerSpec interf;
        interf.grating_wavevector = rng.log_uniform(1e5, 5e7);
        interf.inter_grating_distance = rail.half_length * rng.uniform(0.3, 0.99);
        interf.atom_velocity = rng.log_uniform(100.0, 3000.0);
        interf.diffraction_order = 1 + static_cast<int>(rng.uniform() * 4.0);

        for (int j = 0; j < 8; ++j) {
            const double omega = two_pi * rng.log_uniform(1.0, 2000.0);
            const cd xm = rng.box(), xp = rng.box();
            const auto amps = solve_amplitudes(rail, susp, omega, xm, xp);
            const auto parts = phase_response(rail, susp, interf, omega, xm, xp);
            const cd oracle = closed_form_total(amps, interf, omega);
            const double rel =
                std::abs(parts.total - oracle) / (std::abs(oracle) + std::abs(parts.total) + 1e-300);
            worst = std::max(worst, rel);
        }
    }
    report(5, worst < 1e-10,
           "delayed-sum transfer vs closed-form transcription, 200 random symmetric "
           "configurations: worst relative deviation " + fmt(worst, 3));
}

static void criterion_6(const Config& measured) {
    const RailSpec& rail = measured.rail;
    const SuspensionSpec& susp = measured.suspension;
    const InterferometerSpec interf = measured.require_interferometer();
    InterferometerSpec sub = interf;  // sampling points at +-L, physical T kept
    sub.inter_grating_distance = rail.half_length;
    sub.atom_velocity = rail.half_length / interf.time_of_flight();

    auto rel_at = [&](double nu) {
        const double omega = two_pi * nu;
        double worst = 0.0;
        const std::vector<std::pair<cd, cd>> drives{{cd(0.0), cd(1.0)},
                                                    {cd(1.0), cd(1.0)},
                                                    {cd(-1.0), cd(1.0)}};
        for (const auto& [xm, xp] : drives) {
            const cd exact = phase_response(rail, susp, sub, omega, xm, xp).total;
            const cd lf = phase_transfer_lowfreq(rail, susp, interf, omega, xm, xp);
            worst = std::max(worst, std::abs(lf - exact) / std::abs(exact));
        }
        return worst;
    };

    const double at10 = rel_at(10.0);
    double low = 0.0;
    for (double nu : {2.0, 3.0, 4.0, 5.0}) low = std::max(low, rel_at(nu));
    report(6, at10 <= 0.05 && low <= 0.02,
           "reduction chain: low-frequency transfer vs exact, " + fmt(100.0 * at10, 3) +
               "% at 10 Hz (<= 5%), worst " + fmt(100.0 * low, 3) + "% for nu <= 5 Hz (<= 2%)");
}

static void criterion_7() {
    Rng rng(424242);
    double worst_res = 0.0, worst_lin = 0.0, worst_mirror = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const RailSpec rail = random_rail(rng);
        SuspensionSpec susp;
        susp.minus_end = {rng.log_uniform(1e3, 1e8), rng.log_uniform(0.1, 2e3)};
        susp.plus_end = {rng.log_uniform(1e3, 1e8), rng.log_uniform(0.1, 2e3)};
        const double kl = rng.log_uniform(0.02, 200.0);
        const double omega = rail.dispersion_constant() * std::pow(kl / rail.half_length, 2);
        const cd xm = rng.box(), xp = rng.box();
        const auto r = solve_amplitudes(rail, susp, omega, xm, xp);

        double max_shape = 0.0;
        for (int s = -10; s <= 10; ++s)
            max_shape = std::max(max_shape, std::abs(shape(r, rail.half_length * s / 10.0)));

        const double ei = rail.bending_stiffness();
        const double k3 = r.kappa * r.kappa * r.kappa;
        for (int eps : {-1, 1}) {
            const double z = eps * rail.half_length;
            const double kz = r.kappa * z;
            const cd curv = -r.a * std::sin(kz) - r.b * std::cos(kz) + r.c * std::sinh(kz) +
                            r.d * std::cosh(kz);
            worst_res = std::max(worst_res, std::abs(curv) / std::max(max_shape, 1e-30));

            const cd shear = -r.a * std::cos(kz) + r.b * std::sin(kz) + r.c * std::cosh(kz) +
                             r.d * std::sinh(kz);
            const SuspensionEnd& end = (eps < 0) ? susp.minus_end : susp.plus_end;
            const cd x_end = (eps < 0) ? xm : xp;
            const cd f_el = -double(eps) * ei * k3 * shear;
            const cd spring = cd(end.stiffness, -end.damping * omega);
            const cd f_sp = -spring * (shape(r, z) - x_end);
            const double scale =
                ei * k3 * (std::abs(r.a) + std::abs(r.b) + std::abs(r.c) + std::abs(r.d)) +
                std::abs(spring) * (std::abs(shape(r, z)) + std::abs(x_end));
            worst_res = std::max(worst_res, std::abs(f_el - f_sp) / scale);
        }

        // linearity and (for symmetric ends) mirror symmetry
        susp.plus_end = susp.minus_end;
        const auto r1 = solve_amplitudes(rail, susp, omega, xm, xp);
        const auto r2 = solve_amplitudes(rail, susp, omega, 0.5 * xm, -0.3 * xp);
        const auto r12 = solve_amplitudes(rail, susp, omega, 1.5 * xm, 0.7 * xp);
        const double norm = std::abs(r12.a) + std::abs(r12.b) + 1e-30;
        worst_lin = std::max(worst_lin,
                             std::abs(r1.a + r2.a - r12.a) / norm);
        worst_lin = std::max(worst_lin,
                             std::abs(r1.b + r2.b - r12.b) / norm);

        const auto rs = solve_amplitudes(rail, susp, omega, xp, xm);
        const double z = rng.uniform(-1.0, 1.0) * rail.half_length;
        const double sscale = std::abs(shape(r1, z)) + std::abs(rs.a) + std::abs(rs.b) + 1e-30;
        worst_mirror = std::max(worst_mirror, std::abs(shape(r1, z) - shape(rs, -z)) / sscale);
    }
    report(7, worst_res < 1e-9 && worst_lin < 1e-12 && worst_mirror < 1e-12,
           "boundary residuals over 1000 draws: worst " + fmt(worst_res, 3) +
               " (< 1e-9); linearity " + fmt(worst_lin, 3) + ", mirror " +
               fmt(worst_mirror, 3) + " (< 1e-12)");
}

static void criterion_8() {
    const VisibilityModel m1{0.98, 0.286, {}, {}};
    const VisibilityModel m2{0.85, 0.650, {}, {}};
    bool ok = std::abs(visibility(m1, 1) - 0.849) < 5e-4 &&
              std::abs(visibility(m1, 2) - 0.553) < 5e-4 &&
              std::abs(visibility(m1, 3) - 0.271) < 5e-4 &&
              std::abs(visibility(m2, 1) - 0.614) < 5e-4 &&
              std::abs(visibility(m2, 2) - 0.232) < 5e-4 &&
              std::abs(visibility(m2, 3) - 0.046) < 5e-4;

    // exact round trip
    std::vector<VisibilityPoint> exact;
    for (int p : {1, 2, 3}) exact.push_back({p, visibility({0.9, 0.3, {}, {}}, p), {}});
    const VisibilityModel back = fit_visibility(exact);
    ok = ok && std::abs(back.v_max - 0.9) < 1e-10 && std::abs(back.phi1_sq - 0.3) < 1e-10;

    // rounded triple recovers the generating parameters within their quoted errors
    const VisibilityModel fit =
        fit_visibility({{1, 0.849, {}}, {2, 0.553, {}}, {3, 0.271, {}}});
    ok = ok && std::abs(fit.v_max - 0.98) < 0.01 && std::abs(fit.phi1_sq - 0.286) < 0.008;

    report(8, ok,
           "visibility forward values to 3 decimals, exact fit round-trip, rounded-triple "
           "recovery (" + fmt(fit.v_max, 4) + ", " + fmt(fit.phi1_sq, 4) + ")");
}

static void criterion_9(const Config& measured) {
    const auto noise = resolve_noise(measured.noise);
    const auto res = phase_noise_spectrum(measured.rail, measured.suspension,
                                          measured.require_interferometer(), noise.minus_end,
                                          noise.plus_end, measured.band, measured.grid);
    const double total = res.mean_square_total;
    const double share = res.mean_square_sagnac / total;
    const double rms = std::sqrt(res.mean_square_bending_displacement);
    const bool ok = total >= 0.10 && total <= 0.25 && share >= 0.70 && rms < 3e-9;
    report(9, ok,
           "pipeline on the calibrated spectrum: <Phi^2>/p^2 = " + fmt(total, 4) +
               " in [0.10, 0.25], Sagnac share " + fmt(share, 4) + " >= 0.70, rms bending " +
               fmt(rms * 1e9, 4) + " nm < 3 nm");
}

static void criterion_10(const Config& measured) {
    const RailSpec& rail = measured.rail;
    const SuspensionSpec& susp = measured.suspension;
    const PendularModes pm = pendular_modes(rail, susp);
    const double nu_osc = pm.omega_osc / two_pi;
    const double nu_rot = pm.omega_rot / two_pi;
    const double nu0 = find_bending_modes(rail, 0).omega0 / two_pi;

    auto b2 = [&](double nu) {
        return std::norm(solve_amplitudes(rail, susp, two_pi * nu, 0.0, 1.0).b);
    };
    auto a2 = [&](double nu) {
        return std::norm(solve_amplitudes(rail, susp, two_pi * nu, 0.0, 1.0).a);
    };

    const double b_peak = ternary_peak(b2, 0.8 * nu_osc, 1.2 * nu_osc);
    const double a_peak = ternary_peak(a2, 0.8 * nu_rot, 1.2 * nu_rot);
    const double b_bend_peak = ternary_peak(b2, 0.9 * nu0, 1.1 * nu0);

    const bool b_peak_ok = std::abs(b_peak - nu_osc) <= 0.01 * nu_osc;
    const bool a_peak_ok = std::abs(a_peak - nu_rot) <= 0.01 * nu_rot;
    const bool bend_ok = std::abs(b_bend_peak - nu0) <= 0.025 * nu0;

    const double lo = 1.5 * nu_rot, hi = nu0 / 1.5;
    bool a_mono = true, b_mono = true;
    double prev_a = a2(lo), prev_b = b2(lo);
    double b_rise = 0.0;
    for (int i = 1; i <= 2000; ++i) {
        const double nu = lo + (hi - lo) * i / 2000.0;
        const double va = a2(nu), vb = b2(nu);
        if (va > prev_a * (1.0 + 1e-12)) a_mono = false;
        if (vb > prev_b * (1.0 + 1e-12)) {
            b_mono = false;
            b_rise = std::max(b_rise, vb / prev_b - 1.0);
        }
        prev_a = va;
        prev_b = vb;
    }

    const bool ok = b_peak_ok && a_peak_ok && bend_ok && a_mono && b_mono;
    report(10, ok,
           "sensitivity shape: |b|^2 peak " + fmt(b_peak, 6) + " Hz vs nu_osc " +
               fmt(nu_osc, 6) + " (" + fmt(100.0 * (b_peak / nu_osc - 1.0), 3) +
               "%, bound 1%), |a|^2 peak " + fmt(a_peak, 6) + " Hz vs nu_rot " +
               fmt(nu_rot, 6) + " (" + fmt(100.0 * (a_peak / nu_rot - 1.0), 3) +
               "%), bending peak " + fmt(b_bend_peak, 6) + " Hz near nu0 " + fmt(nu0, 6) +
               ", monotone decay a=" + (a_mono ? "yes" : "no") + " b=" +
               (b_mono ? "yes" : "no"));
}

int main() {
    const Config bench = load_config(data_dir + "/bench.cfg");
    const Config measured = load_config(data_dir + "/bench_measured.cfg");

    criterion_1_2(bench);
    criterion_3(bench);
    criterion_4(bench);
    criterion_5();
    criterion_6(measured);
    criterion_7();
    criterion_8();
    criterion_9(measured);
    criterion_10(measured);

    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures;
}
