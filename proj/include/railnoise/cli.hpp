#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "railnoise/config.hpp"
#include "railnoise/railnoise.hpp"

namespace railnoise::cli {

using nlohmann::json;

// Exit codes, stable for scripting.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;   // configuration / validation problem
inline constexpr int exit_numeric = 3;  // numerical failure (resonance singularity, ...)
inline constexpr int exit_io = 4;       // file system problem

/// CSV numbers at 9 significant digits (stable diffs); JSON keeps full precision.
inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open output file: " + path);
    return f;
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    auto f = open_out(path);
    f << text;
}

inline std::vector<VisibilityPoint> load_visibility_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open visibility data file: " + path);
    std::vector<VisibilityPoint> pts;
    std::string line;
    long row = -1;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        std::string t = railnoise::detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const auto comma = t.find(',', pos);
            fields.push_back(railnoise::detail::trim(
                t.substr(pos, comma == std::string::npos ? comma : comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        double p = 0.0, v = 0.0, s = 0.0;
        const bool ok = fields.size() >= 2 && railnoise::detail::parse_double(fields[0], p) &&
                        railnoise::detail::parse_double(fields[1], v) &&
                        (fields.size() < 3 || railnoise::detail::parse_double(fields[2], s));
        if (!ok) {
            if (header_allowed && row < 0) {
                header_allowed = false;
                continue;
            }
            throw validation_error("visibility data: malformed row " + std::to_string(row + 1) +
                                   " in " + path);
        }
        header_allowed = false;
        ++row;
        VisibilityPoint pt;
        pt.order = static_cast<int>(p);
        pt.visibility = v;
        if (fields.size() >= 3) pt.sigma = s;
        pts.push_back(pt);
    }
    return pts;
}

}  // namespace detail

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string format = "csv";
    std::string output;  // empty or "-" means stdout

    Config load() const {
        if (config_path.empty())
            throw validation_error(
                "no configuration given; pass --config FILE or set RAILNOISE_CONFIG");
        RawConfig raw = load_raw_config(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw validation_error("--set expects section.key=value, got '" + kv + "'");
            raw.set(railnoise::detail::trim(kv.substr(0, eq)),
                    railnoise::detail::trim(kv.substr(eq + 1)));
        }
        return build_config(raw);
    }
};

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

inline void cmd_modes(const CommonArgs& common, int n_max, std::ostream& out) {
    const Config cfg = common.load();
    ModalSolution modal = find_bending_modes(cfg.rail, n_max);
    const double mu =
        0.5 * (cfg.suspension.minus_end.damping + cfg.suspension.plus_end.damping);
    if (mu > 0.0) modal = mode_q_factors(cfg.rail, mu, modal, cfg.suspension.mass(cfg.rail));
    const double omega0_cf = omega0_closed_form(cfg.rail);

    if (common.format == "json") {
        json j;
        j["omega0_closed_form_rad_s"] = omega0_cf;
        j["omega0_rad_s"] = modal.omega0;
        j["period_t0_s"] = modal.period_t0;
        j["modes"] = json::array();
        for (const auto& m : modal.modes) {
            json jm;
            jm["n"] = m.index;
            jm["kappa_l"] = m.kappa * cfg.rail.half_length;
            jm["nu_hz"] = m.omega / two_pi;
            jm["parity"] = to_string(m.parity);
            if (m.q_factor) jm["q_factor"] = *m.q_factor;
            j["modes"].push_back(jm);
        }
        detail::write_text(common.output, j.dump(2) + "\n", out);
        return;
    }
    std::string text;
    text += "# omega0_closed_form_rad_s = " + fmt9(omega0_cf) + "\n";
    text += "# omega0_rad_s = " + fmt9(modal.omega0) + "\n";
    text += "# period_t0_s = " + fmt9(modal.period_t0) + "\n";
    text += "n,kappa_l,nu_hz,parity,q_factor\n";
    for (const auto& m : modal.modes) {
        text += std::to_string(m.index) + "," + fmt9(m.kappa * cfg.rail.half_length) + "," +
                fmt9(m.omega / two_pi) + "," + to_string(m.parity) + "," +
                (m.q_factor ? fmt9(*m.q_factor) : std::string()) + "\n";
    }
    detail::write_text(common.output, text, out);
}

inline void cmd_pendular(const CommonArgs& common, std::ostream& out) {
    const Config cfg = common.load();
    const PendularModes pm = pendular_modes(cfg.rail, cfg.suspension);
    const double mass = cfg.suspension.mass(cfg.rail);
    if (common.format == "json") {
        json j;
        j["nu_osc_hz"] = pm.omega_osc / two_pi;
        j["nu_rot_hz"] = pm.omega_rot / two_pi;
        j["q_osc"] = pm.q_osc;
        j["q_rot"] = pm.q_rot;
        j["mass_kg"] = mass;
        detail::write_text(common.output, j.dump(2) + "\n", out);
        return;
    }
    std::string text = "nu_osc_hz,nu_rot_hz,q_osc,q_rot,mass_kg\n";
    text += fmt9(pm.omega_osc / two_pi) + "," + fmt9(pm.omega_rot / two_pi) + "," +
            fmt9(pm.q_osc) + "," + fmt9(pm.q_rot) + "," + fmt9(mass) + "\n";
    detail::write_text(common.output, text, out);
}

/// Squared amplitude response |a|^2, |b|^2 to unit motion of one support.
inline void cmd_response(const CommonArgs& common, std::ostream& out) {
    const Config cfg = common.load();
    const auto windows = resonance_windows(cfg.rail, cfg.suspension, cfg.band);
    const auto nus = frequency_grid(cfg.band, cfg.grid, windows);
    json jrows = json::array();
    std::string text = "nu_hz,a_abs2,b_abs2\n";
    for (double nu : nus) {
        const auto amps = solve_amplitudes(cfg.rail, cfg.suspension, two_pi * nu, 0.0, 1.0);
        const double a2 = std::norm(amps.a);
        const double b2 = std::norm(amps.b);
        if (common.format == "json")
            jrows.push_back({{"nu_hz", nu}, {"a_abs2", a2}, {"b_abs2", b2}});
        else
            text += fmt9(nu) + "," + fmt9(a2) + "," + fmt9(b2) + "\n";
    }
    if (common.format == "json")
        detail::write_text(common.output, jrows.dump(2) + "\n", out);
    else
        detail::write_text(common.output, text, out);
}

inline json phase_noise_summary_json(const PhaseNoiseResult& res, std::size_t grid_points) {
    json j;
    j["band_nu_min_hz"] = res.band.nu_min;
    j["band_nu_max_hz"] = res.band.nu_max;
    j["mean_square_total_rad2_per_p2"] = res.mean_square_total;
    j["mean_square_sagnac_rad2_per_p2"] = res.mean_square_sagnac;
    j["sagnac_share"] =
        res.mean_square_total > 0.0 ? res.mean_square_sagnac / res.mean_square_total : 0.0;
    j["rms_bending_m"] = std::sqrt(res.mean_square_bending_displacement);
    j["grid_points"] = grid_points;
    return j;
}

inline void cmd_phase_noise(const CommonArgs& common, std::string spectrum_out,
                            const std::string& summary_out, std::ostream& out) {
    if (common.format == "json" && spectrum_out == "phase_noise.csv")
        spectrum_out = "phase_noise.json";
    const Config cfg = common.load();
    const auto noise = resolve_noise(cfg.noise);
    const auto& interf = cfg.require_interferometer();
    const auto res = phase_noise_spectrum(cfg.rail, cfg.suspension, interf, noise.minus_end,
                                          noise.plus_end, cfg.band, cfg.grid);
    const json summary = phase_noise_summary_json(res, res.spectrum.size());

    if (common.format == "json") {
        json j;
        j["summary"] = summary;
        j["spectrum"] = json::array();
        for (const auto& s : res.spectrum)
            j["spectrum"].push_back({{"nu_hz", s.nu},
                                     {"phi2_total_rad2_hz", s.phi2_total},
                                     {"phi2_sagnac_rad2_hz", s.phi2_sagnac},
                                     {"input_psd_m2_hz", sample_psd(noise.minus_end, s.nu)}});
        detail::write_text(spectrum_out, j.dump(2) + "\n", out);
        out << summary.dump(2) << "\n";
        return;
    }

    std::string text = "nu_hz,phi2_total_rad2_hz,phi2_sagnac_rad2_hz,input_psd_m2_hz\n";
    for (const auto& s : res.spectrum)
        text += fmt9(s.nu) + "," + fmt9(s.phi2_total) + "," + fmt9(s.phi2_sagnac) + "," +
                fmt9(sample_psd(noise.minus_end, s.nu)) + "\n";
    detail::write_text(spectrum_out, text, out);
    detail::write_text(summary_out, summary.dump(2) + "\n", out);
    out << summary.dump(2) << "\n";
}

inline void cmd_rms_bending(const CommonArgs& common, std::ostream& out) {
    const Config cfg = common.load();
    const auto noise = resolve_noise(cfg.noise);
    const double rms = rms_bending(cfg.rail, cfg.suspension, cfg.require_interferometer(),
                                   noise.minus_end, noise.plus_end, cfg.band, cfg.grid);
    if (common.format == "json") {
        json j;
        j["rms_bending_m"] = rms;
        if (cfg.interferometer->optical_grating_wavevector)
            j["optical_phase_rad_p1"] =
                optical_phase(rms, 1, *cfg.interferometer->optical_grating_wavevector);
        detail::write_text(common.output, j.dump(2) + "\n", out);
        return;
    }
    std::string text = "rms_bending_m\n" + fmt9(rms) + "\n";
    detail::write_text(common.output, text, out);
}

struct VisibilityArgs {
    double v_max = 0.0;
    double phi1_sq = -1.0;
    int p_max = 3;
    std::string data_path;
    double model_phi1_sq = -1.0;
    std::string summary_path;
};

inline void cmd_visibility(const CommonArgs& common, const VisibilityArgs& va,
                           std::ostream& out) {
    const bool forward = va.phi1_sq >= 0.0 && va.v_max > 0.0;
    const bool fit = !va.data_path.empty();
    if (!forward && !fit)
        throw validation_error(
            "visibility: give --v-max/--phi1-sq for the forward table, --data for a fit, "
            "or both for a comparison");

    json j;
    std::string text;

    std::optional<VisibilityModel> fitted;
    if (fit) {
        const auto pts = detail::load_visibility_points(va.data_path);
        fitted = fit_visibility(pts);
        j["fit"] = {{"v_max", fitted->v_max},
                    {"v_max_sigma", fitted->v_max_sigma.value_or(0.0)},
                    {"phi1_sq", fitted->phi1_sq},
                    {"phi1_sq_sigma", fitted->phi1_sq_sigma.value_or(0.0)}};
        text += "# fit: v_max = " + fmt9(fitted->v_max) + " +- " +
                fmt9(fitted->v_max_sigma.value_or(0.0)) + ", phi1_sq = " +
                fmt9(fitted->phi1_sq) + " +- " + fmt9(fitted->phi1_sq_sigma.value_or(0.0)) +
                "\n";
    }
    if (forward) {
        VisibilityModel model{va.v_max, va.phi1_sq, {}, {}};
        j["forward"] = json::array();
        text += "order,visibility\n";
        for (int p = 0; p <= va.p_max; ++p) {
            const double v = visibility(model, p);
            j["forward"].push_back({{"order", p}, {"visibility", v}});
            text += std::to_string(p) + "," + fmt9(v) + "\n";
        }
    }

    double model_value = va.model_phi1_sq;
    if (!va.summary_path.empty()) {
        std::ifstream in(va.summary_path);
        if (!in) throw io_error("cannot open summary file: " + va.summary_path);
        json s = json::parse(in, nullptr, true, true);
        model_value = s.contains("summary")
                          ? s["summary"]["mean_square_total_rad2_per_p2"].get<double>()
                          : s["mean_square_total_rad2_per_p2"].get<double>();
    }
    if (model_value >= 0.0 && fitted) {
        const double ratio = model_value / fitted->phi1_sq;
        j["compare"] = {{"model_phi1_sq", model_value},
                        {"fitted_phi1_sq", fitted->phi1_sq},
                        {"model_to_fitted_ratio", ratio}};
        text += "# model phi1_sq = " + fmt9(model_value) +
                ", fitted = " + fmt9(fitted->phi1_sq) + ", ratio = " + fmt9(ratio) + "\n";
    }

    if (common.format == "json")
        detail::write_text(common.output, j.dump(2) + "\n", out);
    else
        detail::write_text(common.output, text, out);
}

inline void cmd_synth_noise(const CommonArgs& common, const std::string& segments,
                            int points_per_decade, double extend_to, std::ostream& out) {
    std::vector<PowerLawSegment> seg;
    std::optional<double> ext;
    int ppd = points_per_decade;
    if (!segments.empty()) {
        seg = railnoise::detail::parse_synth_segments(segments);
        if (extend_to > 0.0) ext = extend_to;
    } else {
        const Config cfg = common.load();
        if (!cfg.noise.synth_segments)
            throw validation_error("synth-noise: no --segments given and no noise.synth in config");
        seg = *cfg.noise.synth_segments;
        ext = cfg.noise.synth_extend_to;
        if (extend_to > 0.0) ext = extend_to;
        if (points_per_decade <= 0) ppd = cfg.noise.synth_points_per_decade;
    }
    if (ppd <= 0) ppd = 50;
    const NoiseSpectrum spec = synth_spectrum(seg, ppd, ext);
    std::ostringstream ss;
    save_spectrum(spec, ss);
    detail::write_text(common.output, ss.str(), out);
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"railnoise: suspended-rail vibration transfer and interferometer phase noise"};
    app.fallthrough(true);

    CommonArgs common;
    app.add_option("--config", common.config_path, "configuration file")
        ->envname("RAILNOISE_CONFIG");
    app.add_option("--set", common.overrides,
                   "override a config value, section.key=value (repeatable)");
    app.add_option("--format", common.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("-o,--output", common.output, "output file ('-' for stdout)");

    int n_max = 5;
    auto* modes = app.add_subcommand("modes", "free bending resonances of the rail");
    modes->add_option("--n-max", n_max, "highest mode index")->capture_default_str();

    auto* pendular = app.add_subcommand("pendular", "rigid-body suspension resonances");

    auto* response =
        app.add_subcommand("response", "|a|^2, |b|^2 response to unit motion of one support");

    std::string spectrum_out = "phase_noise.csv";
    std::string summary_out = "phase_noise_summary.json";
    auto* phase_noise =
        app.add_subcommand("phase-noise", "propagate support PSDs to phase noise spectra");
    phase_noise->add_option("--spectrum-out", spectrum_out, "spectrum output file")
        ->capture_default_str();
    phase_noise->add_option("--summary-out", summary_out, "summary output file")
        ->capture_default_str();

    auto* rms = app.add_subcommand("rms-bending", "rms grating-alignment defect");

    VisibilityArgs va;
    auto* vis = app.add_subcommand("visibility", "fringe visibility vs diffraction order");
    vis->add_option("--v-max", va.v_max, "zero-noise visibility for the forward table");
    vis->add_option("--phi1-sq", va.phi1_sq, "<Phi_1^2> [rad^2] for the forward table");
    vis->add_option("--p-max", va.p_max, "highest order in the forward table")
        ->capture_default_str();
    vis->add_option("--data", va.data_path, "CSV of order,visibility[,sigma] to fit");
    vis->add_option("--model-phi1-sq", va.model_phi1_sq,
                    "model <Phi_1^2> to compare against the fit");
    vis->add_option("--summary", va.summary_path,
                    "phase-noise summary JSON supplying the model <Phi_1^2>");

    std::string segments;
    int synth_ppd = 0;
    double extend_to = 0.0;
    auto* synth = app.add_subcommand("synth-noise", "synthesize a piecewise power-law PSD");
    synth->add_option("--segments", segments,
                      "start:end:psd_start:slope[;...] (slope in decades/decade)");
    synth->add_option("--points-per-decade", synth_ppd, "sampling density (default 50)");
    synth->add_option("--extend-to", extend_to, "constant extension up to this frequency [Hz]");

    app.require_subcommand(1);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }

    try {
        if (modes->parsed()) cmd_modes(common, n_max, out);
        if (pendular->parsed()) cmd_pendular(common, out);
        if (response->parsed()) cmd_response(common, out);
        if (phase_noise->parsed()) cmd_phase_noise(common, spectrum_out, summary_out, out);
        if (rms->parsed()) cmd_rms_bending(common, out);
        if (vis->parsed()) cmd_visibility(common, va, out);
        if (synth->parsed()) cmd_synth_noise(common, segments, synth_ppd, extend_to, out);
        return exit_ok;
    } catch (const validation_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const io_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const numeric_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_io;
    }
}

}  // namespace railnoise::cli
