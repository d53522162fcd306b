#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "railnoise/beam.hpp"
#include "railnoise/errors.hpp"
#include "railnoise/noise_spectrum.hpp"
#include "railnoise/phase_noise.hpp"
#include "railnoise/suspension.hpp"

namespace railnoise {

// ---------------------------------------------------------------------------
// Plain-text configuration: INI-style sections of key = value pairs,
// '#' or ';' comments. Keys carry unit suffixes; see the shipped profiles.
// ---------------------------------------------------------------------------

/// Raw section.key -> value map, before validation. Kept separate so that
/// command-line overrides can be applied between parse and build.
struct RawConfig {
    std::map<std::string, std::string> values;
    std::filesystem::path base_dir;  ///< directory of the config file, for relative paths

    void set(const std::string& dotted_key, const std::string& value) {
        values[dotted_key] = value;
    }
};

namespace detail {

inline RawConfig parse_raw_config(std::istream& in, const std::filesystem::path& base_dir) {
    RawConfig raw;
    raw.base_dir = base_dir;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw validation_error("config line " + std::to_string(line_no) +
                                       ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw validation_error("config line " + std::to_string(line_no) +
                                       ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw validation_error("config line " + std::to_string(line_no) +
                                   ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        const auto hash = value.find(" #");
        if (hash != std::string::npos) value = trim(value.substr(0, hash));
        if (key.empty())
            throw validation_error("config line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw validation_error("config line " + std::to_string(line_no) +
                                   ": key outside any [section]");
        raw.values[section + "." + key] = value;
    }
    return raw;
}

class ConfigReader {
public:
    explicit ConfigReader(const RawConfig& raw) : raw_(raw) {}

    std::optional<std::string> get(const std::string& key) {
        used_.insert(key);
        const auto it = raw_.values.find(key);
        if (it == raw_.values.end()) return std::nullopt;
        return it->second;
    }

    std::string require(const std::string& key) {
        auto v = get(key);
        if (!v) throw validation_error("config: missing required key '" + key + "'");
        return *v;
    }

    double require_number(const std::string& key) {
        const std::string v = require(key);
        double out = 0.0;
        if (!parse_double(v, out))
            throw validation_error("config: key '" + key + "' is not a number: '" + v + "'");
        return out;
    }

    std::optional<double> number(const std::string& key) {
        auto v = get(key);
        if (!v) return std::nullopt;
        double out = 0.0;
        if (!parse_double(*v, out))
            throw validation_error("config: key '" + key + "' is not a number: '" + *v + "'");
        return out;
    }

    std::optional<long> integer(const std::string& key) {
        auto v = number(key);
        if (!v) return std::nullopt;
        if (*v != std::floor(*v))
            throw validation_error("config: key '" + key + "' must be an integer");
        return static_cast<long>(*v);
    }

    std::optional<bool> boolean(const std::string& key) {
        auto v = get(key);
        if (!v) return std::nullopt;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw validation_error("config: key '" + key + "' must be a boolean, got '" + *v + "'");
    }

    /// Reject unknown keys so that typos fail loudly, with the field path.
    void finish() const {
        for (const auto& [k, v] : raw_.values)
            if (!used_.contains(k))
                throw validation_error("config: unknown key '" + k + "'");
    }

private:
    const RawConfig& raw_;
    std::set<std::string> used_;
};

/// Segment list syntax:  start:end:psd_start:slope [; more segments]
inline std::vector<PowerLawSegment> parse_synth_segments(const std::string& text) {
    std::vector<PowerLawSegment> segments;
    std::istringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ';')) {
        piece = trim(piece);
        if (piece.empty()) continue;
        double f[4];
        int i = 0;
        std::istringstream ps(piece);
        std::string field;
        while (std::getline(ps, field, ':')) {
            if (i >= 4 || !parse_double(trim(field), f[i]))
                throw validation_error("bad synth segment '" + piece +
                                       "' (want start:end:psd_start:slope)");
            ++i;
        }
        if (i != 4)
            throw validation_error("bad synth segment '" + piece +
                                   "' (want start:end:psd_start:slope)");
        segments.push_back({f[0], f[1], f[2], f[3]});
    }
    if (segments.empty()) throw validation_error("synth spec has no segments");
    return segments;
}

}  // namespace detail

struct NoiseConfig {
    std::optional<std::filesystem::path> file_minus;
    std::optional<std::filesystem::path> file_plus;
    std::optional<std::vector<PowerLawSegment>> synth_segments;
    std::optional<double> synth_extend_to;
    int synth_points_per_decade = 50;

    bool configured() const { return file_minus.has_value() || synth_segments.has_value(); }
};

struct Config {
    RailSpec rail;
    SuspensionSpec suspension;
    std::optional<InterferometerSpec> interferometer;
    NoiseConfig noise;
    Band band;
    GridSpec grid;

    const InterferometerSpec& require_interferometer() const {
        if (!interferometer)
            throw validation_error("config: missing [interferometer] section");
        return *interferometer;
    }
};

inline Config build_config(const RawConfig& raw) {
    detail::ConfigReader r(raw);
    Config cfg;

    cfg.rail.material.young_modulus = r.require_number("rail.young_modulus_pa");
    cfg.rail.material.density = r.require_number("rail.density_kg_m3");
    cfg.rail.section.area = r.require_number("rail.area_m2");
    cfg.rail.section.second_moment_y = r.require_number("rail.second_moment_y_m4");
    cfg.rail.section.max_extent = r.number("rail.max_extent_m");
    cfg.rail.half_length = r.require_number("rail.half_length_m");
    cfg.rail.validate();

    const auto shared_k = r.number("suspension.stiffness_n_m");
    const auto shared_mu = r.number("suspension.damping_kg_s");
    cfg.suspension.minus_end.stiffness =
        r.number("suspension.stiffness_minus_n_m").value_or(shared_k.value_or(0.0));
    cfg.suspension.plus_end.stiffness =
        r.number("suspension.stiffness_plus_n_m").value_or(shared_k.value_or(0.0));
    cfg.suspension.minus_end.damping =
        r.number("suspension.damping_minus_kg_s").value_or(shared_mu.value_or(0.0));
    cfg.suspension.plus_end.damping =
        r.number("suspension.damping_plus_kg_s").value_or(shared_mu.value_or(0.0));
    cfg.suspension.mass_override = r.number("suspension.mass_kg");
    cfg.suspension.validate();

    if (r.get("interferometer.grating_wavevector_rad_m")) {
        InterferometerSpec ifs;
        ifs.grating_wavevector = r.require_number("interferometer.grating_wavevector_rad_m");
        ifs.inter_grating_distance =
            r.require_number("interferometer.inter_grating_distance_m");
        ifs.atom_velocity = r.require_number("interferometer.atom_velocity_m_s");
        ifs.diffraction_order =
            static_cast<int>(r.integer("interferometer.diffraction_order").value_or(1));
        ifs.optical_grating_wavevector =
            r.number("interferometer.optical_grating_wavevector_rad_m");
        ifs.validate(cfg.rail);
        cfg.interferometer = ifs;
    }

    if (auto f = r.get("noise.file")) {
        cfg.noise.file_minus = raw.base_dir / *f;
        cfg.noise.file_plus = raw.base_dir / *f;
    }
    if (auto f = r.get("noise.file_minus")) cfg.noise.file_minus = raw.base_dir / *f;
    if (auto f = r.get("noise.file_plus")) cfg.noise.file_plus = raw.base_dir / *f;
    if (auto s = r.get("noise.synth")) cfg.noise.synth_segments = detail::parse_synth_segments(*s);
    cfg.noise.synth_extend_to = r.number("noise.synth_extend_to_hz");
    cfg.noise.synth_points_per_decade =
        static_cast<int>(r.integer("noise.synth_points_per_decade").value_or(50));
    if (cfg.noise.file_minus.has_value() != cfg.noise.file_plus.has_value())
        throw validation_error("config: noise.file_minus and noise.file_plus must come together");

    cfg.band.nu_min = r.number("band.nu_min_hz").value_or(2.0);
    cfg.band.nu_max = r.number("band.nu_max_hz").value_or(1000.0);
    if (!(cfg.band.nu_max > cfg.band.nu_min) || !(cfg.band.nu_min > 0.0))
        throw validation_error("config: band.nu_min_hz/nu_max_hz must satisfy 0 < min < max");

    cfg.grid.points_per_decade =
        static_cast<int>(r.integer("grid.points_per_decade").value_or(741));
    cfg.grid.resonance_densify =
        static_cast<int>(r.integer("grid.resonance_densify").value_or(10));
    cfg.grid.densify_halfwidths = r.number("grid.densify_halfwidths").value_or(5.0);
    cfg.grid.allow_low_band = r.boolean("grid.allow_low_band").value_or(false);
    if (cfg.grid.points_per_decade < 2 || cfg.grid.resonance_densify < 1)
        throw validation_error("config: grid densities must be positive");

    r.finish();
    return cfg;
}

inline RawConfig load_raw_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path.string());
    return detail::parse_raw_config(in, path.parent_path());
}

inline Config load_config(const std::filesystem::path& path) {
    return build_config(load_raw_config(path));
}

/// Resolve the configured noise inputs into per-end spectra.
struct NoisePair {
    NoiseSpectrum minus_end;
    NoiseSpectrum plus_end;
};

inline NoiseSpectrum load_spectrum_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open noise spectrum file: " + path.string());
    return load_spectrum(in);
}

inline NoisePair resolve_noise(const NoiseConfig& noise) {
    if (noise.synth_segments) {
        NoiseSpectrum s = synth_spectrum(*noise.synth_segments, noise.synth_points_per_decade,
                                         noise.synth_extend_to);
        return {s, s};
    }
    if (noise.file_minus && noise.file_plus)
        return {load_spectrum_file(*noise.file_minus), load_spectrum_file(*noise.file_plus)};
    throw validation_error("config: [noise] section configures neither files nor synth law");
}

}  // namespace railnoise
