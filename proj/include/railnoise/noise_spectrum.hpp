#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "railnoise/errors.hpp"

namespace railnoise {

// ---------------------------------------------------------------------------
// One-sided support-motion PSD, in m^2/Hz over positive frequencies.
// Integrals over the band are taken over positive nu only; mixing in a
// two-sided convention would silently halve every result.
// ---------------------------------------------------------------------------

struct PsdSample {
    double nu = 0.0;   ///< [Hz]
    double psd = 0.0;  ///< [m^2/Hz]
};

struct NoiseSpectrum {
    std::vector<PsdSample> samples;  ///< strictly increasing nu, at least 2 entries

    /// Optional constant-value extension band: the spectrum is taken equal to
    /// the last sample's PSD for nu in [nu_from, nu_to].
    struct Extension {
        double nu_from = 0.0;
        double nu_to = 0.0;
    };
    std::optional<Extension> extension;

    void validate() const {
        if (samples.size() < 2)
            throw validation_error("noise spectrum needs at least 2 samples");
        double prev = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            if (!(s.nu > 0.0) || !std::isfinite(s.nu))
                throw validation_error("noise spectrum frequency must be positive (sample " +
                                       std::to_string(i) + ")");
            if (s.nu <= prev)
                throw validation_error(
                    "noise spectrum frequencies must be strictly increasing (sample " +
                    std::to_string(i) + ")");
            if (s.psd < 0.0 || !std::isfinite(s.psd))
                throw validation_error("noise spectrum PSD must be finite and >= 0 (sample " +
                                       std::to_string(i) + ")");
            prev = s.nu;
        }
        if (extension) {
            if (extension->nu_from < samples.back().nu * (1.0 - 1e-12))
                throw validation_error("extension must start at or after the last sample");
            if (!(extension->nu_to > extension->nu_from))
                throw validation_error("extension end must exceed its start");
        }
    }

    double nu_min() const { return samples.front().nu; }
    double nu_max() const { return extension ? extension->nu_to : samples.back().nu; }
};

// ---------------------------------------------------------------------------
// CSV I/O. Two numeric columns `freq_hz,psd_m2_per_hz`, '#' comment lines,
// optional header row. Data rows are counted from 0 in error messages.
// An extension is carried in a structured comment:
//   # extension: constant <nu_from> <nu_to>
// ---------------------------------------------------------------------------

namespace detail {

inline bool parse_double(const std::string& text, double& out) {
    const char* begin = text.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline NoiseSpectrum load_spectrum(std::istream& in) {
    NoiseSpectrum spec;
    std::string line;
    long data_row = -1;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            std::istringstream cs(t.substr(1));
            std::string tag, mode;
            double nf = 0.0, nt = 0.0;
            if (cs >> tag >> mode >> nf >> nt && tag == "extension:" && mode == "constant")
                spec.extension = NoiseSpectrum::Extension{nf, nt};
            continue;
        }
        const auto comma = t.find(',');
        if (comma == std::string::npos)
            throw validation_error("spectrum CSV: missing comma at data row " +
                                   std::to_string(data_row + 1));
        double nu = 0.0, psd = 0.0;
        const bool ok = detail::parse_double(detail::trim(t.substr(0, comma)), nu) &&
                        detail::parse_double(detail::trim(t.substr(comma + 1)), psd);
        if (!ok) {
            if (header_allowed && data_row < 0) {
                header_allowed = false;  // one non-numeric row tolerated as header
                continue;
            }
            throw validation_error("spectrum CSV: malformed data row " +
                                   std::to_string(data_row + 1));
        }
        header_allowed = false;
        ++data_row;
        if (!spec.samples.empty()) {
            if (nu == spec.samples.back().nu)
                throw validation_error("spectrum CSV: duplicate frequency at data row " +
                                       std::to_string(data_row));
            if (nu < spec.samples.back().nu)
                throw validation_error("spectrum CSV: frequencies not increasing at data row " +
                                       std::to_string(data_row));
        }
        spec.samples.push_back({nu, psd});
    }
    spec.validate();
    return spec;
}

/// Serialize with 17 significant digits so that load(save(s)) is bit-exact.
inline void save_spectrum(const NoiseSpectrum& spec, std::ostream& out) {
    spec.validate();
    out << "freq_hz,psd_m2_per_hz\n";
    if (spec.extension) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "# extension: constant %.17g %.17g\n",
                      spec.extension->nu_from, spec.extension->nu_to);
        out << buf;
    }
    for (const auto& s : spec.samples) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.nu, s.psd);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Sampling: log-log linear interpolation between samples (seismic spectra
// span decades), linear fallback on segments touching a zero PSD, constant
// value over a declared extension band.
// ---------------------------------------------------------------------------

inline double sample_psd(const NoiseSpectrum& spec, double nu) {
    const auto& s = spec.samples;
    if (s.size() < 2) throw validation_error("sample_psd: spectrum not initialized");
    if (nu < s.front().nu * (1.0 - 1e-12))
        throw validation_error("sample_psd: nu below the covered range");
    if (nu <= s.front().nu) return s.front().psd;
    if (nu >= s.back().nu) {
        if (nu <= s.back().nu * (1.0 + 1e-12)) return s.back().psd;
        if (spec.extension && nu <= spec.extension->nu_to * (1.0 + 1e-12))
            return s.back().psd;
        throw validation_error("sample_psd: nu above the covered range");
    }
    const auto it = std::upper_bound(s.begin(), s.end(), nu,
                                     [](double v, const PsdSample& p) { return v < p.nu; });
    const PsdSample& hi = *it;
    const PsdSample& lo = *(it - 1);
    if (lo.psd > 0.0 && hi.psd > 0.0) {
        const double t = std::log(nu / lo.nu) / std::log(hi.nu / lo.nu);
        return lo.psd * std::pow(hi.psd / lo.psd, t);
    }
    const double t = (nu - lo.nu) / (hi.nu - lo.nu);
    return lo.psd + t * (hi.psd - lo.psd);
}

// ---------------------------------------------------------------------------
// Synthesis of piecewise power-law spectra.
// ---------------------------------------------------------------------------

/// One contiguous power-law piece: psd(nu) = psd_start * (nu/nu_start)^slope,
/// slope in decades of PSD per decade of frequency.
struct PowerLawSegment {
    double nu_start = 0.0;
    double nu_end = 0.0;
    double psd_start = 0.0;
    double slope = 0.0;
};

inline NoiseSpectrum synth_spectrum(const std::vector<PowerLawSegment>& segments,
                                    int points_per_decade = 50,
                                    std::optional<double> extend_to = std::nullopt) {
    if (segments.empty()) throw validation_error("synth_spectrum: no segments");
    if (points_per_decade < 1)
        throw validation_error("synth_spectrum: points_per_decade must be >= 1");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& g = segments[i];
        if (!(g.nu_start > 0.0) || !(g.nu_end > g.nu_start))
            throw validation_error("synth_spectrum: segment " + std::to_string(i) +
                                   " has a bad frequency range");
        if (!(g.psd_start >= 0.0))
            throw validation_error("synth_spectrum: segment " + std::to_string(i) +
                                   " has a negative start PSD");
        if (i > 0) {
            const double prev_end = segments[i - 1].nu_end;
            if (std::abs(g.nu_start - prev_end) > 1e-9 * prev_end)
                throw validation_error("synth_spectrum: segments " + std::to_string(i - 1) +
                                       " and " + std::to_string(i) + " overlap or leave a gap");
        }
    }

    NoiseSpectrum spec;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& g = segments[i];
        const double decades = std::log10(g.nu_end / g.nu_start);
        const int n = std::max(1, static_cast<int>(std::ceil(decades * points_per_decade)));
        const int k0 = (i == 0) ? 0 : 1;  // segment joints emitted once
        for (int k = k0; k <= n; ++k) {
            const double f = static_cast<double>(k) / n;
            const double nu = g.nu_start * std::pow(g.nu_end / g.nu_start, f);
            const double psd = g.psd_start * std::pow(nu / g.nu_start, g.slope);
            spec.samples.push_back({nu, psd});
        }
    }
    if (extend_to) {
        const double last = spec.samples.back().nu;
        if (!(*extend_to > last))
            throw validation_error("synth_spectrum: extension must exceed the last frequency");
        spec.extension = NoiseSpectrum::Extension{last, *extend_to};
    }
    spec.validate();
    return spec;
}

}  // namespace railnoise
