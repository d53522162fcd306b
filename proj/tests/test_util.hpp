#pragma once

#include <cmath>
#include <cstdint>
#include <complex>

#include "railnoise/beam.hpp"
#include "railnoise/suspension.hpp"

namespace testutil {

/// Small deterministic generator (splitmix64) so random-draw tests are
/// reproducible across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// log-uniform in [lo, hi], lo > 0
    double log_uniform(double lo, double hi) {
        return lo * std::pow(hi / lo, uniform());
    }

    std::complex<double> complex_unit_box() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

    double uniform_signed() { return uniform(-1.0, 1.0); }

private:
    std::uint64_t state_;
};

inline railnoise::RailSpec random_rail(Rng& rng) {
    railnoise::RailSpec rail;
    rail.material.young_modulus = rng.log_uniform(5e9, 4e11);
    rail.material.density = rng.log_uniform(5e2, 2e4);
    rail.section.area = rng.log_uniform(1e-4, 5e-2);
    rail.section.second_moment_y = rng.log_uniform(1e-8, 1e-4);
    rail.half_length = rng.uniform(0.25, 1.5);
    return rail;
}

inline railnoise::SuspensionSpec symmetric_suspension(double k, double mu,
                                                      double mass = 0.0) {
    railnoise::SuspensionSpec s;
    s.minus_end = {k, mu};
    s.plus_end = {k, mu};
    if (mass > 0.0) s.mass_override = mass;
    return s;
}

/// The rail whose parameters the shipped profiles use.
inline railnoise::RailSpec bench_rail() {
    return {{72.4e9, 2790.0}, {1.49e-2, 3.3e-5, {}}, 0.7};
}

/// Same geometry with the stiffness rescaled so the first bending resonance
/// sits at the measured 460.4 Hz.
inline railnoise::RailSpec bench_rail_measured() {
    return {{8.0902e10, 2790.0}, {1.49e-2, 3.3e-5, {}}, 0.7};
}

}  // namespace testutil
