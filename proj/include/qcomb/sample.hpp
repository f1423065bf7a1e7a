#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "qcomb/comb.hpp"
#include "qcomb/constants.hpp"

namespace qcomb {

/// Per-line phase-loss channel of the probed sample.
///
/// Line n is attenuated by transmissivity kappa_n, phase shifted by theta_n,
/// and mixed with an environment of mean thermal photon number thermal_n:
/// a -> sqrt(kappa) e^{i theta} a + sqrt(1-kappa) v.
struct SampleSpec {
    int n_half = 0;
    std::vector<double> kappa;
    std::vector<double> theta;
    std::vector<double> thermal;

    SampleSpec(int n_half_, std::vector<double> kappa_, std::vector<double> theta_,
               std::vector<double> thermal_)
        : n_half(n_half_), kappa(std::move(kappa_)), theta(std::move(theta_)),
          thermal(std::move(thermal_)) {
        const size_t m = static_cast<size_t>(2 * n_half + 1);
        if (n_half < 0) throw std::invalid_argument("SampleSpec: n_half must be >= 0");
        if (kappa.size() != m || theta.size() != m || thermal.size() != m)
            throw std::invalid_argument("SampleSpec: arrays must span 2*n_half+1 lines");
        for (double k : kappa)
            if (k < 0.0 || k > 1.0)
                throw std::invalid_argument("SampleSpec: kappa must lie in [0, 1]");
        for (double e : thermal)
            if (e < 0.0) throw std::invalid_argument("SampleSpec: thermal occupation must be >= 0");
    }

    static SampleSpec transparent(int n_half) {
        const size_t m = static_cast<size_t>(2 * n_half + 1);
        return SampleSpec(n_half, std::vector<double>(m, 1.0), std::vector<double>(m, 0.0),
                          std::vector<double>(m, 0.0));
    }

    double kappa_at(int n) const { return kappa[static_cast<size_t>(n + n_half)]; }
    double theta_at(int n) const { return theta[static_cast<size_t>(n + n_half)]; }
    double thermal_at(int n) const { return thermal[static_cast<size_t>(n + n_half)]; }

    void set_line(int n, double kappa_n, double theta_n) {
        kappa[static_cast<size_t>(n + n_half)] = kappa_n;
        theta[static_cast<size_t>(n + n_half)] = theta_n;
    }

    void set_uniform_thermal(double occupation) {
        for (double& e : thermal) e = occupation;
    }
};

/// Bose-Einstein occupation 1/(exp(hbar*carrier/(kB*t)) - 1) of the environment.
inline double thermal_occupation(double carrier, double temperature) {
    if (carrier <= 0.0) throw std::invalid_argument("thermal_occupation: carrier must be > 0");
    if (temperature <= 0.0)
        throw std::invalid_argument("thermal_occupation: temperature must be > 0");
    return 1.0 / std::expm1(photon_energy(carrier) / (constants::boltzmann * temperature));
}

/// Transparent background with one absorbing/phase-shifting line at index `line`.
inline SampleSpec single_line_sample(int n_half, int line, double kappa, double theta = 0.0) {
    if (std::abs(line) > n_half)
        throw std::invalid_argument("single_line_sample: |line| must be <= n_half");
    if (kappa < 0.0 || kappa > 1.0)
        throw std::invalid_argument("single_line_sample: kappa must lie in [0, 1]");
    SampleSpec spec = SampleSpec::transparent(n_half);
    spec.set_line(line, kappa, theta);
    return spec;
}

/// Uniform phase-uncertainty half-width delta applied across all lines.
struct PhaseNoiseSpec {
    double bound = 0.0;  // rad

    explicit PhaseNoiseSpec(double bound_) : bound(bound_) {
        if (bound < 0.0) throw std::invalid_argument("PhaseNoiseSpec: bound must be >= 0");
    }

    /// The closed forms assume delta << 1; callers should warn beyond this.
    bool small_angle() const { return bound <= 0.3; }
};

/// One frozen draw of i.i.d. uniform phases on [-bound, bound], reproducible by seed.
inline std::vector<double> sample_phase_draw(const PhaseNoiseSpec& spec, int n_half,
                                             uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-spec.bound, spec.bound);
    std::vector<double> draw(static_cast<size_t>(2 * n_half + 1));
    if (spec.bound == 0.0) return draw;
    for (double& t : draw) t = dist(rng);
    return draw;
}

/// Mean-field output of the phase-loss channel: line n maps to sqrt(kappa_n) e^{i theta_n} X_n.
inline std::vector<cd> mean_field_after_sample(const CombSpec& comb, const SampleSpec& sample) {
    if (sample.n_half != comb.n_half)
        throw std::invalid_argument("mean_field_after_sample: comb/sample size mismatch");
    std::vector<cd> out(comb.line_amplitudes.size());
    for (int n = -comb.n_half; n <= comb.n_half; ++n) {
        const cd phase = std::polar(std::sqrt(sample.kappa_at(n)), sample.theta_at(n));
        out[static_cast<size_t>(n + comb.n_half)] = phase * comb.amplitude(n);
    }
    return out;
}

}  // namespace qcomb
