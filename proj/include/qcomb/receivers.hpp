#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "qcomb/comb.hpp"
#include "qcomb/sample.hpp"
#include "qcomb/squeezing.hpp"

namespace qcomb {

enum class StatMethod { ClosedForm, OracleQuadraticForm, MonteCarlo };

inline const char* to_string(StatMethod m) {
    switch (m) {
        case StatMethod::ClosedForm: return "closed-form";
        case StatMethod::OracleQuadraticForm: return "quadratic-form";
        case StatMethod::MonteCarlo: return "monte-carlo";
    }
    return "?";
}

/// One lattice site of the coefficient vector; block matches ModeLattice::Block.
struct ModeKey {
    int block;  // 0 = comb A, 1 = comb B, 2 = environment
    int n;
    int j;

    friend bool operator<(const ModeKey& a, const ModeKey& b) {
        if (a.block != b.block) return a.block < b.block;
        if (a.n != b.n) return a.n < b.n;
        return a.j < b.j;
    }
    friend bool operator==(const ModeKey& a, const ModeKey& b) {
        return a.block == b.block && a.n == b.n && a.j == b.j;
    }
};

/// Coefficients of the linearized photocurrent fluctuation at beat index m,
/// Delta I = sum_k ( c_k a_k + d_k a_k^dag ) over lattice modes k.
///
/// For the division receiver this is Delta I_A + r_m Delta I_B (the numerator
/// of the linearized ratio); for the heterodyne receiver it is Delta d_m.
struct NoiseCoefficients {
    int m = 0;
    ReceiverKind receiver = ReceiverKind::HeterodyneSubtraction;
    int n_half = 0;
    std::map<ModeKey, std::pair<cd, cd>> terms;  // key -> (annihilation, creation)

    cd ratio;                     // division: model ratio r_m
    cd denominator;               // division: A_m B_m^* + A_{-m}^* B_{-m}
    double denominator_half_sq = 0.0;  // |denominator/2|^2

    void add(int block, int n, int j, cd annihilation, cd creation) {
        auto& entry = terms[ModeKey{block, n, j}];
        entry.first += annihilation;
        entry.second += creation;
    }
};

namespace detail {

inline void check_beat_index(const CombSpec& comb_a, const CombSpec& comb_b,
                             const SampleSpec& sample, int m, bool allow_dc) {
    if (comb_a.n_half != comb_b.n_half || comb_a.n_half != sample.n_half)
        throw std::invalid_argument("combs and sample must share n_half");
    if (std::abs(m) > comb_a.n_half)
        throw std::invalid_argument("beat index |m| must be <= n_half");
    if (!allow_dc && m == 0)
        throw std::invalid_argument("beat index m = 0 is the filtered DC component");
}

}  // namespace detail

/// Mean photocurrent spectra (detector A, detector B) at beat frequency m*rep_offset.
///
/// Division receiver: <I_A> = (kappa_m A_m B_m^* + kappa_{-m} A_{-m}^* B_{-m})/2 and
/// <I_B> = -(A_m B_m^* + A_{-m}^* B_{-m})/2; both combs traverse the sample, so the
/// phases cancel and the means carry kappa. Heterodyne: the signal mean alone is
/// attenuated, so the means carry sqrt(kappa) e^{+-i theta}.
inline std::pair<cd, cd> mean_spectrum(ReceiverKind receiver, const CombSpec& comb_a,
                                       const CombSpec& comb_b, const SampleSpec& sample, int m) {
    detail::check_beat_index(comb_a, comb_b, sample, m, true);
    const cd plus = comb_a.amplitude(m) * std::conj(comb_b.amplitude(m));
    const cd minus = std::conj(comb_a.amplitude(-m)) * comb_b.amplitude(-m);
    if (receiver == ReceiverKind::DivisionReceiver) {
        const cd mean_a = 0.5 * (sample.kappa_at(m) * plus + sample.kappa_at(-m) * minus);
        const cd mean_b = -0.5 * (plus + minus);
        return {mean_a, mean_b};
    }
    const cd wp = std::polar(std::sqrt(sample.kappa_at(m)), sample.theta_at(m));
    const cd wm = std::polar(std::sqrt(sample.kappa_at(-m)), -sample.theta_at(-m));
    const cd mean_a = 0.5 * (wp * plus + wm * minus);
    return {mean_a, -mean_a};
}

/// Division-receiver denominator A_m B_m^* + A_{-m}^* B_{-m}.
inline cd ratio_denominator(const CombSpec& comb_a, const CombSpec& comb_b, int m) {
    return comb_a.amplitude(m) * std::conj(comb_b.amplitude(m)) +
           std::conj(comb_a.amplitude(-m)) * comb_b.amplitude(-m);
}

/// Model ratio r_m = -<I_A>/<I_B> = c_+ kappa_m + c_- kappa_{-m}.
inline cd ratio_mean(const CombSpec& comb_a, const CombSpec& comb_b, const SampleSpec& sample,
                     int m) {
    detail::check_beat_index(comb_a, comb_b, sample, m, true);
    const cd den = ratio_denominator(comb_a, comb_b, m);
    if (std::abs(den) == 0.0)
        throw std::invalid_argument("ratio undefined: A_m B_m^* + A_{-m}^* B_{-m} = 0");
    const cd num = sample.kappa_at(m) * comb_a.amplitude(m) * std::conj(comb_b.amplitude(m)) +
                   sample.kappa_at(-m) * std::conj(comb_a.amplitude(-m)) * comb_b.amplitude(-m);
    return num / den;
}

/// Linearized noise-coefficient vector of the receiver's observable at beat index m.
///
/// Heterodyne (Delta d_m): per line n, the LO mean picks up the signal-comb noise
/// sqrt(kappa_n) e^{i theta_n} B_n^* A_{n,m} and the environment
/// sqrt(1-kappa_n) B_n^* V_{n,m}, while the attenuated signal mean beats with the
/// LO noise sqrt(kappa_n) e^{-i theta_n} A_n^* B_{n,n+m}; plus conjugate partners.
///
/// Division (Delta I_A + r_m Delta I_B): self-beat weights (kappa_n + r_m)/2 on each
/// comb's own noise, cross-beat weights (kappa_n - r_m)/2 on the other comb's noise,
/// and sqrt(kappa_n (1-kappa_n)/2) environment couplings.
inline NoiseCoefficients noise_coefficients(ReceiverKind receiver, const CombSpec& comb_a,
                                            const CombSpec& comb_b, const SampleSpec& sample,
                                            int m, std::optional<cd> ratio = std::nullopt) {
    detail::check_beat_index(comb_a, comb_b, sample, m, false);
    const int N = comb_a.n_half;
    NoiseCoefficients nc;
    nc.m = m;
    nc.receiver = receiver;
    nc.n_half = N;

    if (receiver == ReceiverKind::HeterodyneSubtraction) {
        for (int n = -N; n <= N; ++n) {
            const cd an = comb_a.amplitude(n);
            const cd bn = comb_b.amplitude(n);
            const double sk = std::sqrt(sample.kappa_at(n));
            const cd ph = std::polar(1.0, sample.theta_at(n));
            nc.add(ModeLattice::CombB, n, n + m, sk * std::conj(ph) * std::conj(an), 0.0);
            nc.add(ModeLattice::CombB, n, n - m, 0.0, sk * ph * an);
            nc.add(ModeLattice::CombA, n, m, sk * ph * std::conj(bn), 0.0);
            nc.add(ModeLattice::CombA, n, -m, 0.0, sk * std::conj(ph) * bn);
            const double se = std::sqrt(1.0 - sample.kappa_at(n));
            nc.add(ModeLattice::Environment, n, m, se * std::conj(bn), 0.0);
            nc.add(ModeLattice::Environment, n, -m, 0.0, se * bn);
        }
        return nc;
    }

    const cd r = ratio ? *ratio : ratio_mean(comb_a, comb_b, sample, m);
    const cd den = ratio_denominator(comb_a, comb_b, m);
    if (std::abs(den) == 0.0)
        throw std::invalid_argument("ratio undefined: A_m B_m^* + A_{-m}^* B_{-m} = 0");
    nc.ratio = r;
    nc.denominator = den;
    nc.denominator_half_sq = std::norm(den / 2.0);
    for (int n = -N; n <= N; ++n) {
        const cd an = comb_a.amplitude(n);
        const cd bn = comb_b.amplitude(n);
        const double kn = sample.kappa_at(n);
        const cd s = 0.5 * (kn + r);
        const cd t = 0.5 * (kn - r);
        nc.add(ModeLattice::CombA, n, n + m, s * std::conj(an), 0.0);
        nc.add(ModeLattice::CombA, n, n - m, 0.0, s * an);
        nc.add(ModeLattice::CombB, n, m, s * std::conj(bn), 0.0);
        nc.add(ModeLattice::CombB, n, -m, 0.0, s * bn);
        nc.add(ModeLattice::CombB, n, n + m, t * std::conj(an), 0.0);
        nc.add(ModeLattice::CombB, n, n - m, 0.0, t * an);
        nc.add(ModeLattice::CombA, n, m, t * std::conj(bn), 0.0);
        nc.add(ModeLattice::CombA, n, -m, 0.0, t * bn);
        const double e = std::sqrt(kn * (1.0 - kn) / 2.0);
        nc.add(ModeLattice::Environment, n, n + m, e * std::conj(an), 0.0);
        nc.add(ModeLattice::Environment, n, n - m, 0.0, e * an);
        nc.add(ModeLattice::Environment, n, m, e * std::conj(bn), 0.0);
        nc.add(ModeLattice::Environment, n, -m, 0.0, e * bn);
    }
    return nc;
}

/// Strong-LO variant of the heterodyne coefficients: the LO self-noise terms
/// (the only ones that do not scale with B) are dropped, so the variance and
/// |A_m B_m^*|^2 both scale with |B|^2 and the SNR is LO-power free.
inline NoiseCoefficients noise_coefficients_strong_lo(const CombSpec& comb_a,
                                                      const CombSpec& comb_b,
                                                      const SampleSpec& sample, int m) {
    NoiseCoefficients nc =
        noise_coefficients(ReceiverKind::HeterodyneSubtraction, comb_a, comb_b, sample, m);
    for (auto it = nc.terms.begin(); it != nc.terms.end();)
        it = (it->first.block == ModeLattice::CombB) ? nc.terms.erase(it) : std::next(it);
    return nc;
}

/// Exact variance of the linearized observable under the paper-free Gaussian
/// model implied by the pairing structure, in the complex-quadrature convention
/// var X = <(Re dX)^2> + <(Im dX)^2>.
///
/// Modes are visited pair by pair. A pair (1,2) with gain G and coefficients
/// X = c1 a1 + d1 a1^dag + c2 a2 + d2 a2^dag contributes
///   (|c1|^2+|d1|^2+|c2|^2+|d2|^2) G'/2 - (G-1/G)/2 * Re(conj(c1) d2 + conj(c2) d1),
/// an unpaired squeezed mode contributes (|c|^2+|d|^2) G'/2, and an environment
/// mode contributes (|c|^2+|d|^2)(1+2E_n)/2.
inline double variance_exact(const NoiseCoefficients& nc, const SqueezingSpec& sqz_a,
                             const SqueezingSpec& sqz_b, const SampleSpec& sample,
                             ReceiverKind receiver, bool* boundary_pairs = nullptr) {
    if (sqz_a.n_half != nc.n_half || sqz_b.n_half != nc.n_half || sample.n_half != nc.n_half)
        throw std::invalid_argument("variance_exact: inconsistent dimensions");
    if (boundary_pairs) *boundary_pairs = false;

    std::optional<PairingRule> rule_a, rule_b;
    if (!sqz_a.is_classical())
        rule_a = pairing_rule(sqz_a.structure, CombId::A, receiver, nc.n_half);
    if (!sqz_b.is_classical())
        rule_b = pairing_rule(sqz_b.structure, CombId::B, receiver, nc.n_half);

    double total = 0.0;
    std::map<ModeKey, bool> visited;
    for (const auto& [key, cds] : nc.terms) {
        if (visited.count(key)) continue;
        const auto& [c, d] = cds;
        const double self = std::norm(c) + std::norm(d);
        if (key.block == ModeLattice::Environment) {
            total += 0.5 * self * (1.0 + 2.0 * sample.thermal_at(key.n));
            continue;
        }
        const SqueezingSpec& sqz = key.block == ModeLattice::CombA ? sqz_a : sqz_b;
        if (sqz.is_classical()) {
            total += 0.5 * self;  // vacuum
            continue;
        }
        const auto& rule = key.block == ModeLattice::CombA ? *rule_a : *rule_b;
        const double g = sqz.pair_gain(key.n);
        const double g_amp = amplification_noise(g);
        const auto p = rule.partner(key.n, key.j);
        if (!p) {
            if (boundary_pairs) *boundary_pairs = true;
            total += 0.5 * self * g_amp;
            continue;
        }
        const ModeKey pkey{key.block, p->n, p->j};
        cd cp = 0.0, dp = 0.0;
        if (auto it = nc.terms.find(pkey); it != nc.terms.end()) {
            cp = it->second.first;
            dp = it->second.second;
            visited[pkey] = true;
        }
        visited[key] = true;
        const double both = self + std::norm(cp) + std::norm(dp);
        const double corr = (std::conj(c) * dp + std::conj(cp) * d).real();
        total += 0.5 * both * g_amp - 0.5 * (g - 1.0 / g) * corr;
    }
    return total;
}

/// Which squeezing structures each receiver's closed forms cover.
inline void check_protocol(ReceiverKind receiver, const SqueezingSpec& sqz) {
    if (sqz.structure == SqueezingStructure::IntraSelfReferred &&
        receiver == ReceiverKind::HeterodyneSubtraction)
        throw std::invalid_argument(
            "unsupported combination: the heterodyne receiver needs cross-referred intra-line "
            "pairs (the sidebands that beat with the LO are centered on the other comb's lines)");
    if (sqz.structure == SqueezingStructure::IntraCrossReferred &&
        receiver == ReceiverKind::DivisionReceiver)
        throw std::invalid_argument(
            "unsupported combination: the division receiver needs self-referred intra-line "
            "pairs (its self-beating noise is centered on each comb's own lines)");
}

/// Variance of the receiver observable by the analytic pair-by-pair route.
///
/// This is the default reporting path; it evaluates the linearized model
/// exactly, including the finite-lattice corrections where a mode is touched
/// by several beat terms at once, and therefore matches the covariance
/// quadratic form to machine precision. The division + intra-line combination
/// keeps the real-amplitude assumption under which its closed form is derived;
/// complex combs there must go through the oracle path instead.
inline double variance_closed_form(ReceiverKind receiver, const CombSpec& comb_a,
                                   const CombSpec& comb_b, const SqueezingSpec& sqz_a,
                                   const SqueezingSpec& sqz_b, const SampleSpec& sample, int m,
                                   bool* boundary_pairs = nullptr) {
    check_protocol(receiver, sqz_a);
    check_protocol(receiver, sqz_b);
    const bool division_intra =
        receiver == ReceiverKind::DivisionReceiver &&
        (sqz_a.structure == SqueezingStructure::IntraSelfReferred ||
         sqz_b.structure == SqueezingStructure::IntraSelfReferred);
    if (division_intra && !(comb_a.amplitudes_real() && comb_b.amplitudes_real()))
        throw std::invalid_argument(
            "no closed form: division + intra-line squeezing assumes real comb amplitudes");
    const NoiseCoefficients nc = noise_coefficients(receiver, comb_a, comb_b, sample, m);
    const double var = variance_exact(nc, sqz_a, sqz_b, sample, receiver, boundary_pairs);
    if (receiver == ReceiverKind::DivisionReceiver) return var / nc.denominator_half_sq;
    return var;
}

/// Per-beat statistics of one receiver observable.
struct PhotocurrentStats {
    int m = 0;
    ReceiverKind receiver = ReceiverKind::HeterodyneSubtraction;
    cd mean;               // r_m (division) or <d_m> (heterodyne)
    double variance = 0.0;
    StatMethod method = StatMethod::ClosedForm;
    double kappa_line = 1.0;         // kappa_m, used by the division local SNR
    double signal_product_sq = 0.0;  // |A_m B_m^*|^2, used by the heterodyne local SNR
    bool strong_lo = false;
    bool boundary_pairs = false;
};

/// Division-receiver ratio statistics: mean r_m and
/// var(r_m) = var(Delta I_A + r_m Delta I_B) / |(A_m B_m^* + A_{-m}^* B_{-m})/2|^2.
inline PhotocurrentStats ratio_statistics(const CombSpec& comb_a, const CombSpec& comb_b,
                                          const SqueezingSpec& sqz_a, const SqueezingSpec& sqz_b,
                                          const SampleSpec& sample, int m) {
    PhotocurrentStats stats;
    stats.m = m;
    stats.receiver = ReceiverKind::DivisionReceiver;
    stats.mean = ratio_mean(comb_a, comb_b, sample, m);
    stats.kappa_line = sample.kappa_at(m);
    stats.signal_product_sq = std::norm(comb_a.amplitude(m) * std::conj(comb_b.amplitude(m)));
    stats.variance = variance_closed_form(ReceiverKind::DivisionReceiver, comb_a, comb_b, sqz_a,
                                          sqz_b, sample, m, &stats.boundary_pairs);
    return stats;
}

/// Heterodyne subtraction statistics: mean <d_m> and var(d_m). With
/// `strong_lo` the LO self-noise is dropped (the |B_n| -> infinity limit; the
/// reported variance then scales with the LO direction amplitudes, as does
/// |A_m B_m^*|^2, leaving the SNR well defined).
inline PhotocurrentStats differential_statistics(const CombSpec& comb_a, const CombSpec& comb_b,
                                                 const SqueezingSpec& sqz_a,
                                                 const SqueezingSpec& sqz_b,
                                                 const SampleSpec& sample, int m,
                                                 bool strong_lo = false) {
    check_protocol(ReceiverKind::HeterodyneSubtraction, sqz_a);
    check_protocol(ReceiverKind::HeterodyneSubtraction, sqz_b);
    PhotocurrentStats stats;
    stats.m = m;
    stats.receiver = ReceiverKind::HeterodyneSubtraction;
    stats.strong_lo = strong_lo;
    const auto means =
        mean_spectrum(ReceiverKind::HeterodyneSubtraction, comb_a, comb_b, sample, m);
    stats.mean = means.first - means.second;  // d_m = I_A - I_B
    stats.kappa_line = sample.kappa_at(m);
    stats.signal_product_sq = std::norm(comb_a.amplitude(m) * std::conj(comb_b.amplitude(m)));
    const NoiseCoefficients nc =
        strong_lo ? noise_coefficients_strong_lo(comb_a, comb_b, sample, m)
                  : noise_coefficients(ReceiverKind::HeterodyneSubtraction, comb_a, comb_b,
                                       sample, m);
    stats.variance = variance_exact(nc, sqz_a, sqz_b, sample,
                                    ReceiverKind::HeterodyneSubtraction, &stats.boundary_pairs);
    return stats;
}

enum class Processing { Ratio, Subtraction };

/// Dispatch on (topology, data processing). The two unproductive combinations
/// are rejected: dividing heterodyne spectra gives the constant -<I_A>/<I_B> = 1
/// with no dependence on the sample, and subtracting the division receiver's
/// spectra mixes the informative arm with a reference arm whose mean carries no
/// sample dependence, adding loss without the ratio's self-calibration.
inline PhotocurrentStats photocurrent_statistics(ReceiverKind receiver, Processing processing,
                                                 const CombSpec& comb_a, const CombSpec& comb_b,
                                                 const SqueezingSpec& sqz_a,
                                                 const SqueezingSpec& sqz_b,
                                                 const SampleSpec& sample, int m) {
    if (receiver == ReceiverKind::HeterodyneSubtraction && processing == Processing::Ratio)
        throw std::invalid_argument(
            "rejected: the ratio of the pass-then-combine spectra is the constant -1 at leading "
            "order and carries no absorption information; use subtraction processing");
    if (receiver == ReceiverKind::DivisionReceiver && processing == Processing::Subtraction)
        throw std::invalid_argument(
            "rejected: in the combine-then-pass topology the reference arm's mean is "
            "sample-independent, so subtraction only adds loss and loses the ratio's "
            "self-calibration; use ratio processing");
    if (receiver == ReceiverKind::DivisionReceiver)
        return ratio_statistics(comb_a, comb_b, sqz_a, sqz_b, sample, m);
    return differential_statistics(comb_a, comb_b, sqz_a, sqz_b, sample, m);
}

// ---------------------------------------------------------------------------
// Reference evaluations of the four per-line variance formulas, written in
// their generic-line form. They ignore the O(1/M) corrections at the handful
// of lines where several beat terms touch one lattice mode (the carrier line
// and the lines at twice the beat index), which the exact path includes; see
// tests/test_receivers.cpp for the measured difference.
// ---------------------------------------------------------------------------

inline double printed_variance_division_intra(const CombSpec& comb_a, const CombSpec& comb_b,
                                              const SqueezingSpec& sqz_a,
                                              const SqueezingSpec& sqz_b,
                                              const SampleSpec& sample, int m) {
    const double r = ratio_mean(comb_a, comb_b, sample, m).real();
    double num = 0.0;
    for (int n = -comb_a.n_half; n <= comb_a.n_half; ++n) {
        const double a2 = std::norm(comb_a.amplitude(n));
        const double b2 = std::norm(comb_b.amplitude(n));
        const double kn = sample.kappa_at(n);
        const double ga = sqz_a.gain(n), gb = sqz_b.gain(n);
        num += (kn + r) * (kn + r) * (a2 / ga + b2 / gb) +
               (kn - r) * (kn - r) *
                   (a2 * amplification_noise(gb) + b2 * amplification_noise(ga)) +
               2.0 * kn * (1.0 - kn) * (a2 + b2) * (1.0 + 2.0 * sample.thermal_at(n));
    }
    return num / std::norm(ratio_denominator(comb_a, comb_b, m));
}

inline double printed_variance_division_cross(const CombSpec& comb_a, const CombSpec& comb_b,
                                              const SqueezingSpec& sqz_a,
                                              const SqueezingSpec& sqz_b,
                                              const SampleSpec& sample, int m) {
    const double r = ratio_mean(comb_a, comb_b, sample, m).real();
    double num = 0.0;
    for (int n = -comb_a.n_half; n <= comb_a.n_half; ++n) {
        const double a2 = std::norm(comb_a.amplitude(n));
        const double b2 = std::norm(comb_b.amplitude(n));
        const double kp = 0.5 * (sample.kappa_at(n) + sample.kappa_at(-n));
        const double km = 0.5 * (sample.kappa_at(n) - sample.kappa_at(-n));
        const double ga = sqz_a.pair_gain(n), gb = sqz_b.pair_gain(n);
        num += (kp + r) * (kp + r) * (a2 / ga + b2 / gb) +
               (kp - r) * (kp - r) * (a2 / gb + b2 / ga) +
               km * km * (a2 + b2) * (ga + gb) +
               2.0 * sample.kappa_at(n) * (1.0 - sample.kappa_at(n)) * (a2 + b2) *
                   (1.0 + 2.0 * sample.thermal_at(n));
    }
    return num / std::norm(ratio_denominator(comb_a, comb_b, m));
}

inline double printed_variance_heterodyne_intra(const CombSpec& comb_a, const CombSpec& comb_b,
                                                const SqueezingSpec& sqz_a,
                                                const SqueezingSpec& sqz_b,
                                                const SampleSpec& sample) {
    double var = 0.0;
    for (int n = -comb_a.n_half; n <= comb_a.n_half; ++n) {
        const double a2 = std::norm(comb_a.amplitude(n));
        const double b2 = std::norm(comb_b.amplitude(n));
        const double kn = sample.kappa_at(n);
        const double th = sample.theta_at(n);
        var += kn * a2 * rotated_pair_variance(sqz_b.gain(n), th) +
               kn * b2 * rotated_pair_variance(sqz_a.gain(n), th) +
               (1.0 - kn) * b2 * (1.0 + 2.0 * sample.thermal_at(n));
    }
    return var;
}

inline double printed_variance_heterodyne_cross(const CombSpec& comb_a, const CombSpec& comb_b,
                                                const SqueezingSpec& sqz_a,
                                                const SqueezingSpec& sqz_b,
                                                const SampleSpec& sample) {
    const int N = comb_a.n_half;
    const double k0 = sample.kappa_at(0);
    double var = k0 * std::norm(comb_a.amplitude(0)) *
                     rotated_pair_variance(sqz_b.gain(0), sample.theta_at(0)) +
                 k0 * std::norm(comb_b.amplitude(0)) *
                     rotated_pair_variance(sqz_a.gain(0), sample.theta_at(0));
    for (int n = -N; n <= N; ++n)
        var += (1.0 - sample.kappa_at(n)) * std::norm(comb_b.amplitude(n)) *
               (1.0 + 2.0 * sample.thermal_at(n));
    for (int n = 1; n <= N; ++n) {
        const double skp = std::sqrt(sample.kappa_at(n));
        const double skm = std::sqrt(sample.kappa_at(-n));
        const cd php = std::polar(1.0, sample.theta_at(n));
        const cd phm = std::polar(1.0, sample.theta_at(-n));
        const cd ca = skp * std::conj(comb_a.amplitude(n)) * std::conj(php);
        const cd da = skm * comb_a.amplitude(-n) * phm;
        const cd cb = skp * std::conj(comb_b.amplitude(n)) * php;
        const cd db = skm * comb_b.amplitude(-n) * std::conj(phm);
        var += 0.5 * (std::norm(ca - da) * sqz_b.pair_gain(n) +
                      std::norm(ca + da) / sqz_b.pair_gain(n));
        var += 0.5 * (std::norm(cb - db) * sqz_a.pair_gain(n) +
                      std::norm(cb + db) / sqz_a.pair_gain(n));
    }
    return var;
}

}  // namespace qcomb
