#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "qcomb/comb.hpp"
#include "qcomb/receivers.hpp"
#include "qcomb/sample.hpp"
#include "qcomb/squeezing.hpp"

namespace qcomb {

struct Protocol {
    ReceiverKind receiver = ReceiverKind::HeterodyneSubtraction;
    SqueezingStructure structure = SqueezingStructure::Classical;

    std::string name() const {
        return std::string(to_string(receiver)) + "+" + to_string(structure);
    }
};

/// Receiver-appropriate intra-line variant.
inline SqueezingStructure intra_structure(ReceiverKind receiver) {
    return receiver == ReceiverKind::DivisionReceiver ? SqueezingStructure::IntraSelfReferred
                                                      : SqueezingStructure::IntraCrossReferred;
}

/// Fisher-information SNR^2 for estimating sqrt(kappa_m):
/// division kappa_m / var(r_m); heterodyne |A_m B_m^*|^2 / var(d_m).
inline double local_snr(const PhotocurrentStats& stats) {
    if (stats.variance <= 0.0) throw std::invalid_argument("local_snr: variance must be > 0");
    if (stats.receiver == ReceiverKind::DivisionReceiver)
        return stats.kappa_line / stats.variance;
    return stats.signal_product_sq / stats.variance;
}

/// Finite-difference SNR^2 discriminating kappa from the transparent case:
/// |mean(kappa) - mean(kappa=1)|^2 / var(kappa).
inline double global_snr(const PhotocurrentStats& stats, const PhotocurrentStats& transparent) {
    if (stats.variance <= 0.0) throw std::invalid_argument("global_snr: variance must be > 0");
    if (stats.receiver != transparent.receiver)
        throw std::invalid_argument("global_snr: mismatched receivers");
    return std::norm(stats.mean - transparent.mean) / stats.variance;
}

/// Conversion coefficient between the local and global SNR for a single
/// absorption line: (kappa-1)^2/(4 kappa) for division, (sqrt(kappa)-1)^2 for
/// heterodyne.
inline double local_to_global(ReceiverKind receiver, double kappa) {
    if (receiver == ReceiverKind::DivisionReceiver) {
        if (kappa <= 0.0) throw std::invalid_argument("local_to_global: division needs kappa > 0");
        return (kappa - 1.0) * (kappa - 1.0) / (4.0 * kappa);
    }
    const double d = std::sqrt(kappa) - 1.0;
    return d * d;
}

/// Scalar single-line scenario parameters shared by the closed forms:
/// uniform combs A_n = A, B_n = B and uniform gains.
struct ProtocolParams {
    int lines = 3;         // M, odd
    double a_sq = 1.0;     // |A|^2 per line
    double b_sq = 1.0;     // |B|^2 per line
    double gain_a = 1.0;   // linear
    double gain_b = 1.0;   // linear
    double kappa = 1.0;    // single-line transmissivity
    double delta = 0.0;    // phase-noise half-width, heterodyne + intra only

    void validate() const {
        if (lines < 3 || lines % 2 == 0)
            throw std::invalid_argument("ProtocolParams: lines must be odd and >= 3");
        if (kappa < 0.0 || kappa > 1.0)
            throw std::invalid_argument("ProtocolParams: kappa must lie in [0, 1]");
        if (gain_a < 1.0 || gain_b < 1.0)
            throw std::invalid_argument("ProtocolParams: gains must be >= 1");
    }
};

/// Leading-order (M >> G) local SNR^2 of the four protocols for a single
/// absorption line. The heterodyne entangled comb matches the squeezed one at
/// this order; its finite-M difference lives in the exact path.
inline double asymptotic_snr(const Protocol& protocol, const ProtocolParams& p) {
    p.validate();
    const double M = p.lines;
    if (protocol.receiver == ReceiverKind::HeterodyneSubtraction) {
        const double inv = M / (p.a_sq * p.b_sq) * (p.a_sq / p.gain_b + p.b_sq / p.gain_a);
        return 1.0 / inv;
    }
    const double squeezed = (3.0 + p.kappa) * (3.0 + p.kappa) *
                            (p.a_sq / p.gain_a + p.b_sq / p.gain_b);
    double mismatch = 0.0;
    const double lossy = (1.0 - p.kappa) * (1.0 - p.kappa);
    switch (protocol.structure) {
        case SqueezingStructure::IntraSelfReferred:
            mismatch = lossy * (p.a_sq * amplification_noise(p.gain_b) +
                                p.b_sq * amplification_noise(p.gain_a));
            break;
        case SqueezingStructure::CrossLineEntangled:
        case SqueezingStructure::Classical:
            mismatch = lossy * (p.a_sq / p.gain_b + p.b_sq / p.gain_a);
            break;
        case SqueezingStructure::IntraCrossReferred:
            throw std::invalid_argument("asymptotic_snr: cross-referred intra pairs are the "
                                        "heterodyne layout");
    }
    const double inv = M / (16.0 * p.kappa * p.a_sq * p.b_sq) * (squeezed + mismatch);
    return 1.0 / inv;
}

/// Heterodyne + intra-line local SNR^2 with an unknown uniform phase mismatch
/// delta over all lines; reduces exactly to the delta = 0 asymptotic form.
inline double phase_noise_snr(const ProtocolParams& p) {
    p.validate();
    const double M = p.lines;
    const double inv = M / (p.a_sq * p.b_sq) *
                       (p.a_sq * rotated_pair_variance(p.gain_b, p.delta) +
                        p.b_sq * rotated_pair_variance(p.gain_a, p.delta));
    return 1.0 / inv;
}

/// Optimal classical baseline SNR_C*^2 = P T / (M^2 hbar Omega_c).
inline double classical_optimum_snr_sq(double power, double duration, int lines, double carrier) {
    if (power <= 0.0 || duration <= 0.0 || lines <= 0 || carrier <= 0.0)
        throw std::invalid_argument("classical_optimum_snr_sq: inputs must be positive");
    return power * duration / (static_cast<double>(lines) * lines * photon_energy(carrier));
}

// ---------------------------------------------------------------------------
// Exact single-line scenario engine
// ---------------------------------------------------------------------------

/// Uniform-comb single-absorption-line scenario, evaluated by the exact path.
struct ScenarioSpec {
    Protocol protocol;
    int n_half = 500;
    double a_sq = 1.0;
    double b_sq = 1.0;
    bool strong_lo = false;  // heterodyne only; b_sq then sets the LO direction scale
    double gain_a = 1.0;
    double gain_b = 1.0;
    int line = 7;
    double kappa = 1.0;
    double theta = 0.0;
    double thermal = 0.0;  // uniform environment occupation
};

namespace detail {

inline CombSpec scenario_comb(int n_half, double amp_sq, CombRole role) {
    // the repetition rates only matter for lattice frequencies, not for SNRs
    const double rep_offset = 2.0 * constants::pi * 1.0e3;
    const double rep_rate = 2.0 * constants::pi * 1.0e8;
    const double carrier = carrier_from_wavelength(1563e-9);
    return uniform_comb(n_half, std::sqrt(amp_sq), role, rep_rate, rep_offset, carrier, 1.0);
}

inline SqueezingSpec scenario_sqz(SqueezingStructure structure, int n_half, double gain) {
    if (structure == SqueezingStructure::Classical || gain == 1.0)
        return SqueezingSpec::classical(n_half);
    return SqueezingSpec::uniform(structure, n_half, gain);
}

}  // namespace detail

struct ScenarioResult {
    PhotocurrentStats stats;        // at the probed sample
    PhotocurrentStats transparent;  // same configuration, transparent sample
    double local_snr_sq = 0.0;
    double global_snr_sq = 0.0;
};

/// Uniform combs probing an arbitrary per-line sample, reported at one beat.
struct GeneralScenario {
    Protocol protocol;
    double a_sq = 1.0;
    double b_sq = 1.0;
    bool strong_lo = false;
    double gain_a = 1.0;
    double gain_b = 1.0;
    SampleSpec sample = SampleSpec::transparent(0);
    int beat = 1;
};

inline ScenarioResult evaluate_general(const GeneralScenario& spec) {
    const int n_half = spec.sample.n_half;
    if (spec.beat == 0 || std::abs(spec.beat) > n_half)
        throw std::invalid_argument("evaluate_general: beat must satisfy 0 < |beat| <= n_half");
    const CombSpec comb_a = detail::scenario_comb(n_half, spec.a_sq, CombRole::Signal);
    const CombSpec comb_b = detail::scenario_comb(n_half, spec.b_sq, CombRole::LocalOscillator);
    const SqueezingSpec sqz_a = detail::scenario_sqz(spec.protocol.structure, n_half, spec.gain_a);
    const SqueezingSpec sqz_b = detail::scenario_sqz(spec.protocol.structure, n_half, spec.gain_b);
    SampleSpec clear = SampleSpec::transparent(n_half);
    clear.thermal = spec.sample.thermal;

    ScenarioResult result;
    if (spec.protocol.receiver == ReceiverKind::DivisionReceiver) {
        if (spec.strong_lo)
            throw std::invalid_argument("evaluate_general: the strong-LO limit is a heterodyne "
                                        "construct");
        result.stats = ratio_statistics(comb_a, comb_b, sqz_a, sqz_b, spec.sample, spec.beat);
        result.transparent = ratio_statistics(comb_a, comb_b, sqz_a, sqz_b, clear, spec.beat);
    } else {
        result.stats = differential_statistics(comb_a, comb_b, sqz_a, sqz_b, spec.sample,
                                               spec.beat, spec.strong_lo);
        result.transparent = differential_statistics(comb_a, comb_b, sqz_a, sqz_b, clear,
                                                     spec.beat, spec.strong_lo);
    }
    result.local_snr_sq =
        result.stats.kappa_line > 0.0 ||
                spec.protocol.receiver == ReceiverKind::HeterodyneSubtraction
            ? local_snr(result.stats)
            : 0.0;
    result.global_snr_sq = global_snr(result.stats, result.transparent);
    return result;
}

inline ScenarioResult evaluate_scenario(const ScenarioSpec& spec) {
    if (spec.line == 0 || std::abs(spec.line) > spec.n_half)
        throw std::invalid_argument("evaluate_scenario: line must satisfy 0 < |line| <= n_half");
    GeneralScenario general;
    general.protocol = spec.protocol;
    general.a_sq = spec.a_sq;
    general.b_sq = spec.b_sq;
    general.strong_lo = spec.strong_lo;
    general.gain_a = spec.gain_a;
    general.gain_b = spec.gain_b;
    general.sample = single_line_sample(spec.n_half, spec.line, spec.kappa, spec.theta);
    general.sample.set_uniform_thermal(spec.thermal);
    general.beat = spec.line;
    return evaluate_general(general);
}

/// Scenario results for a protocol together with its same-receiver classical
/// baseline (gains set to 1, everything else unchanged).
struct SnrReport {
    std::string protocol_name;
    ReceiverKind receiver = ReceiverKind::HeterodyneSubtraction;
    SqueezingStructure structure = SqueezingStructure::Classical;
    std::optional<ConstraintKind> constraint;
    double kappa = 1.0;
    double fraction = 0.5;  // A^2 / (A^2 + B^2)
    double gain_a = 1.0;
    double gain_b = 1.0;
    cd mean;
    double variance = 0.0;
    double local_snr_sq = 0.0;
    double global_snr_sq = 0.0;
    double classical_local_snr_sq = 0.0;
    double classical_global_snr_sq = 0.0;
    double classical_variance = 0.0;
    double advantage_db = 0.0;  // same-receiver classical baseline, SNR^2 in dB
    std::optional<double> advantage_db_best_classical;
    StatMethod method = StatMethod::ClosedForm;
    bool strong_lo = false;
};

/// Quantum-over-classical advantage as a variance ratio (the means agree), so
/// the value stays finite at kappa = 0 where the division local SNR vanishes.
inline SnrReport general_report(const GeneralScenario& spec) {
    const ScenarioResult quantum = evaluate_general(spec);
    GeneralScenario classical = spec;
    classical.gain_a = 1.0;
    classical.gain_b = 1.0;
    const ScenarioResult baseline = evaluate_general(classical);

    SnrReport report;
    report.protocol_name = spec.protocol.name();
    report.receiver = spec.protocol.receiver;
    report.structure = spec.protocol.structure;
    report.kappa = spec.sample.kappa_at(spec.beat);
    report.fraction = spec.a_sq / (spec.a_sq + spec.b_sq);
    report.gain_a = spec.gain_a;
    report.gain_b = spec.gain_b;
    report.mean = quantum.stats.mean;
    report.variance = quantum.stats.variance;
    report.local_snr_sq = quantum.local_snr_sq;
    report.global_snr_sq = quantum.global_snr_sq;
    report.classical_local_snr_sq = baseline.local_snr_sq;
    report.classical_global_snr_sq = baseline.global_snr_sq;
    report.classical_variance = baseline.stats.variance;
    report.advantage_db = linear_to_db(baseline.stats.variance / quantum.stats.variance);
    report.strong_lo = spec.strong_lo;
    return report;
}

inline SnrReport scenario_report(const ScenarioSpec& spec) {
    GeneralScenario general;
    general.protocol = spec.protocol;
    general.a_sq = spec.a_sq;
    general.b_sq = spec.b_sq;
    general.strong_lo = spec.strong_lo;
    general.gain_a = spec.gain_a;
    general.gain_b = spec.gain_b;
    general.sample = single_line_sample(spec.n_half, spec.line, spec.kappa, spec.theta);
    general.sample.set_uniform_thermal(spec.thermal);
    general.beat = spec.line;
    SnrReport report = general_report(general);
    report.kappa = spec.kappa;
    return report;
}

// ---------------------------------------------------------------------------
// Power-constrained optima
// ---------------------------------------------------------------------------

/// Closed-form constrained optima (leading order in M >> G), with the
/// classical baselines obtained at G = 1.
///
/// Sample power + heterodyne: strong LO, only the signal comb engineered,
/// SNR^2 = G * SNR_C*^2 independent of the single-line loss. Division receiver
/// (either constraint), symmetric combs: SNR^2 = 8 kappa [ (3+kappa)^2/G +
/// (1-kappa)^2 X ]^{-1} SNR_C*^2 with X = (G+1/G)/2 for self-referred
/// intra-line squeezing and X = 1/G for the entangled comb. Detector power +
/// heterodyne, symmetric combs: SNR^2 = (G/2) SNR_C*^2.
inline SnrReport constrained_optimal_snr(const Protocol& protocol, ConstraintKind constraint,
                                         double gain, double kappa, int lines, double power,
                                         double duration, double carrier) {
    if (gain < 1.0) throw std::invalid_argument("constrained_optimal_snr: gain must be >= 1");
    if (kappa < 0.0 || kappa > 1.0)
        throw std::invalid_argument("constrained_optimal_snr: kappa must lie in [0, 1]");
    const double snr_c = classical_optimum_snr_sq(power, duration, lines, carrier);

    auto division = [&](double g, SqueezingStructure structure) {
        double x = 1.0;
        if (structure == SqueezingStructure::IntraSelfReferred) x = amplification_noise(g);
        else if (structure == SqueezingStructure::CrossLineEntangled) x = 1.0 / g;
        const double bracket = (3.0 + kappa) * (3.0 + kappa) / g +
                               (1.0 - kappa) * (1.0 - kappa) * x;
        return 8.0 * kappa / bracket * snr_c;
    };

    SnrReport report;
    report.protocol_name = protocol.name();
    report.receiver = protocol.receiver;
    report.structure = protocol.structure;
    report.constraint = constraint;
    report.kappa = kappa;
    report.gain_a = gain;
    report.gain_b = gain;
    double quantum = 0.0, classical = 0.0, best_classical = 0.0;
    if (protocol.receiver == ReceiverKind::HeterodyneSubtraction) {
        if (constraint == ConstraintKind::SamplePower) {
            quantum = gain * snr_c;  // strong LO, one engineered comb
            classical = snr_c;
            report.fraction = 1.0;
            report.strong_lo = true;
        } else {
            quantum = 0.5 * gain * snr_c;  // no infinitely strong LO available
            classical = 0.5 * snr_c;
            report.fraction = 0.5;
        }
    } else {
        quantum = division(gain, protocol.structure);
        classical = division(1.0, SqueezingStructure::Classical);
        report.fraction = 0.5;  // maximum at A^2 = B^2
    }
    const double best_classical_het =
        constraint == ConstraintKind::SamplePower ? snr_c : 0.5 * snr_c;
    best_classical = std::max(best_classical_het, division(1.0, SqueezingStructure::Classical));
    report.local_snr_sq = quantum;
    report.global_snr_sq = local_to_global(protocol.receiver, std::max(kappa, 1e-300)) * quantum;
    report.classical_local_snr_sq = classical;
    report.advantage_db = linear_to_db(quantum / classical);
    report.advantage_db_best_classical = linear_to_db(quantum / best_classical);
    report.method = StatMethod::ClosedForm;
    return report;
}

enum class SplitObjective { ExactLocal, ExactGlobal, AsymptoticLocal };

struct SplitOptimum {
    double fraction = 0.5;   // A^2 / (A^2 + B^2)
    double snr_sq = 0.0;
    bool boundary = false;   // true when the optimum sits at an interval edge
};

/// Maximize the SNR over the power split f = A^2/(A^2+B^2) at a fixed total
/// budget (|A|^2 + |B|^2)/2 = per_line_budget.
///
/// A coarse 64-point grid brackets the maximum of the smooth objective, then a
/// golden-section search refines it to `tol` in f. Under the sample constraint
/// the heterodyne receiver is not a split problem at all (only the signal comb
/// is constrained, the LO is free); the optimum is the f -> 1 boundary with an
/// unbounded LO, reported via the dedicated strong-LO limit.
inline SplitOptimum optimize_power_split(const Protocol& protocol, ConstraintKind constraint,
                                         double per_line_budget, double gain_a, double gain_b,
                                         double kappa, int n_half, int line,
                                         SplitObjective objective = SplitObjective::ExactLocal,
                                         double tol = 1e-4) {
    if (per_line_budget <= 0.0)
        throw std::invalid_argument("optimize_power_split: empty feasible set");
    if (protocol.receiver == ReceiverKind::HeterodyneSubtraction &&
        constraint == ConstraintKind::SamplePower) {
        ScenarioSpec spec;
        spec.protocol = protocol;
        spec.n_half = n_half;
        spec.a_sq = per_line_budget;
        spec.b_sq = 1.0;  // LO direction; the strong-LO SNR is scale free
        spec.strong_lo = true;
        spec.gain_a = gain_a;
        spec.gain_b = 1.0;
        spec.line = line;
        spec.kappa = kappa;
        const ScenarioResult res = evaluate_scenario(spec);
        return SplitOptimum{1.0, objective == SplitObjective::ExactGlobal ? res.global_snr_sq
                                                                          : res.local_snr_sq,
                            true};
    }

    const double total = 2.0 * per_line_budget;
    auto snr_at = [&](double f) {
        const double a_sq = f * total;
        const double b_sq = (1.0 - f) * total;
        if (objective == SplitObjective::AsymptoticLocal) {
            ProtocolParams p;
            p.lines = 2 * n_half + 1;
            p.a_sq = a_sq;
            p.b_sq = b_sq;
            p.gain_a = gain_a;
            p.gain_b = gain_b;
            p.kappa = kappa;
            return asymptotic_snr(protocol, p);
        }
        ScenarioSpec spec;
        spec.protocol = protocol;
        spec.n_half = n_half;
        spec.a_sq = a_sq;
        spec.b_sq = b_sq;
        spec.gain_a = gain_a;
        spec.gain_b = gain_b;
        spec.line = line;
        spec.kappa = kappa;
        const ScenarioResult res = evaluate_scenario(spec);
        return objective == SplitObjective::ExactGlobal ? res.global_snr_sq : res.local_snr_sq;
    };

    constexpr int kGridPoints = 64;
    const double lo = 1e-4, hi = 1.0 - 1e-4;
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < kGridPoints; ++i) {
        const double f = lo + (hi - lo) * i / (kGridPoints - 1);
        const double v = snr_at(f);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = lo + (hi - lo) * std::max(best - 1, 0) / (kGridPoints - 1);
    double b = lo + (hi - lo) * std::min(best + 1, kGridPoints - 1) / (kGridPoints - 1);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = snr_at(x1), f2 = snr_at(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = snr_at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = snr_at(x1);
        }
    }
    const double f_star = 0.5 * (a + b);
    return SplitOptimum{f_star, snr_at(f_star),
                        f_star <= lo + tol || f_star >= hi - tol};
}

}  // namespace qcomb
