#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "qcomb/config.hpp"
#include "qcomb/oracle.hpp"
#include "qcomb/snr.hpp"

namespace qcomb {

/// One scan output record; columns fixed and ordered, one row per grid point
/// and protocol.
struct ScanRow {
    std::string protocol;
    std::string constraint;
    double kappa = 1.0;
    double gain_a_db = 0.0;
    double gain_b_db = 0.0;
    double fraction = 0.5;
    double local_snr_sq = 0.0;
    double global_snr_sq = 0.0;
    double advantage_db_same_receiver = 0.0;
    double advantage_db_best_classical = 0.0;
    std::string method;
};

namespace detail {

/// Variance-like inverse-SNR bracket of the leading-order formulas; ratios of
/// brackets give advantages that stay finite at kappa = 0.
inline double asymptotic_bracket(const Protocol& protocol, const ProtocolParams& p) {
    if (protocol.receiver == ReceiverKind::HeterodyneSubtraction)
        return p.a_sq / p.gain_b + p.b_sq / p.gain_a;
    const double squeezed =
        (3.0 + p.kappa) * (3.0 + p.kappa) * (p.a_sq / p.gain_a + p.b_sq / p.gain_b);
    const double lossy = (1.0 - p.kappa) * (1.0 - p.kappa);
    double mismatch = 0.0;
    if (protocol.structure == SqueezingStructure::IntraSelfReferred)
        mismatch = lossy * (p.a_sq * amplification_noise(p.gain_b) +
                            p.b_sq * amplification_noise(p.gain_a));
    else
        mismatch = lossy * (p.a_sq / p.gain_b + p.b_sq / p.gain_a);
    return squeezed + mismatch;
}

struct ClassicalBest {
    double local = 0.0;
    double global_ = 0.0;
};

/// Best classical protocol under the constraint at the same kappa, exact
/// path: heterodyne with a strong LO (sample constraint) or a symmetric split
/// (detector constraint), versus the symmetric-split division receiver.
inline ClassicalBest best_classical(ConstraintKind constraint, double per_line, int n_half,
                                    int line, double kappa) {
    ScenarioSpec het;
    het.protocol = Protocol{ReceiverKind::HeterodyneSubtraction, SqueezingStructure::Classical};
    het.n_half = n_half;
    het.line = line;
    het.kappa = kappa;
    if (constraint == ConstraintKind::SamplePower) {
        het.a_sq = per_line;
        het.b_sq = 1.0;
        het.strong_lo = true;
    } else {
        het.a_sq = per_line;
        het.b_sq = per_line;
    }
    const ScenarioResult het_res = evaluate_scenario(het);

    ScenarioSpec div = het;
    div.protocol = Protocol{ReceiverKind::DivisionReceiver, SqueezingStructure::Classical};
    div.strong_lo = false;
    div.a_sq = per_line;
    div.b_sq = per_line;
    const ScenarioResult div_res = evaluate_scenario(div);

    ClassicalBest best;
    best.local = std::max(het_res.local_snr_sq, div_res.local_snr_sq);
    best.global_ = std::max(het_res.global_snr_sq, div_res.global_snr_sq);
    return best;
}

inline ScanRow exact_row(const Protocol& protocol, ConstraintKind constraint, double per_line,
                         int n_half, int line, double kappa, double theta, double thermal,
                         double gain_db, double fraction, bool strong_lo_pref) {
    const double gain = db_to_linear(gain_db);
    ScenarioSpec spec;
    spec.protocol = protocol;
    spec.n_half = n_half;
    spec.line = line;
    spec.kappa = kappa;
    spec.theta = theta;
    spec.thermal = thermal;
    spec.gain_a = gain;
    spec.gain_b = gain;
    const bool strong_lo = strong_lo_pref &&
                           protocol.receiver == ReceiverKind::HeterodyneSubtraction &&
                           constraint == ConstraintKind::SamplePower;
    if (strong_lo) {
        spec.a_sq = per_line;
        spec.b_sq = 1.0;  // LO direction only; the strong-LO SNR is LO-power free
        spec.strong_lo = true;
        spec.gain_b = 1.0;  // only the signal comb needs engineering
    } else if (protocol.receiver == ReceiverKind::HeterodyneSubtraction &&
               constraint == ConstraintKind::SamplePower) {
        // the sample sees only the signal comb; the LO is set by the split
        spec.a_sq = per_line;
        spec.b_sq = per_line * (1.0 - fraction) / fraction;
    } else {
        spec.a_sq = 2.0 * per_line * fraction;
        spec.b_sq = 2.0 * per_line * (1.0 - fraction);
    }
    const SnrReport report = scenario_report(spec);
    const ClassicalBest best = best_classical(constraint, per_line, n_half, line, kappa);

    ScanRow row;
    row.protocol = protocol.name();
    row.constraint = constraint == ConstraintKind::SamplePower ? "sample" : "detector";
    row.kappa = kappa;
    row.gain_a_db = linear_to_db(spec.gain_a);
    row.gain_b_db = linear_to_db(spec.gain_b);
    row.fraction = strong_lo ? 1.0 : fraction;
    row.local_snr_sq = report.local_snr_sq;
    row.global_snr_sq = report.global_snr_sq;
    row.advantage_db_same_receiver = report.advantage_db;
    // Results-style comparison; global SNRs stay finite at kappa = 0, and at
    // kappa = 1 the local-to-global coefficients of both receivers coincide.
    row.advantage_db_best_classical =
        kappa < 1.0 ? linear_to_db(report.global_snr_sq / best.global_)
                    : linear_to_db(report.local_snr_sq / best.local);
    row.method = strong_lo ? "exact-strong-lo" : "exact";
    return row;
}

inline ScanRow asymptotic_row(const Protocol& protocol, ConstraintKind constraint,
                              double per_line, int lines, double kappa, double gain_db,
                              double fraction, bool strong_lo_pref) {
    const double gain = db_to_linear(gain_db);
    ProtocolParams p;
    p.lines = lines;
    p.kappa = kappa;
    p.gain_a = gain;
    p.gain_b = gain;
    const bool strong_lo = strong_lo_pref &&
                           protocol.receiver == ReceiverKind::HeterodyneSubtraction &&
                           constraint == ConstraintKind::SamplePower;
    double local = 0.0, advantage = 0.0;
    if (strong_lo) {
        const double snr_c = per_line / lines;  // = SNR_C*^2
        local = gain * snr_c;
        advantage = linear_to_db(gain);
    } else {
        if (protocol.receiver == ReceiverKind::HeterodyneSubtraction &&
            constraint == ConstraintKind::SamplePower) {
            p.a_sq = per_line;
            p.b_sq = per_line * (1.0 - fraction) / fraction;
        } else {
            p.a_sq = 2.0 * per_line * fraction;
            p.b_sq = 2.0 * per_line * (1.0 - fraction);
        }
        local = asymptotic_snr(protocol, p);
        ProtocolParams pc = p;
        pc.gain_a = 1.0;
        pc.gain_b = 1.0;
        advantage = linear_to_db(asymptotic_bracket(protocol, pc) / asymptotic_bracket(protocol, p));
    }
    const double snr_c = per_line / lines;
    const double best_local = constraint == ConstraintKind::SamplePower
                                  ? snr_c
                                  : std::max(0.5 * snr_c, 4.0 * kappa /
                                                              (4.0 + (1.0 + kappa) * (1.0 + kappa)) *
                                                              snr_c);
    const double c_conv = local_to_global(protocol.receiver, std::max(kappa, 1e-12));
    const double best_global = local_to_global(ReceiverKind::HeterodyneSubtraction,
                                               std::max(kappa, 1e-12)) *
                               best_local;

    ScanRow row;
    row.protocol = protocol.name();
    row.constraint = constraint == ConstraintKind::SamplePower ? "sample" : "detector";
    row.kappa = kappa;
    row.gain_a_db = gain_db;
    row.gain_b_db = strong_lo ? 0.0 : gain_db;
    row.fraction = strong_lo ? 1.0 : fraction;
    row.local_snr_sq = local;
    row.global_snr_sq = c_conv * local;
    row.advantage_db_same_receiver = advantage;
    row.advantage_db_best_classical =
        kappa < 1.0 ? linear_to_db(row.global_snr_sq / best_global)
                    : linear_to_db(local / best_local);
    row.method = strong_lo ? "asymptotic-strong-lo" : "asymptotic";
    return row;
}

}  // namespace detail

/// Deterministic Cartesian scan: protocols x constraints x lines x gains x
/// kappa x fractions, in that loop order. Rows are computed by a worker pool
/// and assembled by index, so the output order never depends on scheduling.
inline std::vector<ScanRow> run_scan(const RunConfig& config, bool asymptotic = false,
                                     int jobs = 0) {
    validate_config(config);
    std::vector<Protocol> protocols;
    if (config.scan.protocols.empty()) {
        const ReceiverKind receiver = receiver_from_string(config.protocol.receiver);
        protocols.push_back(
            Protocol{receiver, structure_from_string(config.protocol.squeezing, receiver)});
    } else {
        for (const auto& label : config.scan.protocols)
            protocols.push_back(protocol_from_label(label));
    }
    std::vector<ConstraintKind> constraints;
    if (config.scan.constraints.empty())
        constraints.push_back(constraint_from_string(config.constraint));
    else
        for (const auto& s : config.scan.constraints)
            constraints.push_back(constraint_from_string(s));
    const std::vector<int> lines_axis =
        config.scan.lines.empty() ? std::vector<int>{config.comb.lines} : config.scan.lines;
    const std::vector<double> gain_axis = config.scan.gain_db.empty()
                                              ? std::vector<double>{config.squeezing.gain_a_db}
                                              : config.scan.gain_db;
    const std::vector<double> kappa_axis = config.scan.kappa.empty()
                                               ? std::vector<double>{config.sample.kappa}
                                               : config.scan.kappa;
    const std::vector<double> fraction_axis =
        config.scan.fraction.empty() ? std::vector<double>{config.power_split.fraction}
                                     : config.scan.fraction;
    if (kappa_axis.empty() && gain_axis.empty())
        throw std::invalid_argument("run_scan: at least one scan axis must be nonempty");

    struct Point {
        Protocol protocol;
        ConstraintKind constraint;
        int lines;
        double gain_db;
        double kappa;
        double fraction;
    };
    std::vector<Point> grid;
    for (const auto& protocol : protocols)
        for (const auto& constraint : constraints)
            for (int lines : lines_axis)
                for (double g : gain_axis)
                    for (double k : kappa_axis)
                        for (double f : fraction_axis)
                            grid.push_back(Point{protocol, constraint, lines, g, k, f});

    const double carrier = carrier_from_wavelength(config.comb.wavelength_m);
    const double thermal =
        config.sample.thermal_occupation
            ? *config.sample.thermal_occupation
            : (config.sample.temperature_k > 0.0
                   ? thermal_occupation(carrier, config.sample.temperature_k)
                   : 0.0);

    std::vector<ScanRow> rows(grid.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            const Point& pt = grid[i];
            const PowerConstraint pc(pt.constraint, config.comb.power_w);
            const AmplitudeBudget budget = amplitude_from_constraint(
                pc, pt.protocol.receiver, pt.lines, config.comb.duration_s, carrier);
            const int n_half = pt.lines / 2;
            const int line = std::min(std::abs(config.sample.line), n_half);
            if (asymptotic) {
                rows[i] = detail::asymptotic_row(pt.protocol, pt.constraint, budget.per_line,
                                                 pt.lines, pt.kappa, pt.gain_db, pt.fraction,
                                                 config.power_split.strong_lo);
            } else {
                rows[i] = detail::exact_row(pt.protocol, pt.constraint, budget.per_line, n_half,
                                            line == 0 ? 1 : line, pt.kappa, config.sample.theta,
                                            thermal, pt.gain_db, pt.fraction,
                                            config.power_split.strong_lo);
            }
        }
    };
    int thread_count = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    thread_count = std::max(1, std::min<int>(thread_count, static_cast<int>(grid.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return rows;
}

/// Comma-separated output, '.' decimal, one header row, LF endings.
inline void write_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
    out << "protocol,constraint,kappa,gain_a_db,gain_b_db,fraction,local_snr_sq,global_snr_sq,"
           "advantage_db_same_receiver,advantage_db_best_classical,method\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (const ScanRow& r : rows) {
        out << r.protocol << ',' << r.constraint << ',' << num(r.kappa) << ','
            << num(r.gain_a_db) << ',' << num(r.gain_b_db) << ',' << num(r.fraction) << ','
            << num(r.local_snr_sq) << ',' << num(r.global_snr_sq) << ','
            << num(r.advantage_db_same_receiver) << ',' << num(r.advantage_db_best_classical)
            << ',' << r.method << '\n';
    }
}

// ---------------------------------------------------------------------------
// Validation battery for the `validate` subcommand
// ---------------------------------------------------------------------------

/// Built-in battery: every protocol crossed with lossless, single-line
/// (kappa in {0, 0.3, 0.7}), asymmetric, thermal and phase-mismatch samples,
/// plus a complex-comb case for the protocols whose forms allow it.
inline OracleReport run_validation_battery(const RunConfig& config, bool negative_control) {
    const int n_half = config.oracle.n_half;
    const int lines = 2 * n_half + 1;
    const double rep_offset = 2.0 * constants::pi * 1.0e3;
    const double rep_rate = 2.0 * constants::pi * 1.0e8;
    const double carrier = carrier_from_wavelength(config.comb.wavelength_m);

    auto real_comb = [&](double amp, CombRole role) {
        return uniform_comb(n_half, amp, role, rep_rate, rep_offset, carrier,
                            config.comb.duration_s);
    };
    const CombSpec comb_a = real_comb(1.3, CombRole::Signal);
    const CombSpec comb_b = real_comb(0.9, CombRole::LocalOscillator);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> uni01(0.0, 1.0);
    std::uniform_real_distribution<double> phase(-0.25, 0.25);

    const std::vector<double> gains_a(static_cast<size_t>(lines),
                                      db_to_linear(config.squeezing.gain_a_db));
    const std::vector<double> gains_b(static_cast<size_t>(lines),
                                      db_to_linear(config.squeezing.gain_b_db));

    ValidationOptions opts;
    opts.tolerance_rel = config.oracle.tolerance_rel;
    opts.mc_samples = config.oracle.mc_samples;
    opts.seed = config.seed;
    opts.negative_control = negative_control;

    OracleReport report;
    report.tolerance_rel = opts.tolerance_rel;
    report.mc_samples = opts.mc_samples;
    report.mc_sigma_limit = opts.mc_sigma_limit;

    auto merge = [&](const OracleReport& part) {
        report.entries.insert(report.entries.end(), part.entries.begin(), part.entries.end());
    };

    merge(cross_validate(comb_a, comb_b, SampleSpec::transparent(n_half), gains_a, gains_b, opts,
                         "lossless"));
    for (double kappa : {0.0, 0.3, 0.7}) {
        char name[32];
        std::snprintf(name, sizeof(name), "single-line kappa=%.1f", kappa);
        merge(cross_validate(comb_a, comb_b, single_line_sample(n_half, 2, kappa), gains_a,
                             gains_b, opts, name));
    }
    {
        SampleSpec sample = SampleSpec::transparent(n_half);
        for (int n = -n_half; n <= n_half; ++n) sample.set_line(n, uni01(rng), 0.0);
        merge(cross_validate(comb_a, comb_b, sample, gains_a, gains_b, opts, "asymmetric"));
    }
    {
        SampleSpec sample = single_line_sample(n_half, 2, 0.5);
        sample.set_uniform_thermal(0.05);
        merge(cross_validate(comb_a, comb_b, sample, gains_a, gains_b, opts, "thermal"));
    }
    {
        SampleSpec sample = SampleSpec::transparent(n_half);
        for (int n = -n_half; n <= n_half; ++n)
            sample.set_line(n, 0.5 + 0.5 * uni01(rng), phase(rng));
        merge(cross_validate(comb_a, comb_b, sample, gains_a, gains_b, opts, "phase-mismatch"));
    }
    {
        CombSpec complex_a = comb_a;
        CombSpec complex_b = comb_b;
        for (int n = -n_half; n <= n_half; ++n) {
            complex_a.set_amplitude(n, std::polar(1.0 + uni01(rng), 2.0 * phase(rng)));
            complex_b.set_amplitude(n, std::polar(0.5 + uni01(rng), 2.0 * phase(rng)));
        }
        SampleSpec sample = SampleSpec::transparent(n_half);
        for (int n = -n_half; n <= n_half; ++n) sample.set_line(n, uni01(rng), phase(rng));
        merge(cross_validate(complex_a, complex_b, sample, gains_a, gains_b, opts,
                             "complex-combs"));
    }
    return report;
}

}  // namespace qcomb
