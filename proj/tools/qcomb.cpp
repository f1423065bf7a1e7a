// Command-line front end: single-point SNR reports, parameter scans (CSV) and
// oracle validation runs.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "qcomb/qcomb.hpp"

namespace {

qcomb::RunConfig resolve_config(const std::string& config_path, const std::string& preset) {
    if (!preset.empty()) {
        qcomb::RunConfig c;
        if (preset == "fig2") c = qcomb::fig2_config();
        else if (preset == "fig3") c = qcomb::fig3_config();
        else throw std::invalid_argument("unknown preset '" + preset + "' (expected fig2 or fig3)");
        return c;
    }
    if (!config_path.empty()) return qcomb::load_config_file(config_path);
    return qcomb::RunConfig{};
}

void apply_overrides(qcomb::RunConfig& config, uint64_t seed, bool seed_set, int mc_samples) {
    if (seed_set) config.seed = seed;
    if (mc_samples >= 0) config.oracle.mc_samples = mc_samples;
}

int cmd_snr(const qcomb::RunConfig& config, const std::string& out_path) {
    qcomb::validate_config(config);
    const auto receiver = qcomb::receiver_from_string(config.protocol.receiver);
    const auto structure = qcomb::structure_from_string(config.protocol.squeezing, receiver);
    const auto constraint = qcomb::constraint_from_string(config.constraint);
    const double carrier = qcomb::carrier_from_wavelength(config.comb.wavelength_m);
    const qcomb::PowerConstraint pc(constraint, config.comb.power_w);
    const auto budget = qcomb::amplitude_from_constraint(pc, receiver, config.comb.lines,
                                                         config.comb.duration_s, carrier);
    const int n_half = config.comb.lines / 2;
    const double thermal =
        config.sample.thermal_occupation
            ? *config.sample.thermal_occupation
            : (config.sample.temperature_k > 0.0
                   ? qcomb::thermal_occupation(carrier, config.sample.temperature_k)
                   : 0.0);

    double fraction = config.power_split.fraction;
    const qcomb::Protocol protocol{receiver, structure};
    if (config.power_split.optimize) {
        const auto opt = qcomb::optimize_power_split(protocol, constraint, budget.per_line,
                                                     qcomb::db_to_linear(config.squeezing.gain_a_db),
                                                     qcomb::db_to_linear(config.squeezing.gain_b_db),
                                                     config.sample.kappa, n_half,
                                                     config.sample.line);
        fraction = opt.fraction;
        std::printf("optimal power fraction f* = %.6g%s\n", opt.fraction,
                    opt.boundary ? " (boundary: unbounded LO)" : "");
    }

    qcomb::GeneralScenario spec;
    spec.protocol = protocol;
    if (config.sample_lines.empty()) {
        spec.sample = qcomb::single_line_sample(n_half, config.sample.line, config.sample.kappa,
                                                config.sample.theta);
        spec.sample.set_uniform_thermal(thermal);
    } else {
        spec.sample = qcomb::sample_from_overrides(config);
    }
    spec.beat = config.sample.line;
    spec.gain_a = qcomb::db_to_linear(config.squeezing.gain_a_db);
    spec.gain_b = qcomb::db_to_linear(config.squeezing.gain_b_db);
    const bool strong_lo = (config.power_split.strong_lo || fraction >= 1.0) &&
                           receiver == qcomb::ReceiverKind::HeterodyneSubtraction &&
                           constraint == qcomb::ConstraintKind::SamplePower;
    if (strong_lo) {
        spec.a_sq = budget.per_line;
        spec.b_sq = 1.0;
        spec.strong_lo = true;
        spec.gain_b = 1.0;
    } else if (budget.signal_only) {
        spec.a_sq = budget.per_line;
        spec.b_sq = budget.per_line * (1.0 - fraction) / fraction;
    } else {
        spec.a_sq = 2.0 * budget.per_line * fraction;
        spec.b_sq = 2.0 * budget.per_line * (1.0 - fraction);
    }
    const qcomb::SnrReport report = qcomb::general_report(spec);

    std::printf("protocol:            %s\n", report.protocol_name.c_str());
    std::printf("constraint:          %s (P = %g W, T = %g s, lambda = %g m)\n",
                config.constraint.c_str(), config.comb.power_w, config.comb.duration_s,
                config.comb.wavelength_m);
    std::printf("lines / probed beat: %d / %d\n", config.comb.lines, config.sample.line);
    if (config.sample_lines.empty())
        std::printf("kappa / theta:       %.6g / %.6g\n", config.sample.kappa,
                    config.sample.theta);
    else
        std::printf("sample:              %zu per-line overrides\n", config.sample_lines.size());
    std::printf("gains:               G_A = %.6g dB, G_B = %.6g dB%s\n",
                qcomb::linear_to_db(spec.gain_a), qcomb::linear_to_db(spec.gain_b),
                spec.strong_lo ? " (strong LO)" : "");
    std::printf("mean:                %.6g %+.6gi\n", report.mean.real(), report.mean.imag());
    std::printf("variance:            %.6g\n", report.variance);
    std::printf("local SNR^2:         %.6g%s\n", report.local_snr_sq,
                report.local_snr_sq == 0.0 ? "  (division local SNR vanishes at kappa = 0: the "
                                             "ratio readout is modulated by kappa itself)"
                                           : "");
    std::printf("global SNR^2:        %.6g\n", report.global_snr_sq);
    std::printf("advantage:           %.6g dB over the same-receiver classical comb\n",
                report.advantage_db);

    if (!out_path.empty()) {
        qcomb::json j;
        j["protocol"] = report.protocol_name;
        j["constraint"] = config.constraint;
        j["kappa"] = report.kappa;
        j["fraction"] = report.fraction;
        j["gain_a_db"] = qcomb::linear_to_db(report.gain_a);
        j["gain_b_db"] = qcomb::linear_to_db(report.gain_b);
        j["mean_re"] = report.mean.real();
        j["mean_im"] = report.mean.imag();
        j["variance"] = report.variance;
        j["local_snr_sq"] = report.local_snr_sq;
        j["global_snr_sq"] = report.global_snr_sq;
        j["advantage_db"] = report.advantage_db;
        j["strong_lo"] = report.strong_lo;
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
        out << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_scan(const qcomb::RunConfig& config, const std::string& out_path, bool asymptotic,
             int jobs) {
    qcomb::validate_config(config);
    const auto rows = qcomb::run_scan(config, asymptotic, jobs);
    const std::string path = !out_path.empty() ? out_path
                             : !config.output.csv.empty() ? config.output.csv
                                                          : std::string("scan.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    qcomb::write_csv(out, rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), path.c_str());
    return 0;
}

int cmd_validate(const qcomb::RunConfig& config, const std::string& out_path,
                 bool negative_control) {
    qcomb::validate_config(config);
    const qcomb::OracleReport report = qcomb::run_validation_battery(config, negative_control);
    int failed = 0;
    double worst = 0.0;
    for (const auto& e : report.entries) {
        if (!e.pass || !e.mc_pass) ++failed;
        worst = std::max(worst, e.rel_deviation);
    }
    std::printf("validation battery: %zu checks, %d failed, worst closed-vs-quadratic relative "
                "deviation %.3e (tolerance %.1e)\n",
                report.entries.size(), failed, worst, report.tolerance_rel);
    for (const auto& e : report.entries) {
        if (!e.pass)
            std::printf("  FAIL %-22s %-22s m=%+d rel=%.3e\n", e.protocol.c_str(),
                        e.scenario.c_str(), e.m, e.rel_deviation);
        if (!e.mc_pass)
            std::printf("  FAIL %-22s %-22s m=%+d monte-carlo %.2f sigma\n", e.protocol.c_str(),
                        e.scenario.c_str(), e.m, *e.mc_sigmas);
    }
    const std::string path = !out_path.empty() ? out_path : config.output.json_path;
    if (!path.empty()) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << report.to_json().dump(2) << "\n";
        std::printf("wrote JSON report to %s\n", path.c_str());
    }
    if (negative_control) {
        // the injected pairing mismatch must be detected
        if (!report.all_pass()) {
            std::printf("negative control: injected pairing mismatch detected as expected\n");
            return 0;
        }
        std::printf("negative control: mismatch NOT detected\n");
        return 1;
    }
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum dual-comb spectroscopy SNR calculator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, preset, out_path;
    uint64_t seed = 1;
    int mc_samples = -1;
    int jobs = 0;
    bool asymptotic = false;
    bool negative_control = false;

    app.add_option("--config", config_path, "configuration file (JSON or INI)");
    app.add_option("--preset", preset, "built-in configuration: fig2 or fig3");
    app.add_option("--out", out_path, "output path (CSV for scan, JSON otherwise)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    app.add_option("--mc-samples", mc_samples, "Monte-Carlo samples for validate (0 disables)");
    app.add_option("--jobs", jobs, "worker threads (default: hardware concurrency)");
    app.add_flag("--asymptotic", asymptotic, "use the leading-order closed forms in scans");
    app.add_flag("--negative-control", negative_control,
                 "inject a pairing mismatch; validate must flag it");

    auto* snr = app.add_subcommand("snr", "single-scenario SNR report");
    auto* scan = app.add_subcommand("scan", "grid scan to CSV");
    auto* validate = app.add_subcommand("validate", "closed form vs oracle vs Monte Carlo");

    CLI11_PARSE(app, argc, argv);

    try {
        qcomb::RunConfig config = resolve_config(config_path, preset);
        apply_overrides(config, seed, seed_opt->count() > 0, mc_samples);
        if (snr->parsed()) return cmd_snr(config, out_path);
        if (scan->parsed()) return cmd_scan(config, out_path, asymptotic, jobs);
        if (validate->parsed()) return cmd_validate(config, out_path, negative_control);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
