#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "qcomb/comb.hpp"
#include "qcomb/receivers.hpp"
#include "qcomb/sample.hpp"
#include "qcomb/snr.hpp"
#include "qcomb/squeezing.hpp"

namespace qcomb {

/// Deterministic seed stream; splitmix64 over (master, index).
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

/// Complex quadrature-basis weights of sum_k (c_k a_k + d_k a_k^dag):
/// w_q = (c+d)/2, w_p = i(c-d)/2 at the lattice's (q, p) rows, normalized so
/// that var X = w^H Sigma w against the vacuum-unity covariance.
inline std::unordered_map<int, cd> quadrature_weights(const NoiseCoefficients& nc,
                                                      const ModeLattice& lattice) {
    std::unordered_map<int, cd> w;
    w.reserve(2 * nc.terms.size());
    for (const auto& [key, cds] : nc.terms) {
        const int mode = lattice.mode_index(static_cast<ModeLattice::Block>(key.block), key.n,
                                            key.j);
        const auto& [c, d] = cds;
        w[2 * mode] += 0.5 * (c + d);
        w[2 * mode + 1] += cd(0.0, 0.5) * (c - d);
    }
    return w;
}

}  // namespace detail

/// Variance of the linearized observable as the quadratic form w^H Sigma w
/// over the full lattice covariance (complex-quadrature convention: real and
/// imaginary parts summed). Exact to machine precision.
inline double variance_quadratic_form(const NoiseCoefficients& nc, const CovarianceModel& cov) {
    if (cov.n_half != nc.n_half)
        throw std::invalid_argument("variance_quadratic_form: dimension mismatch");
    const ModeLattice lattice(cov.n_half);
    if (cov.dimension() != lattice.quadrature_dimension())
        throw std::invalid_argument("variance_quadratic_form: covariance has wrong dimension");
    const auto w = detail::quadrature_weights(nc, lattice);
    cd acc = 0.0;
    for (int col = 0; col < cov.matrix.outerSize(); ++col) {
        const auto wj = w.find(col);
        if (wj == w.end()) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(cov.matrix, col); it; ++it) {
            const auto wi = w.find(static_cast<int>(it.row()));
            if (wi == w.end()) continue;
            acc += std::conj(wi->second) * it.value() * wj->second;
        }
    }
    return acc.real();
}

/// One protocol instance: everything needed to evaluate its statistics.
struct ProtocolConfig {
    CombSpec comb_a;
    CombSpec comb_b;
    SqueezingSpec sqz_a;
    SqueezingSpec sqz_b;
    SampleSpec sample;
    ReceiverKind receiver = ReceiverKind::HeterodyneSubtraction;
};

/// Observable variance via the full-lattice quadratic form (division result is
/// normalized to var(r_m) like the closed form).
inline double oracle_variance(const ProtocolConfig& config, int m) {
    const ModeLattice lattice = build_mode_lattice(config.comb_a.n_half);
    const CovarianceModel cov = build_covariance(lattice, config.sqz_a, config.sqz_b,
                                                 config.receiver, config.sample);
    const NoiseCoefficients nc =
        noise_coefficients(config.receiver, config.comb_a, config.comb_b, config.sample, m);
    const double raw = variance_quadratic_form(nc, cov);
    if (config.receiver == ReceiverKind::DivisionReceiver) return raw / nc.denominator_half_sq;
    return raw;
}

struct MonteCarloResult {
    cd mean;
    double variance = 0.0;
    double std_error = 0.0;  // of the variance estimate, sigma^2 sqrt(2/(K-1))
    int samples = 0;
};

/// Monte-Carlo statistics of the receiver observable.
///
/// Draws K joint Gaussian quadrature samples of the modes the observable
/// touches (their marginal equals the corresponding covariance sub-block),
/// via a Cholesky factor, pushes them through the linearized photocurrent
/// expression, and returns unbiased sample statistics. Bitwise reproducible
/// for a fixed seed. A non-positive-definite covariance is reported after one
/// retry with at most 1e-12-relative diagonal jitter, never silently repaired
/// beyond that.
inline MonteCarloResult monte_carlo_statistics(const ProtocolConfig& config, int m, int samples,
                                               uint64_t seed) {
    if (samples < 1000)
        throw std::invalid_argument("monte_carlo_statistics: need at least 1000 samples");
    const ModeLattice lattice = build_mode_lattice(config.comb_a.n_half);
    const CovarianceModel cov = build_covariance(lattice, config.sqz_a, config.sqz_b,
                                                 config.receiver, config.sample);
    const NoiseCoefficients nc =
        noise_coefficients(config.receiver, config.comb_a, config.comb_b, config.sample, m);
    const auto weights = detail::quadrature_weights(nc, lattice);

    std::vector<int> rows;
    rows.reserve(weights.size());
    for (const auto& [row, w] : weights) rows.push_back(row);
    std::sort(rows.begin(), rows.end());
    std::unordered_map<int, int> pos;
    pos.reserve(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) pos[rows[i]] = static_cast<int>(i);
    const int ns = static_cast<int>(rows.size());

    Eigen::MatrixXd sub = Eigen::MatrixXd::Zero(ns, ns);
    for (int col = 0; col < cov.matrix.outerSize(); ++col) {
        const auto pj = pos.find(col);
        if (pj == pos.end()) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(cov.matrix, col); it; ++it) {
            const auto pi = pos.find(static_cast<int>(it.row()));
            if (pi == pos.end()) continue;
            sub(pi->second, pj->second) = it.value();
        }
    }

    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-12 * sub.diagonal().maxCoeff();
        sub.diagonal().array() += jitter;
        llt.compute(sub);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error(
                "monte_carlo_statistics: covariance factorization failed (not positive definite)");
    }
    const Eigen::MatrixXd lower = llt.matrixL();

    Eigen::VectorXd wr(ns), wi(ns);
    for (int i = 0; i < ns; ++i) {
        const cd w = weights.at(rows[static_cast<size_t>(i)]);
        wr(i) = w.real();
        wi(i) = w.imag();
    }

    cd offset = 0.0;
    double scale = 1.0;
    if (config.receiver == ReceiverKind::DivisionReceiver) {
        offset = nc.ratio;
        scale = 1.0 / std::sqrt(nc.denominator_half_sq);
    } else {
        const auto means = mean_spectrum(config.receiver, config.comb_a, config.comb_b,
                                         config.sample, m);
        offset = means.first - means.second;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr int kBatch = 1024;
    Eigen::MatrixXd z(ns, kBatch);
    std::vector<cd> values;
    values.reserve(static_cast<size_t>(samples));
    int remaining = samples;
    while (remaining > 0) {
        const int batch = std::min(remaining, kBatch);
        for (int s = 0; s < batch; ++s)
            for (int i = 0; i < ns; ++i) z(i, s) = normal(rng);
        const Eigen::MatrixXd x = lower * z.leftCols(batch);
        const Eigen::VectorXd re = x.transpose() * wr;
        const Eigen::VectorXd im = x.transpose() * wi;
        for (int s = 0; s < batch; ++s)
            values.push_back(offset + scale * cd(re(s), im(s)));
        remaining -= batch;
    }

    cd mean = 0.0;
    for (const cd& v : values) mean += v;
    mean /= static_cast<double>(samples);
    double var = 0.0;
    for (const cd& v : values) var += std::norm(v - mean);
    var /= static_cast<double>(samples - 1);

    MonteCarloResult result;
    result.mean = mean;
    result.variance = var;
    result.std_error = var * std::sqrt(2.0 / (samples - 1));
    result.samples = samples;
    return result;
}

/// Division-receiver statistics evaluated through the full-lattice quadratic
/// form (any comb amplitudes, n_half <= 12).
inline PhotocurrentStats ratio_statistics_oracle(const ProtocolConfig& config, int m) {
    if (config.receiver != ReceiverKind::DivisionReceiver)
        throw std::invalid_argument("ratio_statistics_oracle: division receiver only");
    if (config.comb_a.n_half > 12)
        throw std::invalid_argument("ratio_statistics_oracle: oracle scale guard (n_half <= 12)");
    PhotocurrentStats stats;
    stats.m = m;
    stats.receiver = ReceiverKind::DivisionReceiver;
    stats.mean = ratio_mean(config.comb_a, config.comb_b, config.sample, m);
    stats.kappa_line = config.sample.kappa_at(m);
    stats.signal_product_sq =
        std::norm(config.comb_a.amplitude(m) * std::conj(config.comb_b.amplitude(m)));
    stats.variance = oracle_variance(config, m);
    stats.method = StatMethod::OracleQuadraticForm;
    return stats;
}

/// Ratio statistics through the closed form where it is defined; combs that
/// leave its domain (complex amplitudes with intra-line squeezing) fall back
/// to the covariance oracle, tagged with the method actually used.
inline PhotocurrentStats division_statistics(const ProtocolConfig& config, int m) {
    const bool intra = config.sqz_a.structure == SqueezingStructure::IntraSelfReferred ||
                       config.sqz_b.structure == SqueezingStructure::IntraSelfReferred;
    if (intra && !(config.comb_a.amplitudes_real() && config.comb_b.amplitudes_real()))
        return ratio_statistics_oracle(config, m);
    return ratio_statistics(config.comb_a, config.comb_b, config.sqz_a, config.sqz_b,
                            config.sample, m);
}

// ---------------------------------------------------------------------------
// Cross validation
// ---------------------------------------------------------------------------

struct OracleEntry {
    std::string protocol;
    std::string scenario;
    int m = 0;
    double closed_form = 0.0;
    double quadratic_form = 0.0;
    double rel_deviation = 0.0;
    bool pass = false;
    std::optional<double> mc_variance;
    std::optional<double> mc_std_error;
    std::optional<double> mc_sigmas;
    bool mc_pass = true;
};

struct OracleReport {
    double tolerance_rel = 1e-9;
    int mc_samples = 0;
    double mc_sigma_limit = 4.0;
    std::vector<OracleEntry> entries;

    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass || !e.mc_pass) return false;
        return true;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["tolerance_rel"] = tolerance_rel;
        j["mc_samples"] = mc_samples;
        j["mc_sigma_limit"] = mc_sigma_limit;
        j["all_pass"] = all_pass();
        j["entries"] = nlohmann::ordered_json::array();
        for (const auto& e : entries) {
            nlohmann::ordered_json je;
            je["protocol"] = e.protocol;
            je["scenario"] = e.scenario;
            je["m"] = e.m;
            je["closed_form"] = e.closed_form;
            je["quadratic_form"] = e.quadratic_form;
            je["rel_deviation"] = e.rel_deviation;
            je["pass"] = e.pass;
            if (e.mc_variance) {
                je["mc_variance"] = *e.mc_variance;
                je["mc_std_error"] = *e.mc_std_error;
                je["mc_sigmas"] = *e.mc_sigmas;
                je["mc_pass"] = e.mc_pass;
            }
            j["entries"].push_back(je);
        }
        return j;
    }
};

/// The four analyzed protocols.
inline std::vector<Protocol> all_protocols() {
    return {
        Protocol{ReceiverKind::HeterodyneSubtraction, SqueezingStructure::IntraCrossReferred},
        Protocol{ReceiverKind::HeterodyneSubtraction, SqueezingStructure::CrossLineEntangled},
        Protocol{ReceiverKind::DivisionReceiver, SqueezingStructure::IntraSelfReferred},
        Protocol{ReceiverKind::DivisionReceiver, SqueezingStructure::CrossLineEntangled},
    };
}

struct ValidationOptions {
    double tolerance_rel = 1e-9;
    int mc_samples = 0;        // 0 disables the Monte-Carlo path
    double mc_sigma_limit = 4.0;
    uint64_t seed = 1;
    bool negative_control = false;  // deliberately mismatch the oracle pairing
};

namespace detail {

inline SqueezingSpec mismatched_structure(const SqueezingSpec& sqz, ReceiverKind receiver) {
    if (sqz.is_classical()) return sqz;
    SqueezingStructure wrong = sqz.structure == SqueezingStructure::CrossLineEntangled
                                   ? intra_structure(receiver)
                                   : SqueezingStructure::CrossLineEntangled;
    return SqueezingSpec(wrong, sqz.n_half, sqz.gains);
}

}  // namespace detail

/// Runs the closed-form, quadratic-form, and (optionally) Monte-Carlo paths
/// for one protocol instance over the requested beat indices. With
/// `negative_control`, the oracle covariance is built with a deliberately
/// mismatched pairing; the resulting deviation must be flagged as a failure.
inline void cross_validate_into(OracleReport& report, const ProtocolConfig& config,
                                const std::string& scenario, const std::vector<int>& beats,
                                const ValidationOptions& opts) {
    const ModeLattice lattice = build_mode_lattice(config.comb_a.n_half);
    if (lattice.n_half > 12)
        throw std::invalid_argument("cross_validate: oracle scale guard requires n_half <= 12");
    const SqueezingSpec oracle_sqz_a =
        opts.negative_control ? detail::mismatched_structure(config.sqz_a, config.receiver)
                              : config.sqz_a;
    const SqueezingSpec oracle_sqz_b =
        opts.negative_control ? detail::mismatched_structure(config.sqz_b, config.receiver)
                              : config.sqz_b;
    const CovarianceModel cov =
        build_covariance(lattice, oracle_sqz_a, oracle_sqz_b, config.receiver, config.sample);

    const std::string protocol_name =
        Protocol{config.receiver, config.sqz_a.is_classical() && config.sqz_b.is_classical()
                                      ? SqueezingStructure::Classical
                                      : (config.sqz_a.is_classical() ? config.sqz_b.structure
                                                                     : config.sqz_a.structure)}
            .name();

    bool first_beat = true;
    for (int m : beats) {
        OracleEntry entry;
        entry.protocol = protocol_name;
        entry.scenario = scenario;
        entry.m = m;
        const NoiseCoefficients nc =
            noise_coefficients(config.receiver, config.comb_a, config.comb_b, config.sample, m);
        double quad = variance_quadratic_form(nc, cov);
        double closed = variance_exact(nc, config.sqz_a, config.sqz_b, config.sample,
                                       config.receiver);
        if (config.receiver == ReceiverKind::DivisionReceiver) {
            quad /= nc.denominator_half_sq;
            closed /= nc.denominator_half_sq;
        }
        entry.closed_form = closed;
        entry.quadratic_form = quad;
        entry.rel_deviation = std::abs(closed - quad) / std::max(std::abs(quad), 1e-300);
        entry.pass = entry.rel_deviation <= opts.tolerance_rel;
        if (opts.mc_samples > 0 && first_beat) {
            const uint64_t seed = derive_seed(opts.seed, static_cast<uint64_t>(report.entries.size()));
            ProtocolConfig mc_config = config;
            if (opts.negative_control) {
                mc_config.sqz_a = oracle_sqz_a;
                mc_config.sqz_b = oracle_sqz_b;
            }
            const MonteCarloResult mc = monte_carlo_statistics(mc_config, m, opts.mc_samples, seed);
            entry.mc_variance = mc.variance;
            entry.mc_std_error = mc.std_error;
            entry.mc_sigmas = std::abs(mc.variance - quad) / mc.std_error;
            entry.mc_pass = *entry.mc_sigmas <= opts.mc_sigma_limit;
            first_beat = false;
        }
        report.entries.push_back(entry);
    }
}

/// Cross-validate every protocol combination valid on the given combs/sample.
/// Division + intra-line squeezing is only run when both combs are real, the
/// regime in which its closed form is defined.
inline OracleReport cross_validate(const CombSpec& comb_a, const CombSpec& comb_b,
                                   const SampleSpec& sample, const std::vector<double>& gains_a,
                                   const std::vector<double>& gains_b,
                                   const ValidationOptions& opts,
                                   const std::string& scenario = "config") {
    OracleReport report;
    report.tolerance_rel = opts.tolerance_rel;
    report.mc_samples = opts.mc_samples;
    report.mc_sigma_limit = opts.mc_sigma_limit;
    const int n_half = comb_a.n_half;
    std::vector<int> beats = {1};
    if (n_half >= 2) beats.push_back(2);
    if (n_half >= 3) beats.push_back(n_half);

    for (const Protocol& protocol : all_protocols()) {
        if (protocol.receiver == ReceiverKind::DivisionReceiver &&
            protocol.structure == SqueezingStructure::IntraSelfReferred &&
            !(comb_a.amplitudes_real() && comb_b.amplitudes_real()))
            continue;
        // cross-line pairs share the gain of the mirrored lines
        auto symmetrize = [&](std::vector<double> g) {
            if (protocol.structure == SqueezingStructure::CrossLineEntangled)
                for (int n = 1; n <= n_half; ++n)
                    g[static_cast<size_t>(n_half - n)] = g[static_cast<size_t>(n_half + n)];
            return g;
        };
        ProtocolConfig config{comb_a,
                              comb_b,
                              SqueezingSpec(protocol.structure, n_half, symmetrize(gains_a)),
                              SqueezingSpec(protocol.structure, n_half, symmetrize(gains_b)),
                              sample,
                              protocol.receiver};
        cross_validate_into(report, config, scenario, beats, opts);
    }
    return report;
}

}  // namespace qcomb
