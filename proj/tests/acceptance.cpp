// Acceptance suite: runs the project's ten exit criteria end to end and
// prints one PASS/FAIL line per criterion. Exit code is the number of failed
// criteria.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "qcomb/qcomb.hpp"

using namespace qcomb;

namespace {

struct Criterion {
    int id;
    std::string summary;
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& detail) {
        if (!ok) pass = false;
        notes.push_back(std::string(ok ? "    ok   " : "    FAIL ") + detail);
    }
};

std::vector<Criterion> criteria;

Criterion& criterion(int id, const std::string& summary) {
    criteria.reserve(16);  // references into the vector stay valid
    criteria.push_back(Criterion{id, summary, true, {}});
    return criteria.back();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

CombSpec make_comb(int n_half, cd amp, CombRole role = CombRole::Signal) {
    return uniform_comb(n_half, amp, role, 2.0 * constants::pi * 1.0e8,
                        2.0 * constants::pi * 1.0e3, carrier_from_wavelength(1563e-9), 1.0);
}

struct RandomConfig {
    CombSpec comb_real;     // real amplitudes (division + intra-line regime)
    CombSpec comb_real_lo;
    CombSpec comb_cplx;     // complex amplitudes (the other three protocols)
    CombSpec comb_cplx_lo;
    SampleSpec sample;
    std::vector<double> gains_a;
    std::vector<double> gains_b;
    int beat;
};

RandomConfig draw_config(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n_half = 1 + static_cast<int>(rng() % 8);
    const int lines = 2 * n_half + 1;
    CombSpec real_a = make_comb(n_half, 1.0);
    CombSpec real_b = make_comb(n_half, 1.0, CombRole::LocalOscillator);
    CombSpec cplx_a = real_a;
    CombSpec cplx_b = real_b;
    SampleSpec sample = SampleSpec::transparent(n_half);
    std::vector<double> gains_a(static_cast<size_t>(lines)), gains_b(gains_a.size());
    for (int n = -n_half; n <= n_half; ++n) {
        const double mag_a = 0.5 + 2.5 * uni(rng), mag_b = 0.5 + 2.5 * uni(rng);
        real_a.set_amplitude(n, mag_a);
        real_b.set_amplitude(n, mag_b);
        cplx_a.set_amplitude(n, std::polar(mag_a, 2.0 * constants::pi * uni(rng)));
        cplx_b.set_amplitude(n, std::polar(mag_b, 2.0 * constants::pi * uni(rng)));
        sample.set_line(n, uni(rng), 0.6 * uni(rng) - 0.3);
        sample.thermal[static_cast<size_t>(n + n_half)] = 0.1 * uni(rng);
        gains_a[static_cast<size_t>(n + n_half)] = 1.0 + 39.0 * uni(rng);
        gains_b[static_cast<size_t>(n + n_half)] = 1.0 + 39.0 * uni(rng);
    }
    const int beat = 1 + static_cast<int>(rng() % n_half);
    return RandomConfig{real_a, real_b, cplx_a, cplx_b, sample, gains_a, gains_b, beat};
}

std::vector<double> cross_symmetrized(std::vector<double> gains, int n_half) {
    for (int n = 1; n <= n_half; ++n)
        gains[static_cast<size_t>(n_half - n)] = gains[static_cast<size_t>(n_half + n)];
    return gains;
}

ProtocolConfig protocol_config(const RandomConfig& rc, const Protocol& protocol) {
    const bool division_intra = protocol.structure == SqueezingStructure::IntraSelfReferred;
    const int n_half = rc.comb_real.n_half;
    std::vector<double> ga = rc.gains_a, gb = rc.gains_b;
    if (protocol.structure == SqueezingStructure::CrossLineEntangled) {
        ga = cross_symmetrized(ga, n_half);
        gb = cross_symmetrized(gb, n_half);
    }
    return ProtocolConfig{division_intra ? rc.comb_real : rc.comb_cplx,
                          division_intra ? rc.comb_real_lo : rc.comb_cplx_lo,
                          SqueezingSpec(protocol.structure, n_half, ga),
                          SqueezingSpec(protocol.structure, n_half, gb),
                          rc.sample,
                          protocol.receiver};
}

double closed_form_variance(const ProtocolConfig& config, int m) {
    return variance_closed_form(config.receiver, config.comb_a, config.comb_b, config.sqz_a,
                                config.sqz_b, config.sample, m);
}

struct AdvantagePair {
    double at_transparent;
    double at_opaque;
};

AdvantagePair advantage_drop(const Protocol& protocol) {
    ScenarioSpec spec;
    spec.protocol = protocol;
    spec.n_half = 500;
    spec.a_sq = 1.0;
    spec.b_sq = 1.0;
    spec.gain_a = db_to_linear(15.0);
    spec.gain_b = spec.gain_a;
    spec.line = 7;
    spec.kappa = 1.0;
    const double at_one = scenario_report(spec).advantage_db;
    spec.kappa = 0.0;
    const double at_zero = scenario_report(spec).advantage_db;
    return AdvantagePair{at_one, at_zero};
}

}  // namespace

int main() {
    const double carrier = carrier_from_wavelength(1563e-9);
    const double g15 = db_to_linear(15.0);

    std::mt19937_64 rng(20240901);
    std::vector<RandomConfig> configs;
    for (int i = 0; i < 200; ++i) configs.push_back(draw_config(rng));

    {  // 1. closed form vs covariance quadratic form on random configurations
        auto& c = criterion(1, "oracle equivalence over 200 random configurations");
        const auto start = std::chrono::steady_clock::now();
        double worst = 0.0;
        int checks = 0;
        for (const auto& rc : configs) {
            for (const Protocol& protocol : all_protocols()) {
                const ProtocolConfig config = protocol_config(rc, protocol);
                double closed = closed_form_variance(config, rc.beat);
                double quad = oracle_variance(config, rc.beat);
                const double rel = std::abs(closed - quad) / std::abs(quad);
                worst = std::max(worst, rel);
                ++checks;
            }
        }
        const double elapsed = seconds_since(start);
        c.check(worst <= 1e-9, "worst relative deviation " + fmt(worst) +
                                   " <= 1e-9 over " + std::to_string(checks) + " checks");
        c.check(elapsed <= 60.0, "runtime " + fmt(elapsed) + " s <= 60 s");
    }

    {  // 2. Monte-Carlo agreement and bit-exact reproducibility
        auto& c = criterion(2, "Monte-Carlo agreement, K = 1e5, 20 configurations");
        const auto start = std::chrono::steady_clock::now();
        const auto protocols = all_protocols();
        double worst_sigma = 0.0;
        for (int i = 0; i < 20; ++i) {
            const ProtocolConfig config =
                protocol_config(configs[static_cast<size_t>(i)], protocols[i % 4]);
            const int m = configs[static_cast<size_t>(i)].beat;
            const double quad = oracle_variance(config, m);
            const MonteCarloResult mc =
                monte_carlo_statistics(config, m, 100000, derive_seed(424242, i));
            double sigmas = std::abs(mc.variance - quad) / mc.std_error;
            worst_sigma = std::max(worst_sigma, sigmas);
        }
        const ProtocolConfig repro = protocol_config(configs[0], protocols[0]);
        const MonteCarloResult once =
            monte_carlo_statistics(repro, configs[0].beat, 100000, 555);
        const MonteCarloResult twice =
            monte_carlo_statistics(repro, configs[0].beat, 100000, 555);
        const double elapsed = seconds_since(start);
        c.check(worst_sigma <= 4.0,
                "worst deviation " + fmt(worst_sigma) + " sigma <= 4 sigma");
        c.check(once.variance == twice.variance && once.mean == twice.mean,
                "fixed seed reproduces bit-exactly");
        c.check(elapsed <= 120.0, "runtime " + fmt(elapsed) + " s <= 120 s");
    }

    {  // 3. 15 dB advantage at kappa = 1, M = 1001, both receivers
        auto& c = criterion(3, "15 dB advantage at kappa = 1 (M = 1001, 15 dB gains)");
        for (const Protocol& protocol : all_protocols()) {
            ScenarioSpec spec;
            spec.protocol = protocol;
            spec.n_half = 500;
            spec.a_sq = 1.0;
            spec.b_sq = 1.0;
            spec.gain_a = g15;
            spec.gain_b = g15;
            spec.line = 7;
            spec.kappa = 1.0;
            const double adv = scenario_report(spec).advantage_db;
            c.check(std::abs(adv - 15.0) <= 0.05,
                    protocol.name() + " advantage " + fmt(adv) + " dB = 15 +- 0.05");
        }
    }

    {  // 4. classical division is a factor of two below classical heterodyne
        auto& c = criterion(4, "classical heterodyne/division factor two (sample power)");
        const PowerConstraint constraint(ConstraintKind::SamplePower, 0.015);
        const AmplitudeBudget budget = amplitude_from_constraint(
            constraint, ReceiverKind::HeterodyneSubtraction, 1001, 1.0, carrier);
        ScenarioSpec het;
        het.protocol = Protocol{ReceiverKind::HeterodyneSubtraction,
                                SqueezingStructure::Classical};
        het.n_half = 500;
        het.a_sq = budget.per_line;
        het.b_sq = 1.0;
        het.strong_lo = true;
        het.line = 7;
        het.kappa = 1.0;
        const double het_local = evaluate_scenario(het).local_snr_sq;
        ScenarioSpec div = het;
        div.protocol = Protocol{ReceiverKind::DivisionReceiver, SqueezingStructure::Classical};
        div.strong_lo = false;
        div.b_sq = budget.per_line;  // symmetric split of the same exposure
        const double div_local = evaluate_scenario(div).local_snr_sq;
        const double ratio = div_local / het_local;
        c.check(std::abs(ratio - 0.5) <= 1e-3,
                "SNR^2_div / SNR^2_het = " + fmt(ratio) + " = 0.500 +- 1e-3");
    }

    {  // 5. classical global-SNR gaps at kappa = 0
        auto& c = criterion(5, "global-SNR gaps at kappa = 0 (classical, exact)");
        const PowerConstraint sample_budget(ConstraintKind::SamplePower, 0.015);
        const AmplitudeBudget budget = amplitude_from_constraint(
            sample_budget, ReceiverKind::HeterodyneSubtraction, 1001, 1.0, carrier);
        ScenarioSpec het;
        het.protocol = Protocol{ReceiverKind::HeterodyneSubtraction,
                                SqueezingStructure::Classical};
        het.n_half = 500;
        het.line = 7;
        het.kappa = 0.0;
        het.a_sq = budget.per_line;
        het.b_sq = 1.0;
        het.strong_lo = true;
        const double het_sample = evaluate_scenario(het).global_snr_sq;
        ScenarioSpec div = het;
        div.protocol = Protocol{ReceiverKind::DivisionReceiver, SqueezingStructure::Classical};
        div.strong_lo = false;
        div.b_sq = budget.per_line;
        const double div_sample = evaluate_scenario(div).global_snr_sq;
        const double gap_sample = linear_to_db(het_sample / div_sample);
        c.check(std::abs(gap_sample - linear_to_db(5.0)) <= 0.1,
                "sample constraint gap " + fmt(gap_sample) + " dB = 6.99 +- 0.1");

        ScenarioSpec het_det = het;
        het_det.strong_lo = false;
        het_det.b_sq = budget.per_line;  // detector constraint: symmetric, finite LO
        const double het_detector = evaluate_scenario(het_det).global_snr_sq;
        const double gap_detector = linear_to_db(het_detector / div_sample);
        c.check(std::abs(gap_detector - linear_to_db(2.5)) <= 0.1,
                "detector constraint gap " + fmt(gap_detector) + " dB = 3.98 +- 0.1");
    }

    {  // 6. loss-robustness contrast at M = 1001, 15 dB
        auto& c = criterion(6, "single-line loss robustness (M = 1001, 15 dB)");
        const auto start = std::chrono::steady_clock::now();
        const AdvantagePair div_intra = advantage_drop(
            Protocol{ReceiverKind::DivisionReceiver, SqueezingStructure::IntraSelfReferred});
        c.check(div_intra.at_transparent - div_intra.at_opaque > 10.0,
                "division+intra drop " +
                    fmt(div_intra.at_transparent - div_intra.at_opaque) +
                    " dB > 10 dB");
        const struct {
            Protocol protocol;
            const char* name;
        } robust[] = {
            {{ReceiverKind::HeterodyneSubtraction, SqueezingStructure::IntraCrossReferred},
             "heterodyne+intra"},
            {{ReceiverKind::HeterodyneSubtraction, SqueezingStructure::CrossLineEntangled},
             "heterodyne+cross"},
            {{ReceiverKind::DivisionReceiver, SqueezingStructure::CrossLineEntangled},
             "division+cross"},
        };
        for (const auto& r : robust) {
            const AdvantagePair pair = advantage_drop(r.protocol);
            const double drop = pair.at_transparent - pair.at_opaque;
            c.check(drop <= 1.5, std::string(r.name) + " drop " + fmt(drop) +
                                     " dB <= 1.5 dB");
        }
        const double elapsed = seconds_since(start);
        c.check(elapsed <= 5.0, "runtime " + fmt(elapsed) + " s <= 5 s");
    }

    {  // 7. SNR_C*^2 magnitude at the reference parameters
        auto& c = criterion(7, "SNR_C*^2 = P T / (M^2 hbar Omega_c) magnitude");
        const double snr_c = classical_optimum_snr_sq(0.015, 1.0, 1001, carrier);
        c.check(std::abs(snr_c - 1.18e11) <= 0.01 * 1.18e11,
                "SNR_C*^2 = " + fmt(snr_c) + " = 1.18e11 +- 1%");
        const double direct = 0.015 * 1.0 / (1001.0 * 1001.0 * photon_energy(carrier));
        c.check(snr_c == direct, "matches the direct constant evaluation");
    }

    {  // 8. phase-noise reduction
        auto& c = criterion(8, "phase-noise form reduces at delta = 0 and flips at pi/2");
        ProtocolParams p;
        p.lines = 1001;
        p.a_sq = 2.0;
        p.b_sq = 3.0;
        p.gain_a = g15;
        p.gain_b = db_to_linear(9.0);
        p.delta = 0.0;
        const double clean = asymptotic_snr(
            Protocol{ReceiverKind::HeterodyneSubtraction, SqueezingStructure::IntraCrossReferred},
            p);
        const double rel0 = std::abs(phase_noise_snr(p) - clean) / clean;
        c.check(rel0 <= 1e-12, "delta = 0 reproduces the clean form, rel " +
                                   fmt(rel0));
        p.delta = constants::pi / 2.0;
        const double flipped = p.a_sq * p.b_sq /
                               (p.lines * (p.a_sq * p.gain_b + p.b_sq * p.gain_a));
        const double rel1 = std::abs(phase_noise_snr(p) - flipped) / flipped;
        c.check(rel1 <= 1e-12, "delta = pi/2 swaps 1/G for G, rel " + fmt(rel1));
        bool kernels = true;
        for (double g : {1.0, 4.0, g15})
            if (std::abs(rotated_pair_variance(g, constants::pi / 2.0) - g) > 1e-12 * g)
                kernels = false;
        c.check(kernels, "every antisqueezed kernel equals G at pi/2");
    }

    {  // 9. local/global bridge
        auto& c = criterion(9, "global = c(kappa) x local across receivers and kappa");
        double worst = 0.0;
        for (const auto receiver :
             {ReceiverKind::DivisionReceiver, ReceiverKind::HeterodyneSubtraction}) {
            for (int k = 1; k <= 9; ++k) {
                const double kappa = k / 10.0;
                ScenarioSpec spec;
                spec.protocol = Protocol{receiver, SqueezingStructure::CrossLineEntangled};
                spec.n_half = 500;
                spec.a_sq = 1.0;
                spec.b_sq = 1.0;
                spec.gain_a = g15;
                spec.gain_b = g15;
                spec.line = 7;
                spec.kappa = kappa;
                const ScenarioResult res = evaluate_scenario(spec);
                const double bridged = local_to_global(receiver, kappa) * res.local_snr_sq;
                worst = std::max(worst,
                                 std::abs(res.global_snr_sq - bridged) / res.global_snr_sq);
            }
        }
        c.check(worst <= 1e-10, "worst relative error " + fmt(worst) + " <= 1e-10");
    }

    {  // 10. optimizer sanity
        auto& c = criterion(10, "optimal power split recovers the symmetric optimum");
        const double per_line = 1.179e14 / 1001.0;
        for (const ConstraintKind constraint :
             {ConstraintKind::SamplePower, ConstraintKind::DetectorPower}) {
            for (double kappa : {0.1, 0.5, 1.0}) {
                const auto opt = optimize_power_split(
                    Protocol{ReceiverKind::DivisionReceiver,
                             SqueezingStructure::CrossLineEntangled},
                    constraint, per_line, g15, g15, kappa, 500, 7, SplitObjective::ExactLocal);
                c.check(std::abs(opt.fraction - 0.5) <= 1e-3,
                        std::string("division ") +
                            (constraint == ConstraintKind::SamplePower ? "sample" : "detector") +
                            " kappa " + fmt(kappa) + ": f* = " +
                            fmt(opt.fraction));
            }
        }
        for (double kappa : {0.1, 0.5, 1.0}) {
            // leading-order objective: the exact one shifts f* by O((1-kappa) G/M)
            // through the environment term, which only enters the LO comb
            const auto opt = optimize_power_split(
                Protocol{ReceiverKind::HeterodyneSubtraction,
                         SqueezingStructure::CrossLineEntangled},
                ConstraintKind::DetectorPower, per_line, g15, g15, kappa, 500, 7,
                SplitObjective::AsymptoticLocal);
            c.check(std::abs(opt.fraction - 0.5) <= 1e-3,
                    "heterodyne detector kappa " + fmt(kappa) + ": f* = " +
                        fmt(opt.fraction));
        }
    }

    int failed = 0;
    std::printf("acceptance criteria\n");
    for (const auto& c : criteria) {
        std::printf("[%s] criterion %2d: %s\n", c.pass ? "PASS" : "FAIL", c.id,
                    c.summary.c_str());
        for (const auto& note : c.notes) std::printf("%s\n", note.c_str());
        if (!c.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
                criteria.size());
    return failed;
}
