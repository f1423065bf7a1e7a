#include "qcomb/receivers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qcomb/snr.hpp"

using namespace qcomb;

namespace {

CombSpec make_comb(int n_half, cd amp, CombRole role = CombRole::Signal) {
    return uniform_comb(n_half, amp, role, 2.0 * constants::pi * 1.0e8,
                        2.0 * constants::pi * 1.0e3, carrier_from_wavelength(1563e-9), 1.0);
}

cd coeff(const NoiseCoefficients& nc, int block, int n, int j, bool creation) {
    const auto it = nc.terms.find(ModeKey{block, n, j});
    if (it == nc.terms.end()) return 0.0;
    return creation ? it->second.second : it->second.first;
}

}  // namespace

TEST(MeanSpectrum, DivisionCarriesKappaHeterodyneCarriesSqrtKappa) {
    const int n_half = 8;
    const double a = 1.5, b = 2.5;
    const CombSpec comb_a = make_comb(n_half, a);
    const CombSpec comb_b = make_comb(n_half, b, CombRole::LocalOscillator);

    const auto transparent = mean_spectrum(ReceiverKind::DivisionReceiver, comb_a, comb_b,
                                           SampleSpec::transparent(n_half), 3);
    EXPECT_NEAR(transparent.first.real(), a * b, 1e-12);
    EXPECT_NEAR(transparent.second.real(), -a * b, 1e-12);

    const double kappa = 0.36;
    const auto div = mean_spectrum(ReceiverKind::DivisionReceiver, comb_a, comb_b,
                                   single_line_sample(n_half, 3, kappa), 3);
    EXPECT_NEAR(div.first.real(), a * b * (kappa + 1.0) / 2.0, 1e-12);

    const auto het = mean_spectrum(ReceiverKind::HeterodyneSubtraction, comb_a, comb_b,
                                   single_line_sample(n_half, 3, kappa), 3);
    // d_m = I_A - I_B = 2 I_A has mean (sqrt(kappa) + 1) A B
    EXPECT_NEAR(2.0 * het.first.real(), (std::sqrt(kappa) + 1.0) * a * b, 1e-12);

    EXPECT_THROW(mean_spectrum(ReceiverKind::DivisionReceiver, comb_a, comb_b,
                               SampleSpec::transparent(n_half), 9),
                 std::invalid_argument);
}

TEST(MeanSpectrum, SensitivityToSqrtKappaAtFullLoss) {
    // d mean / d sqrt(kappa) at kappa -> 0: zero for division, finite for heterodyne
    const int n_half = 4;
    const CombSpec comb_a = make_comb(n_half, 1.0);
    const CombSpec comb_b = make_comb(n_half, 1.0, CombRole::LocalOscillator);
    const double eps = 1e-5;  // sqrt(kappa) step
    auto mean_at = [&](ReceiverKind receiver, double sqrt_kappa) {
        const auto m = mean_spectrum(receiver, comb_a, comb_b,
                                     single_line_sample(n_half, 2, sqrt_kappa * sqrt_kappa), 2);
        return (m.first - m.second).real();
    };
    const double div_slope = (mean_at(ReceiverKind::DivisionReceiver, eps) -
                              mean_at(ReceiverKind::DivisionReceiver, 0.0)) /
                             eps;
    const double het_slope = (mean_at(ReceiverKind::HeterodyneSubtraction, eps) -
                              mean_at(ReceiverKind::HeterodyneSubtraction, 0.0)) /
                             eps;
    EXPECT_NEAR(div_slope, 0.0, 1e-4);
    EXPECT_NEAR(het_slope, 1.0, 1e-4);
}

TEST(RatioMean, CalibrationProperties) {
    const int n_half = 6;
    const CombSpec comb_a = make_comb(n_half, 2.0);
    const CombSpec comb_b = make_comb(n_half, 3.0, CombRole::LocalOscillator);
    SampleSpec sample = SampleSpec::transparent(n_half);
    sample.set_line(2, 0.4, 0.0);
    sample.set_line(-2, 0.9, 0.0);
    EXPECT_NEAR(ratio_mean(comb_a, comb_b, sample, 2).real(), (0.4 + 0.9) / 2.0, 1e-13);

    // single-side comb: A_l B_l^* = 0 for l < 0 makes r_m = kappa_m
    CombSpec one_side = comb_a;
    for (int n = -n_half; n < 0; ++n) one_side.set_amplitude(n, 0.0);
    EXPECT_NEAR(ratio_mean(one_side, comb_b, sample, 2).real(), 0.4, 1e-13);

    // amplitude rescaling leaves the calibrated ratio unchanged
    CombSpec scaled_a = comb_a, scaled_b = comb_b;
    for (int n = -n_half; n <= n_half; ++n) {
        scaled_a.set_amplitude(n, 10.0 * comb_a.amplitude(n));
        scaled_b.set_amplitude(n, 10.0 * comb_b.amplitude(n));
    }
    EXPECT_NEAR(ratio_mean(scaled_a, scaled_b, sample, 2).real(),
                ratio_mean(comb_a, comb_b, sample, 2).real(), 1e-13);

    // opposite-side products cancel -> ratio undefined
    CombSpec cancel = comb_a;
    cancel.set_amplitude(-2, -2.0);
    EXPECT_THROW(ratio_mean(cancel, comb_b, SampleSpec::transparent(n_half), 2),
                 std::invalid_argument);
}

TEST(NoiseCoefficients, HeterodyneLosslessClassicalEntries) {
    const int n_half = 5, m = 2;
    const CombSpec comb_a = make_comb(n_half, cd(1.25, 0.0));
    const CombSpec comb_b = make_comb(n_half, cd(2.5, 0.0), CombRole::LocalOscillator);
    const auto nc = noise_coefficients(ReceiverKind::HeterodyneSubtraction, comb_a, comb_b,
                                       SampleSpec::transparent(n_half), m);
    for (int n = -n_half; n <= n_half; ++n) {
        EXPECT_EQ(coeff(nc, ModeLattice::CombA, n, m, false), std::conj(comb_b.amplitude(n)));
        EXPECT_EQ(coeff(nc, ModeLattice::CombB, n, n + m, false),
                  std::conj(comb_a.amplitude(n)));
        // conjugation symmetry between annihilation and creation blocks
        EXPECT_EQ(coeff(nc, ModeLattice::CombA, n, -m, true),
                  std::conj(coeff(nc, ModeLattice::CombA, n, m, false)));
        // lossless: no environment coupling
        EXPECT_EQ(coeff(nc, ModeLattice::Environment, n, m, false), cd(0.0, 0.0));
    }
    EXPECT_THROW(noise_coefficients(ReceiverKind::HeterodyneSubtraction, comb_a, comb_b,
                                    SampleSpec::transparent(n_half), 0),
                 std::invalid_argument);
}

TEST(NoiseCoefficients, DivisionCrossBeatCancellationAtUniformAbsorption) {
    const int n_half = 5, m = 2;
    const CombSpec comb_a = make_comb(n_half, 1.5);
    const CombSpec comb_b = make_comb(n_half, 0.5, CombRole::LocalOscillator);
    SampleSpec uniform = SampleSpec::transparent(n_half);
    for (int n = -n_half; n <= n_half; ++n) uniform.set_line(n, 0.6, 0.0);
    const auto nc = noise_coefficients(ReceiverKind::DivisionReceiver, comb_a, comb_b, uniform, m);
    EXPECT_NEAR(nc.ratio.real(), 0.6, 1e-13);
    for (int n = -n_half; n <= n_half; ++n) {
        if (n != 0) {
            // kappa_n = r_m: every cross-beating weight vanishes
            EXPECT_NEAR(std::abs(coeff(nc, ModeLattice::CombB, n, n + m, false)), 0.0, 1e-13);
            EXPECT_NEAR(std::abs(coeff(nc, ModeLattice::CombA, n, m, false)), 0.0, 1e-13);
        }
        EXPECT_GT(std::abs(coeff(nc, ModeLattice::Environment, n, m, false)), 0.0);
    }

    const auto lossless = noise_coefficients(ReceiverKind::DivisionReceiver, comb_a, comb_b,
                                             SampleSpec::transparent(n_half), m);
    for (const auto& [key, cds] : lossless.terms)
        if (key.block == ModeLattice::Environment) {
            EXPECT_EQ(cds.first, cd(0.0, 0.0));
            EXPECT_EQ(cds.second, cd(0.0, 0.0));
        }
}

TEST(VarianceClosedForm, HeterodyneIntraLosslessShotNoise) {
    const int n_half = 25;
    const int lines = 2 * n_half + 1;
    const double a = 2.0, g = db_to_linear(12.0);
    const CombSpec comb_a = make_comb(n_half, a);
    const CombSpec comb_b = make_comb(n_half, a, CombRole::LocalOscillator);
    const auto sqz_a = SqueezingSpec::uniform(SqueezingStructure::IntraCrossReferred, n_half, g);
    const auto sqz_b = SqueezingSpec::uniform(SqueezingStructure::IntraCrossReferred, n_half, g);
    const double var =
        variance_closed_form(ReceiverKind::HeterodyneSubtraction, comb_a, comb_b, sqz_a, sqz_b,
                             SampleSpec::transparent(n_half), 3);
    EXPECT_NEAR(var, 2.0 * lines * a * a / g, 1e-10 * var);

    // classical limit: var = M (A^2 + B^2)
    const double var_classical =
        variance_closed_form(ReceiverKind::HeterodyneSubtraction, comb_a, comb_b,
                             SqueezingSpec::classical(n_half), SqueezingSpec::classical(n_half),
                             SampleSpec::transparent(n_half), 3);
    EXPECT_NEAR(var_classical, lines * 2.0 * a * a, 1e-10 * var_classical);
}

TEST(VarianceClosedForm, DivisionIntraLosslessMatchesAsymptoticLimit) {
    const int n_half = 40;
    const int lines = 2 * n_half + 1;
    const double a = 3.0, g = db_to_linear(15.0);
    const CombSpec comb_a = make_comb(n_half, a);
    const CombSpec comb_b = make_comb(n_half, a, CombRole::LocalOscillator);
    const auto sqz = SqueezingSpec::uniform(SqueezingStructure::IntraSelfReferred, n_half, g);
    const auto stats = ratio_statistics(comb_a, comb_b, sqz, sqz, SampleSpec::transparent(n_half),
                                        5);
    // lossless: var(r_m) = 2M/(A^2 G), i.e. local SNR^2 = A^2 G / (2M)
    EXPECT_NEAR(stats.variance, 2.0 * lines / (a * a * g), 1e-10 * stats.variance);
    EXPECT_NEAR(local_snr(stats), a * a * g / (2.0 * lines), 1e-10 * local_snr(stats));
    ProtocolParams p;
    p.lines = lines;
    p.a_sq = a * a;
    p.b_sq = a * a;
    p.gain_a = g;
    p.gain_b = g;
    p.kappa = 1.0;
    EXPECT_NEAR(local_snr(stats),
                asymptotic_snr(Protocol{ReceiverKind::DivisionReceiver,
                                        SqueezingStructure::IntraSelfReferred},
                               p),
                1e-10);
}

TEST(VarianceClosedForm, DivisionLossRobustnessContrast) {
    // single fully absorbed line, M = 1001, 15 dB: the self-referred comb's
    // mismatch noise dwarfs the entangled comb's
    const int n_half = 500;
    const double g = db_to_linear(15.0);
    const CombSpec comb_a = make_comb(n_half, 1.0);
    const CombSpec comb_b = make_comb(n_half, 1.0, CombRole::LocalOscillator);
    const SampleSpec sample = single_line_sample(n_half, 7, 0.0);
    const auto intra = SqueezingSpec::uniform(SqueezingStructure::IntraSelfReferred, n_half, g);
    const auto cross = SqueezingSpec::uniform(SqueezingStructure::CrossLineEntangled, n_half, g);
    const double var_intra =
        ratio_statistics(comb_a, comb_b, intra, intra, sample, 7).variance;
    const double var_cross =
        ratio_statistics(comb_a, comb_b, cross, cross, sample, 7).variance;
    EXPECT_GT(var_intra, 10.0 * var_cross);
}

TEST(VarianceClosedForm, AmplifiedTermsAppearUnderLoss) {
    const int n_half = 30;
    const double a = 1.0, g = 25.0;
    const CombSpec comb_a = make_comb(n_half, a);
    const CombSpec comb_b = make_comb(n_half, a, CombRole::LocalOscillator);
    const auto sqz = SqueezingSpec::uniform(SqueezingStructure::IntraSelfReferred, n_half, g);
    const double lossless = ratio_statistics(comb_a, comb_b, sqz, sqz,
                                             SampleSpec::transparent(n_half), 4)
                                .variance;
    const double lossy =
        ratio_statistics(comb_a, comb_b, sqz, sqz, single_line_sample(n_half, 4, 0.0), 4)
            .variance;
    // the (1 - kappa)^2 G' mismatch noise must dominate the squeezed floor
    EXPECT_GT(lossy, 15.0 * lossless);
}

TEST(VarianceClosedForm, PhaseNoiseMonotoneForHeterodyneIntra) {
    const int n_half = 20;
    const CombSpec comb_a = make_comb(n_half, 1.0);
    const CombSpec comb_b = make_comb(n_half, 1.0, CombRole::LocalOscillator);
    const auto sqz = SqueezingSpec::uniform(SqueezingStructure::IntraCrossReferred, n_half, 10.0);
    double prev = -1.0;
    for (double theta = 0.0; theta <= constants::pi / 2.0 + 1e-9;
         theta += constants::pi / 20.0) {
        SampleSpec sample = SampleSpec::transparent(n_half);
        for (int n = -n_half; n <= n_half; ++n) sample.set_line(n, 1.0, theta);
        const double var =
            differential_statistics(comb_a, comb_b, sqz, sqz, sample, 2).variance;
        EXPECT_GE(var, prev);
        prev = var;
    }
}

TEST(VarianceClosedForm, StrongLoMatchesExplicitLimit) {
    const int n_half = 12, m = 3;
    const double kappa = 0.3, g = db_to_linear(10.0);
    const CombSpec comb_a = make_comb(n_half, 1.7);
    const CombSpec lo_direction = make_comb(n_half, 1.0, CombRole::LocalOscillator);
    const SampleSpec sample = single_line_sample(n_half, m, kappa);
    const auto sqz_a = SqueezingSpec::uniform(SqueezingStructure::CrossLineEntangled, n_half, g);
    const auto stats = differential_statistics(comb_a, lo_direction, sqz_a,
                                               SqueezingSpec::classical(n_half), sample, m, true);
    // independent evaluation of the B >> A limit with a unit LO direction
    double expected = sample.kappa_at(0) / g;
    for (int n = -n_half; n <= n_half; ++n) expected += 1.0 - sample.kappa_at(n);
    for (int n = 1; n <= n_half; ++n) {
        const double sp = std::sqrt(sample.kappa_at(n)), sm = std::sqrt(sample.kappa_at(-n));
        expected += 0.5 * ((sp - sm) * (sp - sm) * g + (sp + sm) * (sp + sm) / g);
    }
    EXPECT_NEAR(stats.variance, expected, 1e-12 * expected);
    EXPECT_TRUE(stats.strong_lo);
}

TEST(PrintedFormulas, GenericLineFormsTrackTheExactPath) {
    // the printed per-line forms ignore the O(1/M) collisions at the carrier
    // line; the heterodyne ones are exact for real center amplitudes
    const int n_half = 50, m = 4;
    const double g = db_to_linear(13.0);
    const CombSpec comb_a = make_comb(n_half, 1.4);
    const CombSpec comb_b = make_comb(n_half, 0.8, CombRole::LocalOscillator);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    SampleSpec sample = SampleSpec::transparent(n_half);
    for (int n = -n_half; n <= n_half; ++n) sample.set_line(n, uni(rng), 0.0);

    const auto intra_d = SqueezingSpec::uniform(SqueezingStructure::IntraSelfReferred, n_half, g);
    const double exact_di =
        ratio_statistics(comb_a, comb_b, intra_d, intra_d, sample, m).variance;
    const double printed_di =
        printed_variance_division_intra(comb_a, comb_b, intra_d, intra_d, sample, m);
    EXPECT_NEAR(printed_di, exact_di, 20.0 / (2 * n_half + 1) * exact_di);
    EXPECT_GT(std::abs(printed_di - exact_di), 0.0);

    const auto cross = SqueezingSpec::uniform(SqueezingStructure::CrossLineEntangled, n_half, g);
    const double exact_dc = ratio_statistics(comb_a, comb_b, cross, cross, sample, m).variance;
    const double printed_dc =
        printed_variance_division_cross(comb_a, comb_b, cross, cross, sample, m);
    EXPECT_NEAR(printed_dc, exact_dc, 20.0 / (2 * n_half + 1) * exact_dc);

    const auto intra_h = SqueezingSpec::uniform(SqueezingStructure::IntraCrossReferred, n_half, g);
    for (int n = -n_half; n <= n_half; ++n) sample.set_line(n, uni(rng), 0.4 * uni(rng) - 0.2);
    const double exact_hi =
        differential_statistics(comb_a, comb_b, intra_h, intra_h, sample, m).variance;
    const double printed_hi =
        printed_variance_heterodyne_intra(comb_a, comb_b, intra_h, intra_h, sample);
    EXPECT_NEAR(printed_hi, exact_hi, 1e-12 * exact_hi);

    const double exact_hc =
        differential_statistics(comb_a, comb_b, cross, cross, sample, m).variance;
    const double printed_hc =
        printed_variance_heterodyne_cross(comb_a, comb_b, cross, cross, sample);
    EXPECT_NEAR(printed_hc, exact_hc, 1e-12 * exact_hc);
}

TEST(Rejections, UnproductiveCombinationsAndDomainErrors) {
    const int n_half = 4;
    const CombSpec comb_a = make_comb(n_half, 1.0);
    const CombSpec comb_b = make_comb(n_half, 1.0, CombRole::LocalOscillator);
    const auto classical = SqueezingSpec::classical(n_half);
    const SampleSpec sample = SampleSpec::transparent(n_half);

    EXPECT_THROW(photocurrent_statistics(ReceiverKind::HeterodyneSubtraction, Processing::Ratio,
                                         comb_a, comb_b, classical, classical, sample, 2),
                 std::invalid_argument);
    EXPECT_THROW(photocurrent_statistics(ReceiverKind::DivisionReceiver,
                                         Processing::Subtraction, comb_a, comb_b, classical,
                                         classical, sample, 2),
                 std::invalid_argument);
    EXPECT_NO_THROW(photocurrent_statistics(ReceiverKind::DivisionReceiver, Processing::Ratio,
                                            comb_a, comb_b, classical, classical, sample, 2));

    // intra-line variants are receiver specific
    const auto self_ref = SqueezingSpec::uniform(SqueezingStructure::IntraSelfReferred, n_half,
                                                 4.0);
    EXPECT_THROW(differential_statistics(comb_a, comb_b, self_ref, self_ref, sample, 2),
                 std::invalid_argument);
    const auto cross_ref = SqueezingSpec::uniform(SqueezingStructure::IntraCrossReferred, n_half,
                                                  4.0);
    EXPECT_THROW(ratio_statistics(comb_a, comb_b, cross_ref, cross_ref, sample, 2),
                 std::invalid_argument);

    // division + intra-line squeezing has no closed form for complex combs
    CombSpec complex_a = comb_a;
    complex_a.set_amplitude(1, cd(0.3, 0.9));
    EXPECT_THROW(ratio_statistics(complex_a, comb_b, self_ref, self_ref, sample, 2),
                 std::invalid_argument);
    // ... but the entangled-comb form handles them
    const auto cross = SqueezingSpec::uniform(SqueezingStructure::CrossLineEntangled, n_half, 4.0);
    EXPECT_NO_THROW(ratio_statistics(complex_a, comb_b, cross, cross, sample, 2));

    EXPECT_THROW(ratio_statistics(comb_a, comb_b, classical, classical, sample, 0),
                 std::invalid_argument);
    EXPECT_THROW(ratio_statistics(comb_a, comb_b, classical, classical, sample, n_half + 1),
                 std::invalid_argument);
}

TEST(VarianceClosedForm, DivisionIsPhaseInsensitive) {
    // both combs pick up the same per-line phase through the shared arm, so
    // neither the ratio mean nor its variance depends on theta
    const int n_half = 15;
    const CombSpec comb_a = make_comb(n_half, 1.1);
    const CombSpec comb_b = make_comb(n_half, 0.8, CombRole::LocalOscillator);
    const auto sqz = SqueezingSpec::uniform(SqueezingStructure::IntraSelfReferred, n_half, 8.0);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    SampleSpec flat = SampleSpec::transparent(n_half);
    SampleSpec shifted = SampleSpec::transparent(n_half);
    for (int n = -n_half; n <= n_half; ++n) {
        const double k = uni(rng);
        flat.set_line(n, k, 0.0);
        shifted.set_line(n, k, 0.6 * uni(rng) - 0.3);
    }
    const auto a = ratio_statistics(comb_a, comb_b, sqz, sqz, flat, 4);
    const auto b = ratio_statistics(comb_a, comb_b, sqz, sqz, shifted, 4);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.variance, b.variance);
}

TEST(ClassicalReduction, AllStructuresAgreeAtUnitGain) {
    const int n_half = 9;
    const CombSpec comb_a = make_comb(n_half, 1.2);
    const CombSpec comb_b = make_comb(n_half, 0.7, CombRole::LocalOscillator);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    SampleSpec sample = SampleSpec::transparent(n_half);
    for (int n = -n_half; n <= n_half; ++n) sample.set_line(n, uni(rng), 0.0);

    const auto classical = SqueezingSpec::classical(n_half);
    const auto self_unit = SqueezingSpec::uniform(SqueezingStructure::IntraSelfReferred, n_half,
                                                  1.0);
    const auto cross_unit =
        SqueezingSpec::uniform(SqueezingStructure::CrossLineEntangled, n_half, 1.0);
    const double v0 = ratio_statistics(comb_a, comb_b, classical, classical, sample, 3).variance;
    const double v1 = ratio_statistics(comb_a, comb_b, self_unit, self_unit, sample, 3).variance;
    const double v2 =
        ratio_statistics(comb_a, comb_b, cross_unit, cross_unit, sample, 3).variance;
    EXPECT_NEAR(v0, v1, 1e-12 * v0);
    EXPECT_NEAR(v0, v2, 1e-12 * v0);
}
