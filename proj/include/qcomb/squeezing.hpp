#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qcomb/comb.hpp"
#include "qcomb/sample.hpp"

namespace qcomb {

/// How the two-mode-squeezed pairs are laid out over the noise-mode lattice.
enum class SqueezingStructure {
    Classical,           // no squeezing, every noise mode in vacuum
    IntraSelfReferred,   // sideband pairs centered on each comb's own lines (division receiver)
    IntraCrossReferred,  // sideband pairs centered on the other comb's lines (heterodyne receiver)
    CrossLineEntangled,  // pairs mirrored about the carrier across the whole comb
};

inline const char* to_string(SqueezingStructure s) {
    switch (s) {
        case SqueezingStructure::Classical: return "classical";
        case SqueezingStructure::IntraSelfReferred: return "intra-self";
        case SqueezingStructure::IntraCrossReferred: return "intra-cross";
        case SqueezingStructure::CrossLineEntangled: return "cross-line";
    }
    return "?";
}

inline const char* to_string(ReceiverKind r) {
    return r == ReceiverKind::HeterodyneSubtraction ? "heterodyne" : "division";
}

/// Residual variance of one half of a TMSV whose partner is traced out,
/// G' = (G + 1/G)/2. Equals 1 only for G = 1.
inline double amplification_noise(double gain) {
    if (gain < 1.0) throw std::invalid_argument("amplification_noise: gain must be >= 1");
    return 0.5 * (gain + 1.0 / gain);
}

/// Variance of e^{i theta} a1 + e^{-i theta} a2^dag over a TMSV pair:
/// [-(G^2-1) cos(2 theta) + (G^2+1)] / (2G). 1/G at theta=0, G at theta=pi/2.
inline double rotated_pair_variance(double gain, double theta) {
    if (gain < 1.0) throw std::invalid_argument("rotated_pair_variance: gain must be >= 1");
    return (-(gain * gain - 1.0) * std::cos(2.0 * theta) + (gain * gain + 1.0)) / (2.0 * gain);
}

/// Per-comb squeezing description: pairing structure plus per-line linear gains.
struct SqueezingSpec {
    SqueezingStructure structure = SqueezingStructure::Classical;
    int n_half = 0;
    std::vector<double> gains;  // linear, indexed n + n_half

    SqueezingSpec(SqueezingStructure structure_, int n_half_, std::vector<double> gains_)
        : structure(structure_), n_half(n_half_), gains(std::move(gains_)) {
        if (n_half < 0) throw std::invalid_argument("SqueezingSpec: n_half must be >= 0");
        if (gains.size() != static_cast<size_t>(2 * n_half + 1))
            throw std::invalid_argument("SqueezingSpec: need 2*n_half+1 gains");
        for (double g : gains)
            if (g < 1.0) throw std::invalid_argument("SqueezingSpec: gains must be >= 1 (linear)");
        if (structure == SqueezingStructure::Classical) {
            for (double g : gains)
                if (g != 1.0)
                    throw std::invalid_argument("SqueezingSpec: classical structure forces G = 1");
        }
        if (structure == SqueezingStructure::CrossLineEntangled) {
            // a pair mirrored about the carrier shares a single gain
            for (int n = 1; n <= n_half; ++n)
                if (gain(n) != gain(-n))
                    throw std::invalid_argument(
                        "SqueezingSpec: cross-line gains must satisfy G_n = G_{-n}");
        }
    }

    static SqueezingSpec classical(int n_half) {
        return SqueezingSpec(SqueezingStructure::Classical, n_half,
                             std::vector<double>(static_cast<size_t>(2 * n_half + 1), 1.0));
    }

    static SqueezingSpec uniform(SqueezingStructure structure, int n_half, double gain) {
        return SqueezingSpec(structure, n_half,
                             std::vector<double>(static_cast<size_t>(2 * n_half + 1), gain));
    }

    double gain(int n) const { return gains[static_cast<size_t>(n + n_half)]; }

    /// Gain attached to the pair containing line n (mirrored pairs share |n|).
    double pair_gain(int n) const {
        return structure == SqueezingStructure::CrossLineEntangled ? gain(std::abs(n)) : gain(n);
    }

    bool is_classical() const { return structure == SqueezingStructure::Classical; }
};

enum class CombId { A, B };

/// Involutive map from a lattice site to its TMSV partner.
///
/// Sites whose partner falls outside the lattice, and the degenerate center
/// sites that would pair with themselves, are treated downstream as the
/// traced-out half of a TMSV (thermal with variance G' per quadrature).
struct PairingRule {
    SqueezingStructure structure = SqueezingStructure::Classical;
    CombId comb = CombId::A;
    int n_half = 0;

    struct Partner {
        int n;
        int j;
    };

    std::optional<Partner> partner(int n, int j) const {
        int pn = n, pj = j;
        switch (structure) {
            case SqueezingStructure::Classical:
                return std::nullopt;
            case SqueezingStructure::CrossLineEntangled:
                pn = -n;
                pj = -j;
                break;
            case SqueezingStructure::IntraSelfReferred:
                pj = (comb == CombId::A) ? 2 * n - j : -j;
                break;
            case SqueezingStructure::IntraCrossReferred:
                pj = (comb == CombId::A) ? -j : 2 * n - j;
                break;
        }
        if (pn == n && pj == j) return std::nullopt;        // degenerate center site
        if (std::abs(pj) > 2 * n_half) return std::nullopt;  // partner beyond lattice edge
        return Partner{pn, pj};
    }
};

/// Pairing map for one comb. The intra-line layouts are receiver specific:
/// self-referred belongs to the division receiver, cross-referred to the
/// heterodyne receiver, and asking for the other combination is an error.
inline PairingRule pairing_rule(SqueezingStructure structure, CombId comb, ReceiverKind receiver,
                                int n_half) {
    if (structure == SqueezingStructure::Classical)
        throw std::invalid_argument("pairing_rule: classical comb has no pairing");
    if (structure == SqueezingStructure::IntraSelfReferred &&
        receiver != ReceiverKind::DivisionReceiver)
        throw std::invalid_argument(
            "pairing_rule: self-referred intra-line squeezing is the division-receiver layout");
    if (structure == SqueezingStructure::IntraCrossReferred &&
        receiver != ReceiverKind::HeterodyneSubtraction)
        throw std::invalid_argument(
            "pairing_rule: cross-referred intra-line squeezing is the heterodyne layout");
    return PairingRule{structure, comb, n_half};
}

/// Quadrature covariance of the whole lattice, vacuum normalized to 1 per
/// quadrature. Mode k occupies rows/columns (2k, 2k+1) = (q_k, p_k).
///
/// A TMSV pair (1,2) of gain G carries diagonal (G+1/G)/2 and off-diagonal
/// -(G-1/G)/2 between q1,q2 and +(G-1/G)/2 between p1,p2, so that
/// var(q1+q2) = var(p1-p2) = 1/G and var(q1-q2) = var(p1+p2) = G.
/// Environment modes are thermal with 1 + 2E_n per quadrature.
struct CovarianceModel {
    int n_half = 0;
    Eigen::SparseMatrix<double> matrix;

    int dimension() const { return static_cast<int>(matrix.rows()); }

    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix); }
};

inline CovarianceModel build_covariance(const ModeLattice& lattice, const SqueezingSpec& sqz_a,
                                        const SqueezingSpec& sqz_b, ReceiverKind receiver,
                                        const SampleSpec& sample) {
    if (sqz_a.n_half != lattice.n_half || sqz_b.n_half != lattice.n_half ||
        sample.n_half != lattice.n_half)
        throw std::invalid_argument("build_covariance: inconsistent dimensions");

    const int dim = lattice.quadrature_dimension();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(dim) + 4u * static_cast<size_t>(lattice.block_size()));

    auto fill_comb = [&](ModeLattice::Block block, const SqueezingSpec& sqz) {
        if (sqz.is_classical()) {
            for (int n = -lattice.n_half; n <= lattice.n_half; ++n)
                for (int j = -2 * lattice.n_half; j <= 2 * lattice.n_half; ++j) {
                    const int q = 2 * lattice.mode_index(block, n, j);
                    trip.emplace_back(q, q, 1.0);
                    trip.emplace_back(q + 1, q + 1, 1.0);
                }
            return;
        }
        const PairingRule rule = pairing_rule(
            sqz.structure, block == ModeLattice::CombA ? CombId::A : CombId::B, receiver,
            lattice.n_half);
        for (int n = -lattice.n_half; n <= lattice.n_half; ++n) {
            for (int j = -2 * lattice.n_half; j <= 2 * lattice.n_half; ++j) {
                const double g = sqz.pair_gain(n);
                const double diag = amplification_noise(g);
                const int q = 2 * lattice.mode_index(block, n, j);
                const auto p = rule.partner(n, j);
                if (!p) {
                    // traced-out half of a TMSV: thermal G' per quadrature
                    trip.emplace_back(q, q, diag);
                    trip.emplace_back(q + 1, q + 1, diag);
                    continue;
                }
                trip.emplace_back(q, q, diag);
                trip.emplace_back(q + 1, q + 1, diag);
                const int qp = 2 * lattice.mode_index(block, p->n, p->j);
                const double off = 0.5 * (g - 1.0 / g);
                trip.emplace_back(q, qp, -off);
                trip.emplace_back(q + 1, qp + 1, off);
            }
        }
    };

    fill_comb(ModeLattice::CombA, sqz_a);
    fill_comb(ModeLattice::CombB, sqz_b);
    for (int n = -lattice.n_half; n <= lattice.n_half; ++n) {
        const double nu = 1.0 + 2.0 * sample.thermal_at(n);
        for (int j = -2 * lattice.n_half; j <= 2 * lattice.n_half; ++j) {
            const int q = 2 * lattice.mode_index(ModeLattice::Environment, n, j);
            trip.emplace_back(q, q, nu);
            trip.emplace_back(q + 1, q + 1, nu);
        }
    }

    CovarianceModel model;
    model.n_half = lattice.n_half;
    model.matrix.resize(dim, dim);
    model.matrix.setFromTriplets(trip.begin(), trip.end());
    return model;
}

}  // namespace qcomb
