#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qcomb/constants.hpp"

namespace qcomb {

using cd = std::complex<double>;

/// Which detection topology the dual-comb receiver uses.
enum class ReceiverKind {
    HeterodyneSubtraction,  // signal probes the sample, then interferes with the LO comb
    DivisionReceiver,       // combs interfere first, one output arm probes the sample
};

enum class CombRole {
    Signal,           // line spacing rep_rate + rep_offset
    LocalOscillator,  // line spacing rep_rate
};

/// A frequency comb with 2*n_half+1 lines and dimensionless per-line amplitudes.
///
/// Line n sits at carrier + n*(rep_rate + rep_offset) for the signal comb and
/// carrier + n*rep_rate for the LO comb; amplitudes are stored for
/// n = -n_half..n_half at index n + n_half.
struct CombSpec {
    int n_half = 0;
    std::vector<cd> line_amplitudes;
    double rep_rate = 0.0;    // omega_r, rad/s
    double rep_offset = 0.0;  // delta omega_r, rad/s
    double carrier = 0.0;     // Omega_c, rad/s
    double duration = 0.0;    // acquisition time T, s
    CombRole role = CombRole::Signal;

    CombSpec(int n_half_, std::vector<cd> amplitudes, double rep_rate_, double rep_offset_,
             double carrier_, double duration_, CombRole role_)
        : n_half(n_half_),
          line_amplitudes(std::move(amplitudes)),
          rep_rate(rep_rate_),
          rep_offset(rep_offset_),
          carrier(carrier_),
          duration(duration_),
          role(role_) {
        if (n_half < 0) throw std::invalid_argument("CombSpec: n_half must be >= 0");
        if (line_amplitudes.size() != static_cast<size_t>(2 * n_half + 1))
            throw std::invalid_argument("CombSpec: need 2*n_half+1 line amplitudes");
        if (rep_offset <= 0.0) throw std::invalid_argument("CombSpec: rep_offset must be > 0");
        if (2.0 * n_half * rep_offset >= rep_rate)
            throw std::invalid_argument("CombSpec: 2*n_half*rep_offset must stay below rep_rate");
        if (carrier <= 0.0) throw std::invalid_argument("CombSpec: carrier must be > 0");
        if (duration <= 0.0) throw std::invalid_argument("CombSpec: duration must be > 0");
    }

    int lines() const { return 2 * n_half + 1; }

    cd amplitude(int n) const { return line_amplitudes[static_cast<size_t>(n + n_half)]; }

    void set_amplitude(int n, cd value) { line_amplitudes[static_cast<size_t>(n + n_half)] = value; }

    bool amplitudes_real(double rel_tol = 1e-9) const {
        double scale = 0.0;
        for (const cd& a : line_amplitudes) scale = std::max(scale, std::abs(a));
        for (const cd& a : line_amplitudes)
            if (std::abs(a.imag()) > rel_tol * std::max(scale, 1.0)) return false;
        return true;
    }
};

/// Uniform comb with every line amplitude equal.
inline CombSpec uniform_comb(int n_half, cd amplitude, CombRole role, double rep_rate,
                             double rep_offset, double carrier, double duration) {
    if (n_half < 0) throw std::invalid_argument("uniform_comb: n_half must be >= 0");
    return CombSpec(n_half, std::vector<cd>(static_cast<size_t>(2 * n_half + 1), amplitude),
                    rep_rate, rep_offset, carrier, duration, role);
}

/// Index bookkeeping for the noise-mode lattice of a dual-comb experiment.
///
/// Each comb carries noise modes indexed (n, j) with n in [-N, N] (line) and
/// j in [-2N, 2N] (sideband detuning in units of the repetition offset), at
/// absolute frequency n*rep_rate + j*rep_offset. Three equally shaped blocks
/// are stored back to back: comb A, comb B, then the loss-channel environment.
struct ModeLattice {
    enum Block : int { CombA = 0, CombB = 1, Environment = 2 };

    int n_half = 0;

    explicit ModeLattice(int n_half_) : n_half(n_half_) {
        if (n_half < 0) throw std::invalid_argument("ModeLattice: n_half must be >= 0");
    }

    int lines() const { return 2 * n_half + 1; }
    int sidebands() const { return 4 * n_half + 1; }
    int block_size() const { return lines() * sidebands(); }
    int total_modes() const { return 3 * block_size(); }
    int quadrature_dimension() const { return 2 * total_modes(); }

    bool contains(int n, int j) const {
        return std::abs(n) <= n_half && std::abs(j) <= 2 * n_half;
    }

    /// Flat mode index; blocks ordered A, B, environment, sites row-major in (n, j).
    int mode_index(Block block, int n, int j) const {
        if (!contains(n, j)) throw std::out_of_range("ModeLattice: site out of range");
        return static_cast<int>(block) * block_size() + (n + n_half) * sidebands() +
               (j + 2 * n_half);
    }

    struct Site {
        Block block;
        int n;
        int j;
    };

    Site site(int index) const {
        if (index < 0 || index >= total_modes()) throw std::out_of_range("ModeLattice: bad index");
        const int block = index / block_size();
        const int rest = index % block_size();
        return Site{static_cast<Block>(block), rest / sidebands() - n_half,
                    rest % sidebands() - 2 * n_half};
    }

    /// Absolute frequency of lattice site (n, j); unique per site when modes do not overlap.
    double frequency(int n, int j, double rep_rate, double rep_offset) const {
        return n * rep_rate + j * rep_offset;
    }
};

inline ModeLattice build_mode_lattice(int n_half) { return ModeLattice(n_half); }

enum class ConstraintKind { SamplePower, DetectorPower };

struct PowerConstraint {
    ConstraintKind kind = ConstraintKind::SamplePower;
    double budget = 0.0;  // W

    PowerConstraint(ConstraintKind kind_, double budget_) : kind(kind_), budget(budget_) {
        if (budget <= 0.0) throw std::invalid_argument("PowerConstraint: budget must be > 0");
    }
};

/// Mean comb power, (hbar*Omega_c/T) * sum |X_n|^2, taking Omega_c >> N*omega_r.
inline double comb_power(const CombSpec& comb) {
    double sum = 0.0;
    for (const cd& a : comb.line_amplitudes) sum += std::norm(a);
    return photon_energy(comb.carrier) / comb.duration * sum;
}

/// Per-line amplitude-square budget implied by a power constraint.
///
/// The budget fixes |A|^2 alone (heterodyne under a sample constraint, where the
/// LO never touches the sample) or the mean (|A|^2+|B|^2)/2 (all other cases);
/// the caller decides the split between the two combs.
struct AmplitudeBudget {
    double per_line = 0.0;     // P*T / (M * hbar * Omega_c)
    bool signal_only = false;  // true: |A|^2 = per_line, |B|^2 unconstrained
};

inline AmplitudeBudget amplitude_from_constraint(const PowerConstraint& constraint,
                                                 ReceiverKind receiver, int lines,
                                                 double duration, double carrier) {
    if (lines <= 0 || lines % 2 == 0)
        throw std::invalid_argument("amplitude_from_constraint: lines must be odd and positive");
    if (duration <= 0.0)
        throw std::invalid_argument("amplitude_from_constraint: duration must be > 0");
    if (carrier <= 0.0)
        throw std::invalid_argument("amplitude_from_constraint: carrier must be > 0");
    AmplitudeBudget budget;
    budget.per_line = constraint.budget * duration / (lines * photon_energy(carrier));
    budget.signal_only = constraint.kind == ConstraintKind::SamplePower &&
                         receiver == ReceiverKind::HeterodyneSubtraction;
    return budget;
}

}  // namespace qcomb
