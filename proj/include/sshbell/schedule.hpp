#pragma once

#include <cstdint>
#include <cmath>

#include "sshbell/common.hpp"
#include "sshbell/lattice.hpp"

namespace sshbell {

/// Time dependence of the couplings. "step" switches eta_i -> eta_f at t_c;
/// "arctan" interpolates with w(t)/v = (eta_i+eta_f)/2
///   - ((eta_i-eta_f)/pi) * atan(Omega (t - t_c));
/// "two_step" inserts an intermediate plateau eta_p on [t_p, t_c);
/// "onsite_step" keeps w = eta_i * v and switches delta_i -> delta_f at t_c.
struct DriveProfile {
    enum class Kind { step, arctan, two_step, onsite_step };
    Kind kind = Kind::step;
    double eta_i = 0.5;
    double eta_f = -0.5;
    double omega = 1.0;   // arctan sharpness, units of v
    double t_c = 160.0;
    double eta_p = 0.0;   // two_step plateau value
    double t_p = 80.0;    // two_step plateau start, must be < t_c
    double delta_i = 0.0; // onsite_step values
    double delta_f = 0.0;
    double v = 1.0;

    void validate() const {
        if (kind == Kind::two_step && !(t_p < t_c))
            throw config_error("DriveProfile: two_step requires t_p < t_c");
        if (kind == Kind::arctan && omega <= 0.0)
            throw config_error("DriveProfile: arctan requires omega > 0");
    }
};

inline CouplingSnapshot profile_at(const DriveProfile& profile, double t) {
    profile.validate();
    CouplingSnapshot snap;
    switch (profile.kind) {
        case DriveProfile::Kind::step:
            snap.w = (t < profile.t_c ? profile.eta_i : profile.eta_f) * profile.v;
            break;
        case DriveProfile::Kind::arctan: {
            const double mid = 0.5 * (profile.eta_i + profile.eta_f);
            const double amp = (profile.eta_i - profile.eta_f) / pi;
            snap.w = (mid - amp * std::atan(profile.omega * (t - profile.t_c))) *
                     profile.v;
            break;
        }
        case DriveProfile::Kind::two_step:
            snap.w = (t < profile.t_p
                          ? profile.eta_i
                          : (t < profile.t_c ? profile.eta_p : profile.eta_f)) *
                     profile.v;
            break;
        case DriveProfile::Kind::onsite_step:
            snap.w = profile.eta_i * profile.v;
            snap.delta = t < profile.t_c ? profile.delta_i : profile.delta_f;
            break;
    }
    return snap;
}

/// Stochastic perturbations of the couplings: hopping amplitudes gain
/// zeta * Rand(t) and onsite energies gain xi * Rand(t), with Rand drawn
/// uniformly from (-1, 1), one fresh draw per integrator step.
struct NoiseSpec {
    double zeta = 0.0;
    double xi = 0.0;
    enum class HoppingMode { global, per_bond };
    enum class OnsiteMode { per_site, staggered, global };
    HoppingMode hopping_mode = HoppingMode::global;
    OnsiteMode onsite_mode = OnsiteMode::staggered;
    std::uint64_t seed = 0;

    void validate() const {
        if (zeta < 0.0 || xi < 0.0)
            throw config_error("NoiseSpec: amplitudes must be >= 0");
    }

    bool active() const { return zeta > 0.0 || xi > 0.0; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Uniform draw in the open interval (-1, 1) from a 64-bit word.
inline double open_uniform(std::uint64_t x) {
    const double u = (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

}  // namespace detail

/// Per-step perturbations for one run. Draws are counter-based: the value at
/// (step, slot) depends only on (seed, run_index, step, slot), so tracks are
/// bitwise reproducible for any execution order or worker count.
///
/// Slot layout: 0 = global v class, 1 = global w class, 2 = global/staggered
/// onsite; per-bond draws live at 2^20 + bond, per-site draws at 2^21 + site.
class NoiseTrack {
public:
    NoiseTrack(const NoiseSpec& noise, const LatticeSpec& spec,
               std::uint64_t run_index)
        : noise_(noise), spec_(spec) {
        noise.validate();
        stream_ = detail::splitmix64(noise.seed ^
                                     detail::splitmix64(run_index + 1));
    }

    /// Result of one step's draws, expanded against a lattice.
    struct StepPerturbation {
        double dv = 0.0;                // added to every intra-cell bond
        double dw = 0.0;                // added to every inter-cell bond
        VectorXd bond_intra;            // per-bond mode only (size L*(M-1))
        VectorXd bond_inter;            // per-bond mode only (size L or L-1)
        double onsite_uniform = 0.0;    // global onsite shift
        double onsite_staggered = 0.0;  // applied as (+,-,+,...) within a cell
        VectorXd onsite_site;           // per-site mode only (size M*L)
        bool cell_periodic = true;      // true when expressible per unit cell
    };

    StepPerturbation at(std::int64_t step) const {
        StepPerturbation p;
        if (!noise_.active()) return p;
        if (noise_.zeta > 0.0) {
            if (noise_.hopping_mode == NoiseSpec::HoppingMode::global) {
                p.dv = noise_.zeta * draw(step, 0);
                p.dw = noise_.zeta * draw(step, 1);
            } else {
                p.cell_periodic = false;
                const int nb_intra = spec_.L * (spec_.M - 1);
                const int nb_inter =
                    spec_.boundary == LatticeSpec::Boundary::periodic
                        ? spec_.L
                        : spec_.L - 1;
                p.bond_intra.resize(nb_intra);
                for (int b = 0; b < nb_intra; ++b)
                    p.bond_intra[b] = noise_.zeta * draw(step, (1 << 20) + b);
                p.bond_inter.resize(nb_inter);
                for (int b = 0; b < nb_inter; ++b)
                    p.bond_inter[b] =
                        noise_.zeta * draw(step, (1 << 20) + nb_intra + b);
            }
        }
        if (noise_.xi > 0.0) {
            switch (noise_.onsite_mode) {
                case NoiseSpec::OnsiteMode::global:
                    p.onsite_uniform = noise_.xi * draw(step, 2);
                    break;
                case NoiseSpec::OnsiteMode::staggered:
                    p.onsite_staggered = noise_.xi * draw(step, 2);
                    break;
                case NoiseSpec::OnsiteMode::per_site: {
                    p.cell_periodic = false;
                    p.onsite_site.resize(spec_.sites());
                    for (int s = 0; s < spec_.sites(); ++s)
                        p.onsite_site[s] = noise_.xi * draw(step, (1 << 21) + s);
                    break;
                }
            }
        }
        return p;
    }

    /// Raw uniform draw in (-1, 1) for (step, slot); exposed for statistics.
    double draw(std::int64_t step, std::int64_t slot) const {
        const std::uint64_t key =
            stream_ ^ (static_cast<std::uint64_t>(step) * 0xd1342543de82ef95ull +
                       static_cast<std::uint64_t>(slot) * 0xaf251af3b0f025b5ull);
        return detail::open_uniform(detail::splitmix64(key));
    }

    const NoiseSpec& spec() const { return noise_; }

private:
    NoiseSpec noise_;
    LatticeSpec spec_;
    std::uint64_t stream_ = 0;
};

inline NoiseTrack noise_track(const NoiseSpec& noise, const LatticeSpec& spec,
                              std::uint64_t run_index) {
    return NoiseTrack(noise, spec, run_index);
}

}  // namespace sshbell
