#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sshbell/common.hpp"
#include "sshbell/lattice.hpp"
#include "sshbell/states.hpp"

namespace sshbell {

/// Overlap matrix between the Bloch eigenbases of two coupling snapshots at
/// wave number k: entry (a, b) = <h_a(k) | g_b(k)> with rows in the post
/// basis and columns in the pre basis. Unitary by completeness.
inline MatrixXcd transfer_overlaps(const LatticeSpec& spec,
                                   const CouplingSnapshot& pre,
                                   const CouplingSnapshot& post, double k) {
    VectorXd eg, eh;
    MatrixXcd G, H;
    solve_bloch_at(spec, pre, k, eg, G);
    solve_bloch_at(spec, post, k, eh, H);
    return H.adjoint() * G;
}

/// Closed-form post-boundary amplitudes of a plane-wave pair that starts
/// with both excitations on `incident_band` at momenta (k1, k2). Entries are
/// ordered-tensor values in the post basis (same convention as
/// BandAmplitudes): forward(a, b) is the amplitude of modes (a,k1),(b,k2),
/// reversed(a, b) of (a,k2),(b,k1); the two matrices together carry total
/// squared weight 1, and reversed(a, b) = sign * forward(b, a).
struct ScatterCoefficients {
    int M = 2;
    Statistics statistics = Statistics::fermion;
    double k1 = 0.0, k2 = 0.0;
    int incident_band = 0;
    MatrixXcd forward;
    MatrixXcd reversed;
};

inline ScatterCoefficients scatter_coefficients(const LatticeSpec& spec,
                                                const CouplingSnapshot& pre,
                                                const CouplingSnapshot& post,
                                                double k1, double k2,
                                                Statistics statistics,
                                                int incident_band = 0) {
    if (k1 == k2) throw config_error("scatter_coefficients: k1 must differ from k2");
    if (incident_band < 0 || incident_band >= spec.M)
        throw config_error("scatter_coefficients: incident band out of range");
    ScatterCoefficients sc;
    sc.M = spec.M;
    sc.statistics = statistics;
    sc.k1 = k1;
    sc.k2 = k2;
    sc.incident_band = incident_band;
    const VectorXcd d1 = transfer_overlaps(spec, pre, post, k1).col(incident_band);
    const VectorXcd d2 = transfer_overlaps(spec, pre, post, k2).col(incident_band);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    sc.forward = inv_sqrt2 * d1 * d2.transpose();
    sc.reversed = exchange_sign(statistics) * inv_sqrt2 * d2 * d1.transpose();
    return sc;
}

/// Momentum-correlation projection of a plane-wave scattering event onto the
/// labeled band pair (alpha, beta): the two physical amplitudes
/// psi_12 = <alpha,k1; beta,k2 | f> and psi_21 = <alpha,k2; beta,k1 | f>,
/// the success probability |psi_12|^2 + |psi_21|^2, and the entropy of the
/// normalized two-amplitude state in bits.
struct PairProjection {
    cplx psi_12{0.0, 0.0};
    cplx psi_21{0.0, 0.0};
    double probability = 0.0;
    double entropy = 0.0;
    bool null_projection = false;
};

inline PairProjection pair_projection(const ScatterCoefficients& sc, int alpha,
                                      int beta) {
    if (alpha == beta)
        throw config_error("pair_projection: band labels must differ");
    PairProjection out;
    const double sqrt2 = std::sqrt(2.0);
    out.psi_12 = sqrt2 * sc.forward(alpha, beta);
    out.psi_21 = sqrt2 * sc.reversed(alpha, beta);
    const double p1 = std::norm(out.psi_12);
    const double p2 = std::norm(out.psi_21);
    out.probability = p1 + p2;
    if (out.probability < 1e-14) {
        out.null_projection = true;
        out.entropy = 0.0;
        return out;
    }
    VectorXd p(2);
    p << p1 / out.probability, p2 / out.probability;
    out.entropy = entropy_bits(p);
    return out;
}

/// Parametric condition cos(k0) = -(eta_i + eta_f) / (1 + eta_i eta_f) for a
/// balanced band-pair projection, solved for k0. `exact` marks the strict
/// case eta_i + eta_f = 0 (k0 = pi/2), where the balance holds at any
/// momentum separation.
struct BellCondition {
    double eta_i = 0.0;
    double eta_f = 0.0;
    double k0 = 0.0;
    bool satisfied = false;
    bool exact = false;
    double residual = 0.0;  // |cos k0 + (eta_i+eta_f)/(1+eta_i*eta_f)|
};

namespace detail {

inline void check_eta_domain(double eta_i, double eta_f) {
    if (std::abs(eta_i - eta_f) < 1e-12)
        throw config_error("bell_condition: eta_i must differ from eta_f");
    for (double eta : {eta_i, eta_f}) {
        if (std::abs(eta) < 1e-12 || std::abs(std::abs(eta) - 1.0) < 1e-12)
            throw config_error(
                "bell_condition: eta values 0 and +-1 are excluded (flat band "
                "or gap closing)");
    }
}

}  // namespace detail

inline BellCondition bell_condition(double eta_i, double eta_f) {
    detail::check_eta_domain(eta_i, eta_f);
    BellCondition bc;
    bc.eta_i = eta_i;
    bc.eta_f = eta_f;
    const double denom = 1.0 + eta_i * eta_f;
    if (std::abs(denom) < 1e-14) {
        bc.satisfied = false;
        bc.k0 = std::numeric_limits<double>::quiet_NaN();
        bc.residual = std::numeric_limits<double>::infinity();
        return bc;
    }
    const double a = (eta_i + eta_f) / denom;
    if (std::abs(a) <= 1.0) {
        bc.satisfied = true;
        bc.k0 = std::acos(-a);
        bc.residual = std::abs(std::cos(bc.k0) + a);
        bc.exact = std::abs(eta_i + eta_f) < 1e-12;
    } else {
        bc.satisfied = false;
        bc.k0 = a > 0.0 ? pi : 0.0;  // closest attainable cos
        bc.residual = std::abs(std::cos(bc.k0) + a);
    }
    return bc;
}

/// Inverse solve of the parametric condition: the eta_f that balances the
/// band-pair projection at momentum center k0 given eta_i.
inline double bell_eta_f(double eta_i, double k0) {
    const double c = std::cos(k0);
    const double denom = 1.0 + eta_i * c;
    if (std::abs(denom) < 1e-14)
        throw config_error("bell_eta_f: no finite solution at this (eta_i, k0)");
    return -(eta_i + c) / denom;
}

/// First-order Taylor quantities of the projected amplitudes around k0:
/// Xi is the relative phase accumulated across the boundary, Z the linear
/// imbalance coefficient; Z = 0 exactly when the parametric condition holds.
struct TaylorQuantities {
    double Xi = 0.0;
    double Z = 0.0;
};

inline TaylorQuantities taylor_quantities(double k0, double eta_i,
                                          double eta_f) {
    auto denom = [&](double eta) {
        return 1.0 + eta * eta + 2.0 * eta * std::cos(k0);
    };
    if (denom(eta_i) < 1e-12 || denom(eta_f) < 1e-12)
        throw config_error("taylor_quantities: gap closes at this (k0, eta)");
    auto phase = [&](double eta) {
        return std::atan2(eta * std::sin(k0), 1.0 + eta * std::cos(k0));
    };
    auto term = [&](double eta) {
        return (eta * std::cos(k0) + eta * eta) / denom(eta);
    };
    TaylorQuantities tq;
    tq.Xi = phase(eta_f) - phase(eta_i);
    tq.Z = term(eta_f) - term(eta_i);
    return tq;
}

/// Probability of landing on each post band for a single excitation incident
/// on `incident_band`: P_alpha = |u_alpha(post,k)^dagger u_i(pre,k)|^2.
inline VectorXd scattering_probabilities(const LatticeSpec& spec,
                                         const CouplingSnapshot& pre,
                                         const CouplingSnapshot& post, double k,
                                         int incident_band = 0) {
    if (incident_band < 0 || incident_band >= spec.M)
        throw config_error("scattering_probabilities: incident band out of range");
    return transfer_overlaps(spec, pre, post, k)
        .col(incident_band)
        .cwiseAbs2();
}

/// Group velocities at an arbitrary wave number (not restricted to a grid):
/// analytic derivative for the M=2 model, Richardson-refined central
/// difference otherwise.
inline VectorXd band_velocities_at(const LatticeSpec& spec,
                                   const CouplingSnapshot& snap, double k) {
    VectorXd e;
    MatrixXcd U;
    solve_bloch_at(spec, snap, k, e, U);
    if (spec.M == 2 && snap.onsite.size() == 0) {
        VectorXd vel(2);
        for (int a = 0; a < 2; ++a)
            vel[a] = std::abs(e[a]) < 1e-12
                         ? 0.0
                         : -spec.v * snap.w * std::sin(k) / e[a];
        return vel;
    }
    const double h = 1e-3;
    auto energies_at = [&](double kk) {
        VectorXd ee;
        MatrixXcd UU;
        solve_bloch_at(spec, snap, kk, ee, UU);
        return ee;
    };
    const VectorXd d1 = (energies_at(k + h) - energies_at(k - h)) / (2.0 * h);
    const VectorXd d2 = (energies_at(k + h / 2) - energies_at(k - h / 2)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

/// Propagation angles in the renormalized space-time plane (space in lattice
/// constants, time in 1/v): tan(theta) = group velocity / v. Negative angles
/// are motion reversed relative to positive k. Angles in degrees.
struct ScatteringAngles {
    double theta_incident_deg = 0.0;  // incident band, pre couplings
    VectorXd theta_deg;               // all bands, post couplings
};

inline ScatteringAngles scattering_angles(const LatticeSpec& spec,
                                          const CouplingSnapshot& pre,
                                          const CouplingSnapshot& post, double k,
                                          int incident_band = 0) {
    auto to_deg = [&](double vel) {
        return std::atan(vel / spec.v) * 180.0 / pi;
    };
    ScatteringAngles out;
    out.theta_incident_deg =
        to_deg(band_velocities_at(spec, pre, k)[incident_band]);
    const VectorXd vel = band_velocities_at(spec, post, k);
    out.theta_deg.resize(spec.M);
    for (int a = 0; a < spec.M; ++a) out.theta_deg[a] = to_deg(vel[a]);
    return out;
}

/// Entropy of the (alpha, beta) pair projection over a grid of boundary
/// parameters. Cells where no scattering happens (pre = post couplings)
/// project to nothing and are flagged null with S = 0.
struct EntropyMap {
    VectorXd axis_i, axis_f;
    MatrixXd entropy;      // rows follow axis_i, columns axis_f
    MatrixXd probability;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> null_flag;
};

namespace detail {

template <typename SnapshotAt>
EntropyMap entropy_map_impl(const LatticeSpec& spec, SnapshotAt&& snapshot_at,
                            const VectorXd& axis_i, const VectorXd& axis_f,
                            double k0, double dk, Statistics statistics,
                            int alpha, int beta, int incident_band) {
    EntropyMap map;
    map.axis_i = axis_i;
    map.axis_f = axis_f;
    const auto rows = axis_i.size(), cols = axis_f.size();
    map.entropy = MatrixXd::Zero(rows, cols);
    map.probability = MatrixXd::Zero(rows, cols);
    map.null_flag.setConstant(rows, cols, false);
    const double k1 = k0 - dk / 2.0, k2 = k0 + dk / 2.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const CouplingSnapshot pre = snapshot_at(axis_i[i]);
        for (Eigen::Index j = 0; j < cols; ++j) {
            const CouplingSnapshot post = snapshot_at(axis_f[j]);
            const auto proj = pair_projection(
                scatter_coefficients(spec, pre, post, k1, k2, statistics,
                                     incident_band),
                alpha, beta);
            map.entropy(i, j) = proj.entropy;
            map.probability(i, j) = proj.probability;
            map.null_flag(i, j) = proj.null_projection;
        }
    }
    return map;
}

}  // namespace detail

/// Map over inter-cell coupling boundaries (eta_i, eta_f).
inline EntropyMap entropy_map_eta(const LatticeSpec& spec,
                                  const VectorXd& etas_i, const VectorXd& etas_f,
                                  double k0, double dk, Statistics statistics,
                                  int alpha = 0, int beta = 1,
                                  int incident_band = 0) {
    return detail::entropy_map_impl(
        spec,
        [&](double eta) {
            CouplingSnapshot s;
            s.w = eta * spec.v;
            return s;
        },
        etas_i, etas_f, k0, dk, statistics, alpha, beta, incident_band);
}

/// Map over onsite-energy boundaries (delta_i, delta_f) at fixed w.
inline EntropyMap entropy_map_delta(const LatticeSpec& spec, double w,
                                    const VectorXd& deltas_i,
                                    const VectorXd& deltas_f, double k0,
                                    double dk, Statistics statistics) {
    if (spec.M != 2)
        throw config_error("entropy_map_delta: onsite boundary requires M = 2");
    return detail::entropy_map_impl(
        spec,
        [&](double delta) {
            CouplingSnapshot s;
            s.w = w;
            s.delta = delta;
            return s;
        },
        deltas_i, deltas_f, k0, dk, statistics, 0, 1, 0);
}

}  // namespace sshbell
