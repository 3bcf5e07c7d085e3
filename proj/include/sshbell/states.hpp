#pragma once

#include <string>
#include <vector>

#include "sshbell/common.hpp"
#include "sshbell/lattice.hpp"

namespace sshbell {

enum class Statistics { fermion, boson };

inline double exchange_sign(Statistics s) {
    return s == Statistics::fermion ? -1.0 : +1.0;
}

/// One excitation on the chain; amplitudes indexed by site(l, m) = l*M + m.
struct SingleParticleWave {
    VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
};

/// Two indistinguishable excitations. orbital_pair keeps the two orbitals
/// plus the symmetrization normalization scalar; dense stores the full
/// ordered tensor Psi(x1, x2) with the exchange symmetry baked in
/// (Psi(x2, x1) = +Psi(x1, x2) for bosons, - for fermions).
struct TwoParticleWave {
    enum class Rep { orbital_pair, dense };
    Statistics statistics = Statistics::fermion;
    Rep representation = Rep::orbital_pair;
    SingleParticleWave phi1, phi2;  // orbital_pair
    double norm_scalar = 0.0;       // orbital_pair: 1/sqrt(2(1 +- |<1|2>|^2))
    MatrixXcd tensor;               // dense
};

/// Bloch eigenstate (band_index, k) as a real-space wave:
/// amplitude(l, m) = g_m(k) * exp(i k l) / sqrt(L).
inline SingleParticleWave plane_wave_orbital(const LatticeSpec& spec,
                                             const BandTable& bands,
                                             int band_index, double k) {
    const int L = bands.L();
    const int M = bands.M();
    if (band_index < 0 || band_index >= M)
        throw config_error("plane_wave_orbital: band index out of range");
    int ik = -1;
    for (int n = 0; n < L; ++n) {
        if (std::abs(std::remainder(bands.kgrid[n] - k, 2.0 * pi)) < 1e-9) {
            ik = n;
            break;
        }
    }
    if (ik < 0) throw config_error("plane_wave_orbital: k not on the grid");
    SingleParticleWave wave;
    wave.amplitudes.resize(spec.sites());
    const double kk = bands.kgrid[ik];
    for (int l = 0; l < L; ++l) {
        const cplx phase = std::exp(cplx(0.0, kk * l)) / std::sqrt(double(L));
        for (int m = 0; m < M; ++m)
            wave.amplitudes[site_index(spec, l, m)] =
                bands.vectors[ik](m, band_index) * phase;
    }
    return wave;
}

/// Gaussian wave packet on one band: amplitude(l, m) proportional to
/// sum_k exp(-(k-k_c)^2 / k_w^2) g_m(k) exp(i k (l - x0)) over the k-grid,
/// with the envelope distance taken minimal-image on the Brillouin circle.
inline SingleParticleWave gaussian_orbital(const LatticeSpec& spec,
                                           const BandTable& bands,
                                           int band_index, double k_center,
                                           double k_width, double x0,
                                           std::vector<std::string>* warnings = nullptr) {
    const int L = bands.L();
    const int M = bands.M();
    if (band_index < 0 || band_index >= M)
        throw config_error("gaussian_orbital: band index out of range");
    if (k_width <= 0.0) throw config_error("gaussian_orbital: k_width must be > 0");
    const double edge = std::exp(-sqr(pi) / sqr(k_width));
    if (edge > 1e-3 && warnings)
        warnings->push_back("gaussian envelope non-negligible at zone edge");
    SingleParticleWave wave;
    wave.amplitudes = VectorXcd::Zero(spec.sites());
    for (int n = 0; n < L; ++n) {
        const double k = bands.kgrid[n];
        const double d = std::remainder(k - k_center, 2.0 * pi);
        const double env = std::exp(-sqr(d) / sqr(k_width));
        if (env < 1e-300) continue;
        const cplx shift = env * std::exp(cplx(0.0, -k * x0));
        for (int l = 0; l < L; ++l) {
            const cplx phase = shift * std::exp(cplx(0.0, k * l));
            for (int m = 0; m < M; ++m)
                wave.amplitudes[site_index(spec, l, m)] +=
                    bands.vectors[n](m, band_index) * phase;
        }
    }
    wave.amplitudes /= wave.amplitudes.norm();
    return wave;
}

/// Symmetrized pair of orbitals. The dense form is
/// N [phi1(x1) phi2(x2) +- phi2(x1) phi1(x2)] with
/// N = 1/sqrt(2 (1 +- |<phi1|phi2>|^2)).
inline TwoParticleWave pair_state(const SingleParticleWave& phi1,
                                  const SingleParticleWave& phi2,
                                  Statistics statistics) {
    if (std::abs(phi1.norm() - 1.0) > 1e-10 || std::abs(phi2.norm() - 1.0) > 1e-10)
        throw config_error("pair_state: orbitals must be normalized");
    const double sign = exchange_sign(statistics);
    const cplx ov = phi1.amplitudes.dot(phi2.amplitudes);
    const double norm_sq = 2.0 * (1.0 + sign * std::norm(ov));
    if (norm_sq < 1e-12)
        throw config_error("pair_state: antisymmetrized pair has zero norm");
    TwoParticleWave state;
    state.statistics = statistics;
    state.representation = TwoParticleWave::Rep::orbital_pair;
    state.phi1 = phi1;
    state.phi2 = phi2;
    state.norm_scalar = 1.0 / std::sqrt(norm_sq);
    return state;
}

/// Expand an orbital_pair state into the dense ordered tensor.
inline TwoParticleWave densify(const TwoParticleWave& state) {
    if (state.representation == TwoParticleWave::Rep::dense) return state;
    TwoParticleWave out;
    out.statistics = state.statistics;
    out.representation = TwoParticleWave::Rep::dense;
    const VectorXcd& a = state.phi1.amplitudes;
    const VectorXcd& b = state.phi2.amplitudes;
    out.tensor = state.norm_scalar *
                 (a * b.transpose() +
                  exchange_sign(state.statistics) * b * a.transpose());
    return out;
}

/// Two-excitation amplitudes in a band-momentum eigenbasis. The tensor is
/// the full ordered amplitude over mode pairs, stored as an (M*L) x (M*L)
/// matrix with mode index mode(alpha, ik) = alpha*L + ik; its squared sum
/// is 1 for a normalized state, and it is (anti)symmetric as a matrix.
struct BandAmplitudes {
    int M = 0;
    int L = 0;
    Statistics statistics = Statistics::fermion;
    std::string snapshot_tag;
    MatrixXcd tensor;

    int mode(int band, int ik) const { return band * L + ik; }
    const cplx& at(int alpha, int ik, int beta, int jk) const {
        return tensor(mode(alpha, ik), mode(beta, jk));
    }
};

/// Columns of the returned N_s x (M*L) matrix are the Bloch modes
/// g_m(k) e^{ikl} / sqrt(L), ordered by mode(alpha, ik) = alpha*L + ik.
inline MatrixXcd bloch_mode_matrix(const LatticeSpec& spec, const BandTable& bands) {
    const int L = bands.L();
    const int M = bands.M();
    MatrixXcd U(spec.sites(), M * L);
    for (int n = 0; n < L; ++n) {
        const double k = bands.kgrid[n];
        for (int a = 0; a < M; ++a) {
            const int col = a * L + n;
            for (int l = 0; l < L; ++l) {
                const cplx phase =
                    std::exp(cplx(0.0, k * l)) / std::sqrt(double(L));
                for (int m = 0; m < M; ++m)
                    U(site_index(spec, l, m), col) = bands.vectors[n](m, a) * phase;
            }
        }
    }
    return U;
}

/// Band-basis amplitudes of one orbital: entry mode(alpha, ik) is the
/// overlap of the Bloch mode with the orbital.
inline VectorXcd band_amplitudes_of_orbital(const LatticeSpec& spec,
                                            const BandTable& bands,
                                            const SingleParticleWave& wave) {
    return bloch_mode_matrix(spec, bands).adjoint() * wave.amplitudes;
}

/// Transform a two-particle state into the eigenbasis of the given bands.
/// orbital_pair input costs two matrix-vector products; dense input applies
/// the mode unitary on both tensor legs.
inline BandAmplitudes to_band_amplitudes(const TwoParticleWave& state,
                                         const LatticeSpec& spec,
                                         const BandTable& bands,
                                         std::string snapshot_tag = {}) {
    BandAmplitudes amps;
    amps.M = bands.M();
    amps.L = bands.L();
    amps.statistics = state.statistics;
    amps.snapshot_tag = std::move(snapshot_tag);
    if (state.representation == TwoParticleWave::Rep::orbital_pair) {
        if (state.phi1.amplitudes.size() != spec.sites())
            throw config_error("to_band_amplitudes: state/lattice size mismatch");
        const MatrixXcd U = bloch_mode_matrix(spec, bands);
        const VectorXcd a = U.adjoint() * state.phi1.amplitudes;
        const VectorXcd b = U.adjoint() * state.phi2.amplitudes;
        amps.tensor = state.norm_scalar *
                      (a * b.transpose() +
                       exchange_sign(state.statistics) * b * a.transpose());
    } else {
        if (state.tensor.rows() != spec.sites())
            throw config_error("to_band_amplitudes: state/lattice size mismatch");
        const MatrixXcd U = bloch_mode_matrix(spec, bands);
        amps.tensor = U.adjoint() * state.tensor * U.conjugate();
    }
    return amps;
}

/// Per-site particle density n(x) = 2 * sum_y |Psi(x, y)|^2; sums to 2 for a
/// normalized state. The orbital-pair form folds the y-sum analytically.
inline VectorXd site_density(const TwoParticleWave& state) {
    if (state.representation == TwoParticleWave::Rep::orbital_pair) {
        const VectorXcd& p1 = state.phi1.amplitudes;
        const VectorXcd& p2 = state.phi2.amplitudes;
        const cplx overlap = p1.dot(p2);  // <phi1|phi2>
        const double nn = state.norm_scalar * state.norm_scalar;
        const double sign = exchange_sign(state.statistics);
        VectorXd n(p1.size());
        for (Eigen::Index x = 0; x < p1.size(); ++x)
            n[x] = 2.0 * nn *
                   (std::norm(p1[x]) + std::norm(p2[x]) +
                    sign * 2.0 * std::real(p1[x] * std::conj(p2[x]) * overlap));
        return n;
    }
    return 2.0 * state.tensor.cwiseAbs2().rowwise().sum();
}

/// Density per unit cell: site density summed over the M sites of each cell.
inline VectorXd cell_density(const TwoParticleWave& state,
                             const LatticeSpec& spec) {
    const VectorXd site = site_density(state);
    if (site.size() != spec.sites())
        throw config_error("cell_density: state/lattice size mismatch");
    VectorXd cell = VectorXd::Zero(spec.L);
    for (int l = 0; l < spec.L; ++l)
        for (int m = 0; m < spec.M; ++m) cell[l] += site[site_index(spec, l, m)];
    return cell;
}

}  // namespace sshbell
