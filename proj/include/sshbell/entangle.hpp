#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "sshbell/analytic.hpp"
#include "sshbell/common.hpp"
#include "sshbell/evolve.hpp"
#include "sshbell/lattice.hpp"
#include "sshbell/states.hpp"

namespace sshbell {

/// Entanglement entropy of a pure two-particle amplitude matrix, in bits.
/// The matrix is normalized internally; the entropy is the Shannon entropy
/// of the squared Schmidt (singular) values.
inline double entropy_pure(const MatrixXcd& amplitude_matrix) {
    const double nrm = amplitude_matrix.norm();
    if (!(nrm > 1e-150))
        throw config_error("entropy_pure: zero amplitude matrix");
    Eigen::BDCSVD<MatrixXcd> svd(amplitude_matrix / nrm);
    const VectorXd weights = svd.singularValues().array().square();
    return entropy_bits(weights);
}

/// Von Neumann entropy of a (reduced) density operator, in bits. The
/// operator is trace-normalized internally; eigenvalues within 1e-10 of
/// zero are clipped.
inline double entropy_mixed(const MatrixXcd& rho) {
    if (rho.rows() != rho.cols())
        throw config_error("entropy_mixed: operator must be square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() >
        1e-10 * std::max(1.0, rho.cwiseAbs().maxCoeff()))
        throw config_error("entropy_mixed: operator not hermitian");
    const double tr = rho.trace().real();
    if (tr < 1e-14) throw config_error("entropy_mixed: trace vanishes");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
        (0.5 / tr) * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    VectorXd lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < -1e-10)
            throw tolerance_error(
                "entropy_mixed: operator not positive semidefinite");
        lam[i] = std::max(lam[i], 0.0);
    }
    return entropy_bits(lam);
}

inline double entropy_mixed(const DensityBlock& block) {
    return entropy_mixed(block.rho);
}

/// Momentum-correlation measurement: both-band occupation block of a
/// two-particle state, one particle per band of the chosen pair.
struct ProjectionResult {
    int alpha = 0;          // lower band label of the pair
    int beta = 1;           // upper band label, alpha < beta
    VectorXd kgrid;         // momenta labeling rows (particle I) and columns
    MatrixXcd amplitudes;   // psi(k, k'): particle I in (alpha,k), II in (beta,k')
    double probability = 0.0;
    double entropy = 0.0;   // bits, from the normalized amplitude matrix
    bool null_projection = false;
};

/// Project a band-basis two-particle state onto the (alpha, beta) band
/// pair. Entries are the physical ordered amplitudes <alpha,k; beta,k'|f>,
/// i.e. the stored tensor entries with the indistinguishability factor
/// applied exactly once.
inline ProjectionResult project_band_pair(const BandAmplitudes& amps,
                                          int alpha, int beta) {
    if (alpha == beta)
        throw config_error("project_band_pair: band labels must differ");
    if (alpha > beta) std::swap(alpha, beta);
    if (alpha < 0 || beta >= amps.M)
        throw config_error("project_band_pair: band label out of range");
    ProjectionResult result;
    result.alpha = alpha;
    result.beta = beta;
    const int L = amps.L;
    result.kgrid.resize(L);
    for (int n = 0; n < L; ++n) result.kgrid[n] = 2.0 * pi * n / L;
    result.amplitudes.resize(L, L);
    const double root2 = std::sqrt(2.0);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
            result.amplitudes(i, j) = root2 * amps.at(alpha, i, beta, j);
    result.probability = result.amplitudes.squaredNorm();
    if (result.probability < 1e-14) {
        result.null_projection = true;
        result.entropy = 0.0;
        return result;
    }
    result.entropy = entropy_pure(result.amplitudes);
    return result;
}

/// The two-amplitude sub-block of a band-pair projection at one momentum
/// pair: the measurement outcome statistics over {(k1,k2), (k2,k1)} alone.
struct CenterPairResult {
    cplx psi_12{0.0, 0.0};
    cplx psi_21{0.0, 0.0};
    double probability = 0.0;
    double entropy = 0.0;  // binary entropy of the normalized pair weights
    bool null_pair = false;
};

inline CenterPairResult center_pair_entropy(const ProjectionResult& proj,
                                            int ik1, int ik2) {
    const int L = static_cast<int>(proj.kgrid.size());
    if (ik1 == ik2 || ik1 < 0 || ik2 < 0 || ik1 >= L || ik2 >= L)
        throw config_error("center_pair_entropy: invalid momentum indices");
    CenterPairResult result;
    result.psi_12 = proj.amplitudes(ik1, ik2);
    result.psi_21 = proj.amplitudes(ik2, ik1);
    result.probability = std::norm(result.psi_12) + std::norm(result.psi_21);
    if (result.probability < 1e-14) {
        result.null_pair = true;
        return result;
    }
    VectorXd p(2);
    p[0] = std::norm(result.psi_12) / result.probability;
    p[1] = std::norm(result.psi_21) / result.probability;
    result.entropy = entropy_bits(p);
    return result;
}

/// Branch-correlation measurement for a two-band lattice: the 2x2 block of
/// physical amplitudes over band labels at a fixed plane-wave momentum pair.
struct BranchCorrelation {
    Eigen::Matrix2cd phi;  // phi(alpha, beta) = <alpha,k1; beta,k2 | f>
    double probability = 0.0;
    double entropy = 0.0;
};

inline BranchCorrelation project_branch_correlation(const BandAmplitudes& amps,
                                                    int ik1, int ik2) {
    if (amps.M != 2)
        throw config_error(
            "project_branch_correlation: defined for two-band lattices");
    const int L = amps.L;
    if (ik1 == ik2 || ik1 < 0 || ik2 < 0 || ik1 >= L || ik2 >= L)
        throw config_error(
            "project_branch_correlation: invalid momentum indices");
    const double total = amps.tensor.squaredNorm();
    double inside = 0.0;
    const int iks[2] = {ik1, ik2};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int ia : iks)
                for (int ib : iks)
                    inside += std::norm(amps.at(a, ia, b, ib));
    if (total - inside > 1e-10 * std::max(1.0, total))
        throw config_error(
            "project_branch_correlation: state has support off the "
            "plane-wave momentum pair");
    BranchCorrelation result;
    const double root2 = std::sqrt(2.0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            result.phi(a, b) = root2 * amps.at(a, ik1, b, ik2);
    result.probability = result.phi.squaredNorm();
    result.entropy =
        result.probability < 1e-14 ? 0.0 : entropy_pure(result.phi);
    return result;
}

/// Squared overlap of two normalized band-pair projections over the same
/// pair and grid. Insensitive to global phases by construction.
inline double fidelity(const ProjectionResult& reference,
                       const ProjectionResult& perturbed) {
    if (reference.alpha != perturbed.alpha ||
        reference.beta != perturbed.beta)
        throw config_error("fidelity: band pairs differ");
    if (reference.amplitudes.rows() != perturbed.amplitudes.rows() ||
        reference.amplitudes.cols() != perturbed.amplitudes.cols())
        throw config_error("fidelity: momentum grids differ");
    if (reference.null_projection || perturbed.null_projection)
        throw config_error("fidelity: null projection has no direction");
    const cplx overlap =
        (reference.amplitudes.conjugate().cwiseProduct(perturbed.amplitudes))
            .sum() /
        std::sqrt(reference.probability * perturbed.probability);
    return std::norm(overlap);
}

struct TrialStatistics {
    double mean = 0.0;
    double stddev = 0.0;  // population convention (n divisor)
};

inline TrialStatistics trial_statistics(const std::vector<double>& samples) {
    if (samples.size() < 2)
        throw config_error("trial_statistics: need at least 2 samples");
    TrialStatistics stats;
    const double n = static_cast<double>(samples.size());
    stats.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double var = 0.0;
    for (double x : samples) var += sqr(x - stats.mean);
    stats.stddev = std::sqrt(var / n);
    return stats;
}

/// Band-pair projection of an evolved plane-wave pair: expand each spinor in
/// the post-boundary eigenbasis at its own momentum and form the physical
/// ordered amplitudes for the (alpha, beta) pair.
inline PairProjection project_plane_pair(const PlanePairResult& pair,
                                         const LatticeSpec& spec,
                                         const CouplingSnapshot& post,
                                         int alpha, int beta) {
    VectorXd e;
    MatrixXcd U1, U2;
    solve_bloch_at(spec, post, pair.k1, e, U1);
    solve_bloch_at(spec, post, pair.k2, e, U2);
    ScatterCoefficients sc;
    sc.M = spec.M;
    sc.statistics = pair.statistics;
    sc.k1 = pair.k1;
    sc.k2 = pair.k2;
    const VectorXcd d1 = U1.adjoint() * pair.c1;
    const VectorXcd d2 = U2.adjoint() * pair.c2;
    const double root_half = 1.0 / std::sqrt(2.0);
    sc.forward = root_half * (d1 * d2.transpose());
    sc.reversed = root_half * exchange_sign(pair.statistics) *
                  (d2 * d1.transpose());
    return pair_projection(sc, alpha, beta);
}

/// Momentum-pair density block of a two-particle density operator: the 2x2
/// restriction to {|alpha,k1; beta,k2>, |alpha,k2; beta,k1>} of the
/// post-boundary eigenbasis, plus the entropy of the reduced single-particle
/// operator (diagonal because the two momenta are orthogonal).
struct PairDensity {
    DensityBlock block;  // 2x2, rows/cols ordered as above
    double probability = 0.0;
    double entropy = 0.0;
    bool null_projection = false;
};

inline PairDensity project_pair_density(const MatrixXcd& rho_pair,
                                        const FockBasis& basis,
                                        const LatticeSpec& spec,
                                        const BandTable& post_bands,
                                        int alpha, int beta, int ik1,
                                        int ik2) {
    if (alpha == beta)
        throw config_error("project_pair_density: band labels must differ");
    if (rho_pair.rows() != basis.npairs() ||
        rho_pair.cols() != basis.npairs())
        throw config_error("project_pair_density: pair-sector size mismatch");
    const double k1 = post_bands.kgrid[ik1], k2 = post_bands.kgrid[ik2];
    const auto embed = [&](double ka, double kb) {
        const TwoParticleWave pure =
            pair_state(plane_wave_orbital(spec, post_bands, alpha, ka),
                       plane_wave_orbital(spec, post_bands, beta, kb),
                       basis.statistics);
        return pair_sector_vector(pure, basis);
    };
    const VectorXcd q1 = embed(k1, k2);
    const VectorXcd q2 = embed(k2, k1);
    PairDensity result;
    result.block.basis = "momentum-pair";
    result.block.rho.resize(2, 2);
    result.block.rho(0, 0) = q1.dot(rho_pair * q1);
    result.block.rho(0, 1) = q1.dot(rho_pair * q2);
    result.block.rho(1, 0) = q2.dot(rho_pair * q1);
    result.block.rho(1, 1) = q2.dot(rho_pair * q2);
    result.probability = result.block.rho.trace().real();
    if (result.probability < 1e-14) {
        result.null_projection = true;
        return result;
    }
    MatrixXcd reduced = MatrixXcd::Zero(2, 2);
    reduced(0, 0) = result.block.rho(0, 0);
    reduced(1, 1) = result.block.rho(1, 1);
    result.entropy = entropy_mixed(reduced);
    return result;
}

}  // namespace sshbell
