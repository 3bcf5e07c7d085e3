#pragma once

#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sshbell/common.hpp"

namespace sshbell {

/// Static geometry of the M-band SSH chain: M sites per cell, L cells,
/// intra-cell coupling v (the energy unit), and the chain boundary condition.
struct LatticeSpec {
    int M = 2;
    int L = 2;
    double v = 1.0;
    enum class Boundary { periodic, open };
    Boundary boundary = Boundary::periodic;

    int sites() const { return M * L; }

    void validate() const {
        if (M < 2) throw config_error("LatticeSpec: M must be >= 2");
        if (L < 2) throw config_error("LatticeSpec: L must be >= 2");
        if (v <= 0.0) throw config_error("LatticeSpec: v must be > 0");
    }
};

/// Couplings at one instant: inter-cell hopping w, staggered onsite
/// amplitude delta (M=2 only, +delta/-delta on the two sublattices), and
/// optional per-site onsite offsets (used by noise tracks).
struct CouplingSnapshot {
    double w = 0.0;
    double delta = 0.0;
    VectorXd onsite;  // empty, or length M*L

    void validate(const LatticeSpec& spec) const {
        if (delta != 0.0 && spec.M != 2)
            throw config_error("CouplingSnapshot: delta requires M = 2");
        if (onsite.size() != 0 && onsite.size() != spec.sites())
            throw config_error("CouplingSnapshot: onsite vector length mismatch");
    }
};

/// Bands of the periodic chain on the k-grid k = 2*pi*n/L:
/// energies and group velocities per (k, band), and for each k the M x M
/// unitary whose columns are the Bloch eigenvectors sorted by energy.
struct BandTable {
    VectorXd kgrid;                 // length L
    MatrixXd energies;              // L x M, ascending per row
    std::vector<MatrixXcd> vectors; // L entries, each M x M
    MatrixXd velocities;            // L x M
    std::vector<std::string> warnings;

    int L() const { return static_cast<int>(kgrid.size()); }
    int M() const { return static_cast<int>(energies.cols()); }
};

/// Site index convention: site(l, m) = l*M + m with l = 0..L-1, m = 0..M-1.
inline int site_index(const LatticeSpec& spec, int l, int m) {
    return l * spec.M + m;
}

/// Nearest-neighbour chain: bonds v inside each cell, w between cells
/// (periodic closes the bond from cell L-1 back to cell 0), diagonal
/// carries the staggered +/-delta pattern plus per-site offsets.
inline Eigen::SparseMatrix<cplx> build_real_space_hamiltonian(
    const LatticeSpec& spec, const CouplingSnapshot& snap) {
    spec.validate();
    snap.validate(spec);
    const int N = spec.sites();
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(4 * N);
    for (int l = 0; l < spec.L; ++l) {
        for (int m = 0; m + 1 < spec.M; ++m) {
            const int a = site_index(spec, l, m);
            const int b = site_index(spec, l, m + 1);
            trip.emplace_back(a, b, cplx(spec.v, 0.0));
            trip.emplace_back(b, a, cplx(spec.v, 0.0));
        }
    }
    const int inter_count =
        spec.boundary == LatticeSpec::Boundary::periodic ? spec.L : spec.L - 1;
    for (int l = 0; l < inter_count; ++l) {
        const int a = site_index(spec, l, spec.M - 1);
        const int b = site_index(spec, (l + 1) % spec.L, 0);
        trip.emplace_back(a, b, cplx(snap.w, 0.0));
        trip.emplace_back(b, a, cplx(snap.w, 0.0));
    }
    for (int l = 0; l < spec.L; ++l) {
        for (int m = 0; m < spec.M; ++m) {
            double d = 0.0;
            if (snap.delta != 0.0) d += (m == 0 ? snap.delta : -snap.delta);
            const int s = site_index(spec, l, m);
            if (snap.onsite.size() != 0) d += snap.onsite[s];
            if (d != 0.0) trip.emplace_back(s, s, cplx(d, 0.0));
        }
    }
    Eigen::SparseMatrix<cplx> H(N, N);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

/// M x M Bloch Hamiltonian at wave number k: tridiagonal v plus corner
/// entries w*exp(-+ik); for M = 2 the staggered onsite delta enters the
/// diagonal as diag(+delta, -delta). Per-site onsite offsets must be
/// cell-periodic to be representable here.
inline MatrixXcd bloch_hamiltonian(const LatticeSpec& spec,
                                   const CouplingSnapshot& snap, double k) {
    spec.validate();
    snap.validate(spec);
    if (spec.boundary != LatticeSpec::Boundary::periodic)
        throw config_error("bloch_hamiltonian: periodic boundary required");
    const int M = spec.M;
    MatrixXcd H = MatrixXcd::Zero(M, M);
    for (int m = 0; m + 1 < M; ++m) {
        H(m, m + 1) += spec.v;
        H(m + 1, m) += spec.v;
    }
    H(0, M - 1) += snap.w * std::exp(cplx(0.0, -k));
    H(M - 1, 0) += snap.w * std::exp(cplx(0.0, +k));
    if (snap.delta != 0.0) {
        H(0, 0) += snap.delta;
        H(1, 1) -= snap.delta;
    }
    if (snap.onsite.size() != 0) {
        for (int s = 0; s < spec.sites(); ++s) {
            if (std::abs(snap.onsite[s] - snap.onsite[s % M]) > 1e-14)
                throw config_error(
                    "bloch_hamiltonian: onsite offsets must repeat per cell");
        }
        for (int m = 0; m < M; ++m) H(m, m) += snap.onsite[m];
    }
    return H;
}

namespace detail {

/// Gauge: rotate each eigenvector so its last component is real positive;
/// if that component nearly vanishes, use the largest-magnitude component
/// instead and report the fallback.
inline void fix_gauge(MatrixXcd& U, double k, std::vector<std::string>* warnings) {
    const int M = static_cast<int>(U.rows());
    for (int a = 0; a < M; ++a) {
        cplx ref = U(M - 1, a);
        if (std::abs(ref) < 1e-12) {
            int imax = 0;
            U.col(a).cwiseAbs().maxCoeff(&imax);
            ref = U(imax, a);
            if (warnings)
                warnings->push_back("gauge fallback at k=" + std::to_string(k) +
                                    " band=" + std::to_string(a + 1));
        }
        U.col(a) *= std::conj(ref) / std::abs(ref);
    }
}

inline void solve_bloch(const LatticeSpec& spec, const CouplingSnapshot& snap,
                        double k, VectorXd& energies, MatrixXcd& U,
                        std::vector<std::string>* warnings) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(bloch_hamiltonian(spec, snap, k));
    energies = es.eigenvalues();
    U = es.eigenvectors();
    fix_gauge(U, k, warnings);
}

}  // namespace detail

/// Solve all bands on the k-grid. Velocities d(energy)/dk are analytic for
/// the M=2 model and Richardson-refined central differences otherwise.
inline BandTable solve_bands(const LatticeSpec& spec, const CouplingSnapshot& snap) {
    spec.validate();
    snap.validate(spec);
    if (spec.boundary != LatticeSpec::Boundary::periodic)
        throw config_error("solve_bands: periodic boundary required");
    const int L = spec.L;
    const int M = spec.M;
    BandTable table;
    table.kgrid.resize(L);
    table.energies.resize(L, M);
    table.velocities.resize(L, M);
    table.vectors.resize(L);
    for (int n = 0; n < L; ++n) {
        const double k = 2.0 * pi * n / L;
        table.kgrid[n] = k;
        VectorXd e;
        MatrixXcd U;
        detail::solve_bloch(spec, snap, k, e, U, &table.warnings);
        table.energies.row(n) = e.transpose();
        table.vectors[n] = U;
        for (int a = 0; a + 1 < M; ++a) {
            if (std::abs(e[a + 1] - e[a]) < 1e-9)
                table.warnings.push_back("near-degenerate bands at k=" +
                                         std::to_string(k));
        }
        if (M == 2 && snap.onsite.size() == 0) {
            // eps^2 = v^2 + w^2 + 2 v w cos k + delta^2  =>
            // d eps / dk = -v w sin k / eps  on each band.
            for (int a = 0; a < M; ++a) {
                const double eps = e[a];
                table.velocities(n, a) =
                    std::abs(eps) < 1e-12
                        ? 0.0
                        : -spec.v * snap.w * std::sin(k) / eps;
            }
        } else {
            const double h = 2.0 * pi / L;
            auto energies_at = [&](double kk) {
                VectorXd ee;
                MatrixXcd UU;
                detail::solve_bloch(spec, snap, kk, ee, UU, nullptr);
                return ee;
            };
            const VectorXd d1 =
                (energies_at(k + h) - energies_at(k - h)) / (2.0 * h);
            const VectorXd d2 =
                (energies_at(k + h / 2) - energies_at(k - h / 2)) / h;
            table.velocities.row(n) =
                ((4.0 * d2 - d1) / 3.0).transpose();
        }
    }
    return table;
}

/// Bands at a single wave number (same gauge/order conventions as solve_bands).
inline void solve_bloch_at(const LatticeSpec& spec, const CouplingSnapshot& snap,
                           double k, VectorXd& energies, MatrixXcd& U) {
    detail::solve_bloch(spec, snap, k, energies, U, nullptr);
}

}  // namespace sshbell
