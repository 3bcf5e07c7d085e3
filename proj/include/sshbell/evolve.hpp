#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "sshbell/common.hpp"
#include "sshbell/lattice.hpp"
#include "sshbell/schedule.hpp"
#include "sshbell/states.hpp"

namespace sshbell {

/// Fixed-step RK4 window. Recording times are hit exactly: the step grid is
/// subdivided so that segment boundaries land on every requested time and on
/// every profile discontinuity (step switches are never straddled).
struct EvolutionConfig {
    double dt = 0.005;
    double t_start = 0.0;
    double t_end = 320.0;
    std::vector<double> record_times;

    void validate() const {
        if (dt <= 0.0) throw config_error("EvolutionConfig: dt must be > 0");
        if (!(t_start < t_end))
            throw config_error("EvolutionConfig: t_start must precede t_end");
        for (double t : record_times) {
            if (t < t_start - 1e-12 || t > t_end + 1e-12)
                throw config_error(
                    "EvolutionConfig: record time outside the window");
        }
    }
};

enum class EvolvePath { automatic, real_space, k_block };

namespace detail {

/// Times where a profile jumps; RK4 stages must not straddle these.
inline std::vector<double> profile_discontinuities(const DriveProfile& p) {
    switch (p.kind) {
        case DriveProfile::Kind::step:
        case DriveProfile::Kind::onsite_step:
            return {p.t_c};
        case DriveProfile::Kind::two_step:
            return {p.t_p, p.t_c};
        case DriveProfile::Kind::arctan:
            return {};
    }
    return {};
}

struct TimeSegment {
    double a = 0.0, b = 0.0;
    int nsub = 1;
    bool end_is_disc = false;
    bool end_is_record = false;
};

inline std::vector<TimeSegment> make_time_grid(const DriveProfile& profile,
                                               const EvolutionConfig& config) {
    config.validate();
    std::vector<double> marks{config.t_start, config.t_end};
    std::vector<double> discs = profile_discontinuities(profile);
    for (double t : discs)
        if (t > config.t_start && t < config.t_end) marks.push_back(t);
    for (double t : config.record_times)
        if (t > config.t_start && t < config.t_end) marks.push_back(t);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end(),
                            [](double x, double y) {
                                return std::abs(x - y) < 1e-12;
                            }),
                marks.end());
    auto is_in = [](const std::vector<double>& v, double t) {
        for (double x : v)
            if (std::abs(x - t) < 1e-12) return true;
        return false;
    };
    std::vector<TimeSegment> grid;
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        TimeSegment seg;
        seg.a = marks[i];
        seg.b = marks[i + 1];
        seg.nsub = std::max<int>(
            1, static_cast<int>(std::ceil((seg.b - seg.a) / config.dt - 1e-9)));
        seg.end_is_disc = is_in(discs, seg.b);
        seg.end_is_record = is_in(config.record_times, seg.b);
        grid.push_back(seg);
    }
    // The final state is always a snapshot, whether or not t_end was asked
    // for explicitly.
    grid.back().end_is_record = true;
    return grid;
}

/// Coupling snapshot for a stage time inside a segment: at a segment end
/// that is a profile discontinuity the left limit applies (the jump belongs
/// to the next segment).
inline CouplingSnapshot stage_snapshot(const DriveProfile& profile, double t,
                                       const TimeSegment& seg) {
    if (seg.end_is_disc && t >= seg.b)
        t = std::nextafter(seg.b, seg.a);
    return profile_at(profile, t);
}

/// Per-stage real-space operator: bond list plus onsite diagonal. All
/// couplings are real, so H is a real symmetric matrix applied to complex
/// amplitudes.
struct RealOperator {
    std::vector<std::array<int, 2>> bond_sites;  // fixed per lattice
    VectorXd bond_coupling;                      // per stage
    VectorXd onsite;                             // per stage (may be empty)
    int n_intra = 0;

    void init(const LatticeSpec& spec) {
        bond_sites.clear();
        for (int l = 0; l < spec.L; ++l)
            for (int m = 0; m + 1 < spec.M; ++m)
                bond_sites.push_back({site_index(spec, l, m),
                                      site_index(spec, l, m + 1)});
        n_intra = static_cast<int>(bond_sites.size());
        const int inter_count =
            spec.boundary == LatticeSpec::Boundary::periodic ? spec.L
                                                             : spec.L - 1;
        for (int l = 0; l < inter_count; ++l)
            bond_sites.push_back({site_index(spec, l, spec.M - 1),
                                  site_index(spec, (l + 1) % spec.L, 0)});
        bond_coupling.resize(bond_sites.size());
        onsite = VectorXd();
    }

    void fill(const LatticeSpec& spec, const CouplingSnapshot& snap,
              const NoiseTrack::StepPerturbation& pert) {
        const int n_total = static_cast<int>(bond_sites.size());
        for (int b = 0; b < n_intra; ++b)
            bond_coupling[b] =
                spec.v +
                (pert.bond_intra.size() != 0 ? pert.bond_intra[b] : pert.dv);
        for (int b = n_intra; b < n_total; ++b)
            bond_coupling[b] =
                snap.w + (pert.bond_inter.size() != 0
                              ? pert.bond_inter[b - n_intra]
                              : pert.dw);
        const bool need_diag = snap.delta != 0.0 || snap.onsite.size() != 0 ||
                               pert.onsite_uniform != 0.0 ||
                               pert.onsite_staggered != 0.0 ||
                               pert.onsite_site.size() != 0;
        if (!need_diag) {
            onsite = VectorXd();
            return;
        }
        onsite = VectorXd::Zero(spec.sites());
        for (int l = 0; l < spec.L; ++l) {
            for (int m = 0; m < spec.M; ++m) {
                const int s = site_index(spec, l, m);
                double d = pert.onsite_uniform;
                d += (m % 2 == 0 ? 1.0 : -1.0) *
                     (pert.onsite_staggered + snap.delta);
                if (snap.onsite.size() != 0) d += snap.onsite[s];
                if (pert.onsite_site.size() != 0) d += pert.onsite_site[s];
                onsite[s] = d;
            }
        }
    }

    /// out = H * x, column-wise over a matrix of orbitals.
    void apply(const MatrixXcd& x, MatrixXcd& out) const {
        if (onsite.size() != 0)
            out = onsite.asDiagonal() * x;
        else
            out.setZero(x.rows(), x.cols());
        for (std::size_t b = 0; b < bond_sites.size(); ++b) {
            const int i = bond_sites[b][0], j = bond_sites[b][1];
            const double c = bond_coupling[b];
            out.row(i) += c * x.row(j);
            out.row(j) += c * x.row(i);
        }
    }
};

/// Bloch-block operator for cell-periodic Hamiltonians: each state column
/// carries one wave number and evolves under its own M x M block.
struct KBlockOperator {
    int M = 2;
    double v_eff = 1.0, w_eff = 0.0;
    double diag_stagger = 0.0, diag_uniform = 0.0;
    VectorXd diag_cell;  // cell-periodic onsite pattern (may be empty)

    void fill(const LatticeSpec& spec, const CouplingSnapshot& snap,
              const NoiseTrack::StepPerturbation& pert) {
        M = spec.M;
        v_eff = spec.v + pert.dv;
        w_eff = snap.w + pert.dw;
        diag_stagger = snap.delta + pert.onsite_staggered;
        diag_uniform = pert.onsite_uniform;
        if (snap.onsite.size() != 0)
            diag_cell = snap.onsite.head(spec.M);
        else
            diag_cell = VectorXd();
    }

    void block(const cplx& phase_minus_k, MatrixXcd& H) const {
        H.setZero(M, M);
        for (int m = 0; m + 1 < M; ++m) {
            H(m, m + 1) = v_eff;
            H(m + 1, m) = v_eff;
        }
        H(0, M - 1) += w_eff * phase_minus_k;
        H(M - 1, 0) += w_eff * std::conj(phase_minus_k);
        for (int m = 0; m < M; ++m) {
            double d = diag_uniform + (m % 2 == 0 ? 1.0 : -1.0) * diag_stagger;
            if (diag_cell.size() != 0) d += diag_cell[m];
            H(m, m) += d;
        }
    }
};

/// Shared fixed-step RK4 driver. `rhs(t, seg, step_index, y, out)` must set
/// out = dy/dt; `on_record(t)` fires after the state reaches each requested
/// record time, always at t_end, and at t_start before stepping if t_start
/// was requested.
template <typename State, typename Rhs, typename OnRecord>
void run_rk4(State& y, const DriveProfile& profile,
             const EvolutionConfig& config, Rhs&& rhs, OnRecord&& on_record) {
    const auto grid = make_time_grid(profile, config);
    for (double t : config.record_times)
        if (std::abs(t - config.t_start) < 1e-12) on_record(config.t_start);
    State k1 = y, k2 = y, k3 = y, k4 = y, tmp = y;
    std::int64_t step_index = 0;
    for (const auto& seg : grid) {
        const double h = (seg.b - seg.a) / seg.nsub;
        for (int s = 0; s < seg.nsub; ++s) {
            const double t = seg.a + s * h;
            rhs(t, seg, step_index, y, k1);
            tmp = y + (h / 2.0) * k1;
            rhs(t + h / 2.0, seg, step_index, tmp, k2);
            tmp = y + (h / 2.0) * k2;
            rhs(t + h / 2.0, seg, step_index, tmp, k3);
            tmp = y + h * k3;
            rhs(t + h, seg, step_index, tmp, k4);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            ++step_index;
        }
        if (seg.end_is_record) on_record(seg.b);
    }
}

inline NoiseTrack::StepPerturbation no_perturbation() { return {}; }

}  // namespace detail

/// Snapshots of a pair of orbitals evolved under the one-particle
/// Hamiltonian; the two-particle state is reconstructed at each record time.
struct OrbitalSnapshots {
    std::vector<double> times;
    std::vector<TwoParticleWave> states;
    double max_norm_drift = 0.0;
};

struct SingleSnapshots {
    std::vector<double> times;
    std::vector<SingleParticleWave> states;
    double max_norm_drift = 0.0;
};

namespace detail {

/// Evolve a set of independent orbitals (columns) through H(t). Returns the
/// final columns; invokes `record(t, cols)` at requested times.
template <typename Record>
void evolve_columns(MatrixXcd& cols, const LatticeSpec& spec,
                    const DriveProfile& profile, const NoiseTrack* noise,
                    const EvolutionConfig& config, EvolvePath path,
                    Record&& record) {
    spec.validate();
    const bool noise_active = noise != nullptr && noise->spec().active();
    bool cell_periodic_noise = true;
    if (noise_active) {
        cell_periodic_noise =
            noise->spec().hopping_mode == NoiseSpec::HoppingMode::global &&
            noise->spec().onsite_mode != NoiseSpec::OnsiteMode::per_site;
    }
    const bool periodic = spec.boundary == LatticeSpec::Boundary::periodic;
    if (path == EvolvePath::automatic)
        path = (periodic && cell_periodic_noise) ? EvolvePath::k_block
                                                 : EvolvePath::real_space;
    if (path == EvolvePath::k_block && !(periodic && cell_periodic_noise))
        throw config_error(
            "evolve: k-block path requires a periodic lattice and "
            "cell-periodic noise");

    auto pert_at = [&](std::int64_t step) {
        return noise_active ? noise->at(step) : no_perturbation();
    };

    if (path == EvolvePath::real_space) {
        RealOperator op;
        op.init(spec);
        MatrixXcd hx(cols.rows(), cols.cols());
        std::int64_t cached_step = -1;
        NoiseTrack::StepPerturbation pert;
        auto rhs = [&](double t, const detail::TimeSegment& seg,
                       std::int64_t step, const MatrixXcd& y, MatrixXcd& out) {
            if (step != cached_step) {
                pert = pert_at(step);
                cached_step = step;
            }
            op.fill(spec, stage_snapshot(profile, t, seg), pert);
            op.apply(y, hx);
            out = cplx(0.0, -1.0) * hx;
        };
        run_rk4(cols, profile, config, rhs,
                [&](double t) { record(t, cols); });
    } else {
        // Transform columns to Bloch components: column j of `cols` becomes
        // L spinor columns (one per k) in `kc`, laid out orbital-major.
        const int L = spec.L, M = spec.M, ncols = static_cast<int>(cols.cols());
        MatrixXcd F(L, L);
        for (int l = 0; l < L; ++l)
            for (int n = 0; n < L; ++n)
                F(l, n) = std::exp(cplx(0.0, -2.0 * pi * n * l / L)) /
                          std::sqrt(double(L));
        std::vector<cplx> phase_mk(L);
        for (int n = 0; n < L; ++n)
            phase_mk[n] = std::exp(cplx(0.0, -2.0 * pi * n / L));
        MatrixXcd kc(M, L * ncols);
        for (int j = 0; j < ncols; ++j) {
            Eigen::Map<const MatrixXcd> psi(cols.col(j).data(), M, L);
            kc.block(0, j * L, M, L) = psi * F;
        }
        KBlockOperator op;
        MatrixXcd Hk(M, M);
        std::int64_t cached_step = -1;
        NoiseTrack::StepPerturbation pert;
        auto rhs = [&](double t, const detail::TimeSegment& seg,
                       std::int64_t step, const MatrixXcd& y, MatrixXcd& out) {
            if (step != cached_step) {
                pert = pert_at(step);
                cached_step = step;
            }
            op.fill(spec, stage_snapshot(profile, t, seg), pert);
            out.resize(M, y.cols());
            if (M == 2) {
                // Hand-rolled 2x2 blocks: this loop dominates packet runs.
                const double d0 =
                    op.diag_uniform + op.diag_stagger +
                    (op.diag_cell.size() != 0 ? op.diag_cell[0] : 0.0);
                const double d1 =
                    op.diag_uniform - op.diag_stagger +
                    (op.diag_cell.size() != 0 ? op.diag_cell[1] : 0.0);
                const cplx mi(0.0, -1.0);
                for (int n = 0; n < L; ++n) {
                    const cplx off = op.v_eff + op.w_eff * phase_mk[n];
                    for (int j = 0; j < ncols; ++j) {
                        const int c = j * L + n;
                        const cplx y0 = y(0, c), y1 = y(1, c);
                        out(0, c) = mi * (d0 * y0 + off * y1);
                        out(1, c) = mi * (std::conj(off) * y0 + d1 * y1);
                    }
                }
            } else {
                for (int j = 0; j < ncols; ++j) {
                    for (int n = 0; n < L; ++n) {
                        op.block(phase_mk[n], Hk);
                        out.col(j * L + n) =
                            cplx(0.0, -1.0) * (Hk * y.col(j * L + n));
                    }
                }
            }
        };
        auto back = [&](const MatrixXcd& kstate, MatrixXcd& site_cols) {
            for (int j = 0; j < ncols; ++j) {
                MatrixXcd psi = kstate.block(0, j * L, M, L) * F.adjoint();
                site_cols.col(j) =
                    Eigen::Map<const VectorXcd>(psi.data(), M * L);
            }
        };
        run_rk4(kc, profile, config, rhs, [&](double t) {
            back(kc, cols);
            record(t, cols);
        });
        back(kc, cols);
    }
}

}  // namespace detail

/// Evolve one orbital under the time-dependent one-particle Hamiltonian.
inline SingleSnapshots evolve_single(const SingleParticleWave& wave,
                                     const LatticeSpec& spec,
                                     const DriveProfile& profile,
                                     const NoiseTrack* noise,
                                     const EvolutionConfig& config,
                                     EvolvePath path = EvolvePath::automatic) {
    if (wave.amplitudes.size() != spec.sites())
        throw config_error("evolve_single: state/lattice size mismatch");
    SingleSnapshots snaps;
    MatrixXcd cols = wave.amplitudes;
    detail::evolve_columns(
        cols, spec, profile, noise, config, path, [&](double t, const MatrixXcd& c) {
            SingleParticleWave w;
            w.amplitudes = c.col(0);
            snaps.max_norm_drift =
                std::max(snaps.max_norm_drift, std::abs(w.norm() - 1.0));
            w.amplitudes /= w.norm();
            snaps.times.push_back(t);
            snaps.states.push_back(std::move(w));
        });
    const double drift = std::abs(cols.col(0).norm() - 1.0);
    snaps.max_norm_drift = std::max(snaps.max_norm_drift, drift);
    if (snaps.max_norm_drift > 1e-6)
        throw tolerance_error(
            "evolve_single: norm drift exceeds 1e-6; reduce dt");
    return snaps;
}

/// Evolve a two-particle state given as an orbital pair: each orbital is
/// propagated independently (the Hamiltonian is non-interacting and number
/// conserving) and the pair is reassembled at the record times.
inline OrbitalSnapshots evolve_orbitals(const TwoParticleWave& state,
                                        const LatticeSpec& spec,
                                        const DriveProfile& profile,
                                        const NoiseTrack* noise,
                                        const EvolutionConfig& config,
                                        EvolvePath path = EvolvePath::automatic) {
    if (state.representation != TwoParticleWave::Rep::orbital_pair)
        throw config_error("evolve_orbitals: orbital_pair representation required");
    if (state.phi1.amplitudes.size() != spec.sites())
        throw config_error("evolve_orbitals: state/lattice size mismatch");
    OrbitalSnapshots snaps;
    MatrixXcd cols(spec.sites(), 2);
    cols.col(0) = state.phi1.amplitudes;
    cols.col(1) = state.phi2.amplitudes;
    auto capture = [&](double t, const MatrixXcd& c) {
        SingleParticleWave p1, p2;
        p1.amplitudes = c.col(0);
        p2.amplitudes = c.col(1);
        snaps.max_norm_drift = std::max(
            {snaps.max_norm_drift, std::abs(p1.norm() - 1.0),
             std::abs(p2.norm() - 1.0)});
        p1.amplitudes /= p1.norm();
        p2.amplitudes /= p2.norm();
        snaps.times.push_back(t);
        snaps.states.push_back(pair_state(p1, p2, state.statistics));
    };
    detail::evolve_columns(cols, spec, profile, noise, config, path, capture);
    snaps.max_norm_drift =
        std::max({snaps.max_norm_drift, std::abs(cols.col(0).norm() - 1.0),
                  std::abs(cols.col(1).norm() - 1.0)});
    if (snaps.max_norm_drift > 1e-6)
        throw tolerance_error(
            "evolve_orbitals: norm drift exceeds 1e-6; reduce dt");
    return snaps;
}

/// Oracle path: RK4 on the dense two-particle tensor with the Hamiltonian
/// acting on both legs. Cost guard N_s <= 128 unless overridden.
inline std::vector<TwoParticleWave> evolve_dense_two_particle(
    const TwoParticleWave& state, const LatticeSpec& spec,
    const DriveProfile& profile, const NoiseTrack* noise,
    const EvolutionConfig& config, std::vector<double>* times_out = nullptr,
    bool allow_large = false) {
    if (!allow_large && spec.sites() > 128)
        throw config_error(
            "evolve_dense_two_particle: N_s > 128 (pass allow_large to override)");
    TwoParticleWave dense = densify(state);
    if (dense.tensor.rows() != spec.sites())
        throw config_error("evolve_dense_two_particle: size mismatch");
    detail::RealOperator op;
    op.init(spec);
    const bool noise_active = noise != nullptr && noise->spec().active();
    MatrixXcd left(spec.sites(), spec.sites()), right(spec.sites(), spec.sites());
    std::int64_t cached_step = -1;
    NoiseTrack::StepPerturbation pert;
    auto rhs = [&](double t, const detail::TimeSegment& seg, std::int64_t step,
                   const MatrixXcd& y, MatrixXcd& out) {
        if (step != cached_step) {
            pert = noise_active ? noise->at(step)
                                : detail::no_perturbation();
            cached_step = step;
        }
        op.fill(spec, detail::stage_snapshot(profile, t, seg), pert);
        op.apply(y, left);                       // H y
        op.apply(y.transpose(), right);          // H y^T  =>  (y H)^T
        out = cplx(0.0, -1.0) * (left + right.transpose());
    };
    std::vector<TwoParticleWave> out;
    std::vector<double> times;
    double max_drift = 0.0;
    MatrixXcd y = dense.tensor;
    detail::run_rk4(y, profile, config, rhs, [&](double t) {
        TwoParticleWave w;
        w.statistics = state.statistics;
        w.representation = TwoParticleWave::Rep::dense;
        w.tensor = y;
        max_drift = std::max(max_drift, std::abs(y.norm() - 1.0));
        times.push_back(t);
        out.push_back(std::move(w));
    });
    max_drift = std::max(max_drift, std::abs(y.norm() - 1.0));
    if (max_drift > 1e-6)
        throw tolerance_error(
            "evolve_dense_two_particle: norm drift exceeds 1e-6; reduce dt");
    if (times_out != nullptr) *times_out = times;
    return out;
}

/// Production open-system path. Uniform loss commutes with the block
/// structure of the density operator: the two-particle block stays
/// proportional to the unitarily evolved pure state with weight
/// exp(-2 gamma (t - t_start)), valid at any lattice size.
struct BlockLindbladResult {
    OrbitalSnapshots snapshots;
    std::vector<double> weights;  // two-particle block weight per snapshot
    double gamma = 0.0;
};

inline BlockLindbladResult evolve_lindblad_block(
    const TwoParticleWave& state, const LatticeSpec& spec,
    const DriveProfile& profile, const NoiseTrack* noise, double gamma,
    const EvolutionConfig& config, EvolvePath path = EvolvePath::automatic) {
    if (gamma < 0.0) throw config_error("evolve_lindblad_block: gamma must be >= 0");
    BlockLindbladResult result;
    result.gamma = gamma;
    result.snapshots = evolve_orbitals(state, spec, profile, noise, config, path);
    result.weights.reserve(result.snapshots.times.size());
    for (double t : result.snapshots.times)
        result.weights.push_back(std::exp(-2.0 * gamma * (t - config.t_start)));
    return result;
}

/// Evolution of a plane-wave pair tracked as two single-momentum spinors.
/// Momentum is conserved by every cell-periodic Hamiltonian, so the cost is
/// independent of L: each orbital is an M-spinor under its own Bloch block.
/// The orbitals start as `incident_band` eigenvectors of the profile at
/// t_start.
struct PlanePairResult {
    double k1 = 0.0, k2 = 0.0;
    VectorXcd c1, c2;  // final spinors in the sublattice basis
    Statistics statistics = Statistics::fermion;
};

inline PlanePairResult evolve_plane_pair(const LatticeSpec& spec,
                                         const DriveProfile& profile,
                                         const NoiseTrack* noise,
                                         const EvolutionConfig& config,
                                         double k1, double k2,
                                         Statistics statistics,
                                         int incident_band = 0) {
    spec.validate();
    if (spec.boundary != LatticeSpec::Boundary::periodic)
        throw config_error("evolve_plane_pair: periodic boundary required");
    if (k1 == k2)
        throw config_error("evolve_plane_pair: k1 must differ from k2");
    const bool noise_active = noise != nullptr && noise->spec().active();
    if (noise_active &&
        (noise->spec().hopping_mode != NoiseSpec::HoppingMode::global ||
         noise->spec().onsite_mode == NoiseSpec::OnsiteMode::per_site))
        throw config_error(
            "evolve_plane_pair: noise must be cell-periodic (momentum "
            "conserving)");
    PlanePairResult result;
    result.k1 = k1;
    result.k2 = k2;
    result.statistics = statistics;
    const CouplingSnapshot snap0 = profile_at(profile, config.t_start);
    VectorXd e;
    MatrixXcd U;
    solve_bloch_at(spec, snap0, k1, e, U);
    MatrixXcd y(spec.M, 2);
    y.col(0) = U.col(incident_band);
    solve_bloch_at(spec, snap0, k2, e, U);
    y.col(1) = U.col(incident_band);
    const cplx ph1 = std::exp(cplx(0.0, -k1)), ph2 = std::exp(cplx(0.0, -k2));
    detail::KBlockOperator op;
    MatrixXcd Hk(spec.M, spec.M);
    std::int64_t cached_step = -1;
    NoiseTrack::StepPerturbation pert;
    auto rhs = [&](double t, const detail::TimeSegment& seg, std::int64_t step,
                   const MatrixXcd& yy, MatrixXcd& out) {
        if (step != cached_step) {
            pert = noise_active ? noise->at(step) : detail::no_perturbation();
            cached_step = step;
        }
        op.fill(spec, detail::stage_snapshot(profile, t, seg), pert);
        out.resize(spec.M, 2);
        op.block(ph1, Hk);
        out.col(0) = cplx(0.0, -1.0) * (Hk * yy.col(0));
        op.block(ph2, Hk);
        out.col(1) = cplx(0.0, -1.0) * (Hk * yy.col(1));
    };
    detail::run_rk4(y, profile, config, rhs, [](double) {});
    const double drift =
        std::max(std::abs(y.col(0).norm() - 1.0), std::abs(y.col(1).norm() - 1.0));
    if (drift > 1e-6)
        throw tolerance_error("evolve_plane_pair: norm drift exceeds 1e-6");
    result.c1 = y.col(0) / y.col(0).norm();
    result.c2 = y.col(1) / y.col(1).norm();
    return result;
}

/// Basis bookkeeping for the dense open-system solver: vacuum, all single
/// sites, and all canonical site pairs (x1 < x2 for fermions, x1 <= x2 for
/// bosons, diagonal pairs carrying the 1/sqrt(2) normalization).
struct FockBasis {
    int N = 0;
    Statistics statistics = Statistics::fermion;
    std::vector<std::array<int, 2>> pairs;  // canonical (i, j) per pair index
    Eigen::MatrixXi pair_index;             // (i, j) -> pair index, -1 if none

    int npairs() const { return static_cast<int>(pairs.size()); }
    int dim() const { return 1 + N + npairs(); }
    int single_offset() const { return 1; }
    int pair_offset() const { return 1 + N; }
};

inline FockBasis make_fock_basis(const LatticeSpec& spec, Statistics statistics) {
    FockBasis basis;
    basis.N = spec.sites();
    basis.statistics = statistics;
    basis.pair_index.setConstant(basis.N, basis.N, -1);
    for (int i = 0; i < basis.N; ++i) {
        const int j0 = statistics == Statistics::fermion ? i + 1 : i;
        for (int j = j0; j < basis.N; ++j) {
            basis.pair_index(i, j) = basis.npairs();
            basis.pairs.push_back({i, j});
        }
    }
    return basis;
}

namespace detail {

/// Accumulate amplitude of the (unordered) creation product
/// a^dag_a a^dag_b |0> onto the canonical pair basis.
template <typename Sink>
void add_pair_amp(const FockBasis& basis, int a, int b, double amp, Sink&& sink) {
    if (basis.statistics == Statistics::fermion) {
        if (a == b) return;
        if (a < b)
            sink(basis.pair_index(a, b), amp);
        else
            sink(basis.pair_index(b, a), -amp);
    } else {
        if (a == b)
            sink(basis.pair_index(a, a), amp * std::sqrt(2.0));
        else
            sink(basis.pair_index(std::min(a, b), std::max(a, b)), amp);
    }
}

/// Hamiltonian over the full basis for one bond/onsite configuration.
/// Complex scalar so sparse-dense products against density matrices are
/// homogeneous in type.
inline Eigen::SparseMatrix<cplx> fock_hamiltonian(const FockBasis& basis,
                                                  const RealOperator& op) {
    std::vector<Eigen::Triplet<cplx>> trip;
    const int so = basis.single_offset(), po = basis.pair_offset();
    for (std::size_t b = 0; b < op.bond_sites.size(); ++b) {
        const int x = op.bond_sites[b][0], y = op.bond_sites[b][1];
        const double c = op.bond_coupling[b];
        trip.emplace_back(so + x, so + y, c);
        trip.emplace_back(so + y, so + x, c);
    }
    if (op.onsite.size() != 0)
        for (int s = 0; s < basis.N; ++s)
            if (op.onsite[s] != 0.0)
                trip.emplace_back(so + s, so + s, op.onsite[s]);
    // Pair sector: apply the hop a^dag_a a_b to each leg of the canonical
    // pair, tracking statistics signs and diagonal-pair normalization.
    for (int p = 0; p < basis.npairs(); ++p) {
        const int i = basis.pairs[p][0], j = basis.pairs[p][1];
        const double self = i == j ? std::sqrt(2.0) : 1.0;  // e_p as a'a'|0>/self
        auto hop = [&](int from, int to, int partner, double c) {
            // a^dag_to a_from acting on the leg `from`, partner untouched.
            (void)from;
            add_pair_amp(basis, to, partner, c / self,
                         [&](int q, double amp) {
                             trip.emplace_back(po + q, po + p, amp);
                         });
        };
        auto hop_both_legs = [&](int x, int y, double c) {
            // The same-site pair (i == j) has both legs equivalent: acting on
            // either gives the same term, and the sqrt(2) bookkeeping below
            // covers the multiplicity.
            if (i == j) {
                if (y == i) hop(i, x, i, 2.0 * c);
            } else {
                if (y == i) hop(i, x, j, c);
                if (y == j) hop(j, x, i, basis.statistics == Statistics::fermion
                                             ? -c
                                             : c);
            }
        };
        for (std::size_t b = 0; b < op.bond_sites.size(); ++b) {
            const int x = op.bond_sites[b][0], y = op.bond_sites[b][1];
            const double c = op.bond_coupling[b];
            hop_both_legs(x, y, c);
            hop_both_legs(y, x, c);
        }
        double diag = 0.0;
        if (op.onsite.size() != 0) diag = op.onsite[i] + op.onsite[j];
        if (diag != 0.0) trip.emplace_back(po + p, po + p, diag);
    }
    Eigen::SparseMatrix<cplx> H(basis.dim(), basis.dim());
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

/// Site-loss jump operators a_s over the full basis.
inline std::vector<Eigen::SparseMatrix<cplx>> fock_jumps(const FockBasis& basis) {
    std::vector<Eigen::SparseMatrix<cplx>> jumps;
    const int so = basis.single_offset(), po = basis.pair_offset();
    for (int s = 0; s < basis.N; ++s) {
        std::vector<Eigen::Triplet<cplx>> trip;
        trip.emplace_back(0, so + s, 1.0);
        for (int p = 0; p < basis.npairs(); ++p) {
            const int i = basis.pairs[p][0], j = basis.pairs[p][1];
            if (basis.statistics == Statistics::fermion) {
                if (s == i) trip.emplace_back(so + j, po + p, 1.0);
                if (s == j) trip.emplace_back(so + i, po + p, -1.0);
            } else if (i == j) {
                if (s == i) trip.emplace_back(so + i, po + p, std::sqrt(2.0));
            } else {
                if (s == i) trip.emplace_back(so + j, po + p, 1.0);
                if (s == j) trip.emplace_back(so + i, po + p, 1.0);
            }
        }
        Eigen::SparseMatrix<cplx> J(basis.dim(), basis.dim());
        J.setFromTriplets(trip.begin(), trip.end());
        jumps.push_back(std::move(J));
    }
    return jumps;
}

}  // namespace detail

/// Density operator over a stated basis. `basis` is "fock:fermion" /
/// "fock:boson" for the dense site-pair solver, or the momentum-restricted
/// tags produced by projections.
struct DensityBlock {
    std::string basis;
    MatrixXcd rho;

    double trace() const { return rho.trace().real(); }
};

inline std::string fock_basis_tag(Statistics s) {
    return s == Statistics::fermion ? "fock:fermion" : "fock:boson";
}

/// Pair-sector coefficient vector of a dense two-particle wave: component at
/// pair (i, j) is sqrt(2) * Psi(i, j) off the diagonal and Psi(i, i) on it.
inline VectorXcd pair_sector_vector(const TwoParticleWave& state,
                                    const FockBasis& basis) {
    const TwoParticleWave dense = densify(state);
    if (dense.tensor.rows() != basis.N)
        throw config_error("pair_sector_vector: size mismatch");
    VectorXcd v(basis.npairs());
    for (int p = 0; p < basis.npairs(); ++p) {
        const int i = basis.pairs[p][0], j = basis.pairs[p][1];
        v[p] = i == j ? dense.tensor(i, i)
                      : std::sqrt(2.0) * dense.tensor(i, j);
    }
    return v;
}

/// Density operator of a pure two-particle state embedded in the full basis.
inline DensityBlock density_from_pure_pair(const TwoParticleWave& state,
                                           const FockBasis& basis) {
    DensityBlock block;
    block.basis = fock_basis_tag(basis.statistics);
    block.rho = MatrixXcd::Zero(basis.dim(), basis.dim());
    const VectorXcd v = pair_sector_vector(state, basis);
    block.rho.block(basis.pair_offset(), basis.pair_offset(), basis.npairs(),
                    basis.npairs()) = v * v.adjoint();
    return block;
}

/// Two-particle sector of a density operator.
inline MatrixXcd two_particle_block(const DensityBlock& block,
                                    const FockBasis& basis) {
    return block.rho.block(basis.pair_offset(), basis.pair_offset(),
                           basis.npairs(), basis.npairs());
}

struct DensitySnapshots {
    std::vector<double> times;
    std::vector<DensityBlock> states;
    double max_trace_drift = 0.0;
    double max_hermiticity_drift = 0.0;
    double min_eigenvalue = 0.0;
};

/// Dense oracle for the open system: RK4 on
/// d rho / dt = -i [H, rho] + gamma * sum_s (a_s rho a_s^+ - {a_s^+ a_s, rho}/2)
/// over vacuum + single + pair sectors. Uniform loss means the
/// anticommutator is diagonal in particle number. Guarded to N_s <= 32.
inline DensitySnapshots evolve_lindblad_dense(const DensityBlock& rho0,
                                              const LatticeSpec& spec,
                                              const DriveProfile& profile,
                                              double gamma,
                                              const EvolutionConfig& config,
                                              Statistics statistics,
                                              bool allow_large = false) {
    if (!allow_large && spec.sites() > 32)
        throw config_error(
            "evolve_lindblad_dense: N_s > 32 (pass allow_large to override)");
    if (gamma < 0.0)
        throw config_error("evolve_lindblad_dense: gamma must be >= 0");
    const FockBasis basis = make_fock_basis(spec, statistics);
    if (rho0.rho.rows() != basis.dim())
        throw config_error("evolve_lindblad_dense: dimension mismatch");
    detail::RealOperator op;
    op.init(spec);
    const int dim = basis.dim();
    VectorXd number(dim);
    number[0] = 0.0;
    for (int s = 0; s < basis.N; ++s) number[basis.single_offset() + s] = 1.0;
    for (int p = 0; p < basis.npairs(); ++p)
        number[basis.pair_offset() + p] = 2.0;
    // Site loss commutes with particle number, so the anticommutator is a
    // coefficient-wise weight (N_row + N_col)/2 on the density matrix.
    MatrixXcd halfsum(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            halfsum(r, c) = 0.5 * (number[r] + number[c]);
    // The jump sum rho -> sum_s J_s rho J_s^+ is one sparse superoperator on
    // the column-vectorized density matrix: out(a,c) gains
    // J_s(a,b) conj(J_s(c,d)) * rho(b,d).
    Eigen::SparseMatrix<cplx> dissipator;
    if (gamma > 0.0) {
        std::vector<Eigen::Triplet<cplx>> trip;
        for (const auto& J : detail::fock_jumps(basis)) {
            for (int ob = 0; ob < J.outerSize(); ++ob)
                for (Eigen::SparseMatrix<cplx>::InnerIterator it1(J, ob); it1;
                     ++it1)
                    for (int od = 0; od < J.outerSize(); ++od)
                        for (Eigen::SparseMatrix<cplx>::InnerIterator it2(J, od);
                             it2; ++it2)
                            trip.emplace_back(
                                it1.row() + dim * it2.row(),
                                it1.col() + dim * it2.col(),
                                it1.value() * std::conj(it2.value()));
        }
        dissipator.resize(dim * dim, dim * dim);
        dissipator.setFromTriplets(trip.begin(), trip.end());
    }
    const auto none = detail::no_perturbation();
    Eigen::SparseMatrix<cplx> H;
    double cached_w = std::numeric_limits<double>::quiet_NaN();
    double cached_delta = std::numeric_limits<double>::quiet_NaN();
    MatrixXcd Hy(dim, dim), yH(dim, dim);
    auto rhs = [&](double t, const detail::TimeSegment& seg, std::int64_t,
                   const MatrixXcd& y, MatrixXcd& out) {
        const CouplingSnapshot snap = detail::stage_snapshot(profile, t, seg);
        if (snap.w != cached_w || snap.delta != cached_delta) {
            op.fill(spec, snap, none);
            H = detail::fock_hamiltonian(basis, op);
            cached_w = snap.w;
            cached_delta = snap.delta;
        }
        Hy.noalias() = H * y;
        yH.noalias() = y * H;
        out = cplx(0.0, -1.0) * (Hy - yH);
        if (gamma > 0.0) {
            out -= gamma * halfsum.cwiseProduct(y);
            Eigen::Map<VectorXcd> out_vec(out.data(), dim * dim);
            Eigen::Map<const VectorXcd> y_vec(y.data(), dim * dim);
            out_vec += gamma * (dissipator * y_vec);
        }
    };
    DensitySnapshots snaps;
    MatrixXcd y = rho0.rho;
    const double trace0 = y.trace().real();
    snaps.min_eigenvalue = 0.0;
    detail::run_rk4(y, profile, config, rhs, [&](double t) {
        DensityBlock block;
        block.basis = rho0.basis;
        block.rho = y;
        snaps.max_trace_drift = std::max(
            snaps.max_trace_drift, std::abs(y.trace().real() - trace0));
        snaps.max_hermiticity_drift =
            std::max(snaps.max_hermiticity_drift,
                     (y - y.adjoint()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (y + y.adjoint()));
        snaps.min_eigenvalue =
            std::min(snaps.min_eigenvalue, es.eigenvalues().minCoeff());
        snaps.times.push_back(t);
        snaps.states.push_back(std::move(block));
    });
    snaps.max_trace_drift =
        std::max(snaps.max_trace_drift, std::abs(y.trace().real() - trace0));
    if (snaps.max_trace_drift > 1e-8)
        throw tolerance_error(
            "evolve_lindblad_dense: trace drift exceeds 1e-8; reduce dt");
    if (snaps.max_hermiticity_drift > 1e-8 || snaps.min_eigenvalue < -1e-8)
        throw tolerance_error(
            "evolve_lindblad_dense: positivity/hermiticity drift; reduce dt");
    return snaps;
}

}  // namespace sshbell
