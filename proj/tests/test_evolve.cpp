#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sshbell/common.hpp"
#include "sshbell/evolve.hpp"
#include "sshbell/lattice.hpp"
#include "sshbell/schedule.hpp"
#include "sshbell/states.hpp"

using namespace sshbell;

namespace {

DriveProfile step_profile(double t_c = 8.0, double eta_i = 0.5,
                          double eta_f = -0.5) {
    DriveProfile p;
    p.kind = DriveProfile::Kind::step;
    p.eta_i = eta_i;
    p.eta_f = eta_f;
    p.t_c = t_c;
    return p;
}

EvolutionConfig window(double t_end, double dt = 0.005) {
    EvolutionConfig cfg;
    cfg.dt = dt;
    cfg.t_start = 0.0;
    cfg.t_end = t_end;
    return cfg;
}

TwoParticleWave packet_pair(const LatticeSpec& spec, const BandTable& bands,
                            Statistics stats = Statistics::fermion) {
    return pair_state(
        gaussian_orbital(spec, bands, 0, 0.45 * pi, 0.25 * pi, spec.L / 4.0),
        gaussian_orbital(spec, bands, 0, 0.55 * pi, 0.25 * pi, spec.L / 4.0),
        stats);
}

// matrix exponential of -i H t for a small hermitian block
MatrixXcd unitary_of(const MatrixXcd& H, double t) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
    const VectorXcd phases =
        (cplx(0.0, -t) * es.eigenvalues().cast<cplx>().array())
            .exp()
            .matrix();
    return es.eigenvectors() * phases.asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("evolution config validation") {
    EvolutionConfig cfg = window(8.0);
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = window(8.0);
    cfg.t_end = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = window(8.0);
    cfg.record_times = {9.0};
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("final state is recorded even without explicit record times") {
    LatticeSpec spec;
    spec.L = 8;
    const BandTable bands = solve_bands(spec, profile_at(step_profile(), 0.0));
    const SingleParticleWave wave =
        plane_wave_orbital(spec, bands, 0, bands.kgrid[2]);

    EvolutionConfig cfg = window(4.0);
    const SingleSnapshots bare =
        evolve_single(wave, spec, step_profile(), nullptr, cfg);
    REQUIRE(bare.times.size() == 1);
    CHECK(bare.times.back() == Catch::Approx(4.0).margin(1e-12));

    cfg.record_times = {0.0, 2.0, 4.0};  // t_end listed explicitly: no dupe
    const SingleSnapshots listed =
        evolve_single(wave, spec, step_profile(), nullptr, cfg);
    REQUIRE(listed.times.size() == 3);
    CHECK(listed.times[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(listed.times[1] == Catch::Approx(2.0).margin(1e-12));
    CHECK(listed.times[2] == Catch::Approx(4.0).margin(1e-12));
    // the t = 0 snapshot is the initial state
    CHECK((listed.states[0].amplitudes - wave.amplitudes)
              .cwiseAbs()
              .maxCoeff() < 1e-14);
}

TEST_CASE("piecewise-constant drive matches the exact mode unitaries") {
    LatticeSpec spec;
    spec.L = 12;
    // boundary time deliberately off the step grid: segments are clamped
    const DriveProfile p = step_profile(3.1234);
    const EvolutionConfig cfg = window(6.0, 0.002);
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const int ik = 3;
    const double k = pre.kgrid[ik];
    const SingleParticleWave wave = plane_wave_orbital(spec, pre, 0, k);

    const SingleSnapshots snaps = evolve_single(wave, spec, p, nullptr, cfg);

    // exact: the Bloch block advances the spinor through both segments
    const MatrixXcd H_pre = bloch_hamiltonian(spec, profile_at(p, 0.0), k);
    const MatrixXcd H_post = bloch_hamiltonian(spec, profile_at(p, 6.0), k);
    VectorXcd spinor(2);
    spinor << wave.amplitudes[0], wave.amplitudes[1];  // cell 0 carries e^{ik*0}
    spinor = unitary_of(H_post, 6.0 - p.t_c) * unitary_of(H_pre, p.t_c) *
             spinor * std::sqrt(double(spec.L));
    VectorXcd expected(spec.sites());
    for (int l = 0; l < spec.L; ++l)
        for (int m = 0; m < 2; ++m)
            expected[site_index(spec, l, m)] =
                spinor[m] * std::exp(cplx(0.0, k * l)) /
                std::sqrt(double(spec.L));
    CHECK((snaps.states.back().amplitudes - expected).cwiseAbs().maxCoeff() <
          1e-9);
}

TEST_CASE("momentum-block and real-space integrators agree") {
    LatticeSpec spec;
    spec.L = 12;
    const DriveProfile p = step_profile();
    const EvolutionConfig cfg = window(16.0);
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const TwoParticleWave pair = packet_pair(spec, pre);

    SECTION("without noise") {
        const OrbitalSnapshots kb = evolve_orbitals(pair, spec, p, nullptr,
                                                    cfg, EvolvePath::k_block);
        const OrbitalSnapshots rs = evolve_orbitals(
            pair, spec, p, nullptr, cfg, EvolvePath::real_space);
        CHECK((kb.states.back().phi1.amplitudes -
               rs.states.back().phi1.amplitudes)
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
        CHECK((kb.states.back().phi2.amplitudes -
               rs.states.back().phi2.amplitudes)
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
    }

    SECTION("with cell-periodic noise") {
        NoiseSpec ns;
        ns.zeta = 0.05;
        ns.xi = 0.05;
        ns.seed = 9;
        const NoiseTrack track(ns, spec, 2);
        const OrbitalSnapshots kb = evolve_orbitals(pair, spec, p, &track,
                                                    cfg, EvolvePath::k_block);
        const OrbitalSnapshots rs = evolve_orbitals(
            pair, spec, p, &track, cfg, EvolvePath::real_space);
        CHECK((kb.states.back().phi1.amplitudes -
               rs.states.back().phi1.amplitudes)
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
    }
}

TEST_CASE("path selection respects the noise structure and the boundary") {
    LatticeSpec spec;
    spec.L = 8;
    const DriveProfile p = step_profile(2.0);
    const EvolutionConfig cfg = window(4.0);
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const SingleParticleWave wave =
        plane_wave_orbital(spec, pre, 0, pre.kgrid[1]);

    NoiseSpec per_bond;
    per_bond.zeta = 0.05;
    per_bond.hopping_mode = NoiseSpec::HoppingMode::per_bond;
    per_bond.seed = 5;
    const NoiseTrack track(per_bond, spec, 0);
    // the momentum block cannot represent bond-resolved noise
    CHECK_THROWS_AS(
        evolve_single(wave, spec, p, &track, cfg, EvolvePath::k_block),
        config_error);
    CHECK_NOTHROW(evolve_single(wave, spec, p, &track, cfg));

    LatticeSpec open_spec = spec;
    open_spec.boundary = LatticeSpec::Boundary::open;
    SingleParticleWave local;
    local.amplitudes = VectorXcd::Zero(open_spec.sites());
    local.amplitudes[5] = 1.0;
    CHECK_THROWS_AS(evolve_single(local, open_spec, p, nullptr, cfg,
                                  EvolvePath::k_block),
                    config_error);
    CHECK_NOTHROW(evolve_single(local, open_spec, p, nullptr, cfg));
}

TEST_CASE("norm is conserved to high accuracy") {
    LatticeSpec spec;
    spec.L = 16;
    const DriveProfile p = step_profile(16.0);
    const EvolutionConfig cfg = window(32.0);
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const OrbitalSnapshots snaps = evolve_orbitals(
        packet_pair(spec, pre), spec, p, nullptr, cfg, EvolvePath::k_block);
    CHECK(snaps.max_norm_drift < 1e-10);
}

TEST_CASE("plane-wave pair evolution matches the full orbital integrator") {
    LatticeSpec spec;
    spec.L = 16;
    const DriveProfile p = step_profile(4.0);
    const EvolutionConfig cfg = window(8.0, 0.002);
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const int ik1 = 3, ik2 = 7;
    const double k1 = pre.kgrid[ik1], k2 = pre.kgrid[ik2];

    const PlanePairResult fast = evolve_plane_pair(
        spec, p, nullptr, cfg, k1, k2, Statistics::fermion);
    const TwoParticleWave pair =
        pair_state(plane_wave_orbital(spec, pre, 0, k1),
                   plane_wave_orbital(spec, pre, 0, k2), Statistics::fermion);
    const OrbitalSnapshots full = evolve_orbitals(pair, spec, p, nullptr, cfg);

    VectorXcd rebuilt1(spec.sites()), rebuilt2(spec.sites());
    for (int l = 0; l < spec.L; ++l) {
        for (int m = 0; m < 2; ++m) {
            rebuilt1[site_index(spec, l, m)] =
                fast.c1[m] * std::exp(cplx(0.0, k1 * l)) /
                std::sqrt(double(spec.L));
            rebuilt2[site_index(spec, l, m)] =
                fast.c2[m] * std::exp(cplx(0.0, k2 * l)) /
                std::sqrt(double(spec.L));
        }
    }
    CHECK((rebuilt1 - full.states.back().phi1.amplitudes)
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK((rebuilt2 - full.states.back().phi2.amplitudes)
              .cwiseAbs()
              .maxCoeff() < 1e-10);

    CHECK_THROWS_AS(evolve_plane_pair(spec, p, nullptr, cfg, k1, k1,
                                      Statistics::fermion),
                    config_error);
    LatticeSpec open_spec = spec;
    open_spec.boundary = LatticeSpec::Boundary::open;
    CHECK_THROWS_AS(evolve_plane_pair(open_spec, p, nullptr, cfg, k1, k2,
                                      Statistics::fermion),
                    config_error);
}

TEST_CASE("orbital and dense two-particle integrators agree") {
    LatticeSpec spec;
    spec.L = 8;
    const DriveProfile p = step_profile(4.0);
    EvolutionConfig cfg = window(8.0);
    cfg.record_times = {4.0, 8.0};
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const TwoParticleWave pair = packet_pair(spec, pre);
    const OrbitalSnapshots orb = evolve_orbitals(pair, spec, p, nullptr, cfg);
    std::vector<double> times;
    const std::vector<TwoParticleWave> dense =
        evolve_dense_two_particle(pair, spec, p, nullptr, cfg, &times);
    REQUIRE(times.size() == orb.times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(times[i] == Catch::Approx(orb.times[i]).margin(1e-12));
        // The two integrators truncate differently at O(dt^4), so they
        // agree to the step error, not to machine precision.
        CHECK((densify(orb.states[i]).tensor - dense[i].tensor)
                  .cwiseAbs()
                  .maxCoeff() < 1e-8);
    }
}

TEST_CASE("dense two-particle integrator refuses oversized lattices") {
    LatticeSpec spec;
    spec.L = 65;  // 130 sites
    const DriveProfile p = step_profile(4.0);
    const EvolutionConfig cfg = window(8.0);
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const TwoParticleWave pair =
        pair_state(plane_wave_orbital(spec, pre, 0, pre.kgrid[1]),
                   plane_wave_orbital(spec, pre, 0, pre.kgrid[2]),
                   Statistics::fermion);
    CHECK_THROWS_AS(evolve_dense_two_particle(pair, spec, p, nullptr, cfg),
                    config_error);
}

TEST_CASE("uniform-loss block evolution carries the decay weight") {
    LatticeSpec spec;
    spec.L = 8;
    const DriveProfile p = step_profile(4.0);
    EvolutionConfig cfg = window(8.0);
    cfg.record_times = {0.0, 4.0, 8.0};
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const TwoParticleWave pair = packet_pair(spec, pre);
    const double gamma = 0.01;
    const BlockLindbladResult result =
        evolve_lindblad_block(pair, spec, p, nullptr, gamma, cfg);
    REQUIRE(result.weights.size() == result.snapshots.times.size());
    for (std::size_t i = 0; i < result.weights.size(); ++i) {
        CHECK(result.weights[i] ==
              Catch::Approx(std::exp(-2.0 * gamma *
                                     (result.snapshots.times[i] - 0.0)))
                  .margin(1e-12));
    }
    CHECK_THROWS_AS(
        evolve_lindblad_block(pair, spec, p, nullptr, -0.1, cfg),
        config_error);
}

TEST_CASE("fock basis enumerates vacuum, singles and pairs") {
    LatticeSpec spec;
    spec.L = 12;  // 24 sites
    const FockBasis fermion = make_fock_basis(spec, Statistics::fermion);
    CHECK(fermion.N == 24);
    CHECK(fermion.npairs() == 276);  // 24 choose 2
    CHECK(fermion.dim() == 301);
    const FockBasis boson = make_fock_basis(spec, Statistics::boson);
    CHECK(boson.npairs() == 300);  // pairs plus double occupations
    CHECK(boson.dim() == 325);
    // the pair lookup table inverts the enumeration
    for (int p = 0; p < fermion.npairs(); ++p) {
        const auto [i, j] = fermion.pairs[p];
        CHECK(fermion.pair_index(i, j) == p);
    }
}

TEST_CASE("fock hamiltonian is hermitian and block-diagonal in particle number") {
    LatticeSpec spec;
    spec.L = 4;
    const CouplingSnapshot snap = profile_at(step_profile(), 0.0);
    const FockBasis basis = make_fock_basis(spec, Statistics::fermion);
    detail::RealOperator op;
    op.init(spec);
    op.fill(spec, snap, detail::no_perturbation());
    const MatrixXcd H = MatrixXcd(detail::fock_hamiltonian(basis, op));
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    // vacuum is uncoupled
    CHECK(H.row(0).cwiseAbs().sum() == 0.0);
    // the single-particle block reproduces the chain Hamiltonian
    const MatrixXcd chain =
        MatrixXcd(build_real_space_hamiltonian(spec, snap));
    CHECK((H.block(1, 1, basis.N, basis.N) - chain).cwiseAbs().maxCoeff() <
          1e-14);
    // no matrix elements between singles and pairs
    CHECK(H.block(1, basis.pair_offset(), basis.N, basis.npairs())
              .cwiseAbs()
              .maxCoeff() == 0.0);
    // one loss operator per site
    CHECK(detail::fock_jumps(basis).size() ==
          static_cast<std::size_t>(basis.N));
}

TEST_CASE("pure pairs embed into the fock space with unit weight") {
    LatticeSpec spec;
    spec.L = 6;
    const BandTable bands = solve_bands(spec, profile_at(step_profile(), 0.0));
    for (Statistics stats : {Statistics::fermion, Statistics::boson}) {
        const FockBasis basis = make_fock_basis(spec, stats);
        const TwoParticleWave pair = pair_state(
            plane_wave_orbital(spec, bands, 0, bands.kgrid[1]),
            plane_wave_orbital(spec, bands, 0, bands.kgrid[4]), stats);
        const VectorXcd v = pair_sector_vector(pair, basis);
        CHECK(v.norm() == Catch::Approx(1.0).margin(1e-12));
        const DensityBlock rho = density_from_pure_pair(pair, basis);
        CHECK(rho.trace() == Catch::Approx(1.0).margin(1e-12));
        const MatrixXcd block = two_particle_block(rho, basis);
        CHECK((block - v * v.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("dense lindblad evolution preserves trace and matches closed case") {
    LatticeSpec spec;
    spec.L = 6;
    const DriveProfile p = step_profile(4.0);
    const EvolutionConfig cfg = window(8.0);
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const TwoParticleWave pair =
        pair_state(plane_wave_orbital(spec, pre, 0, pre.kgrid[1]),
                   plane_wave_orbital(spec, pre, 0, pre.kgrid[4]),
                   Statistics::fermion);
    const FockBasis basis = make_fock_basis(spec, Statistics::fermion);
    const DensityBlock rho0 = density_from_pure_pair(pair, basis);

    const DensitySnapshots open_run =
        evolve_lindblad_dense(rho0, spec, p, 0.05, cfg, Statistics::fermion);
    CHECK(open_run.max_trace_drift < 1e-8);
    CHECK(open_run.max_hermiticity_drift < 1e-8);
    CHECK(open_run.min_eigenvalue > -1e-8);

    // gamma = 0 reduces to the pure unitary evolution of the pair
    const DensitySnapshots closed =
        evolve_lindblad_dense(rho0, spec, p, 0.0, cfg, Statistics::fermion);
    const OrbitalSnapshots orb = evolve_orbitals(pair, spec, p, nullptr, cfg);
    const VectorXcd c = pair_sector_vector(orb.states.back(), basis);
    const MatrixXcd block = two_particle_block(closed.states.back(), basis);
    CHECK((block - c * c.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("dense lindblad solver refuses oversized lattices") {
    LatticeSpec spec;
    spec.L = 17;  // 34 sites
    const DriveProfile p = step_profile(4.0);
    const EvolutionConfig cfg = window(8.0);
    const FockBasis basis = make_fock_basis(spec, Statistics::fermion);
    DensityBlock rho0;
    rho0.basis = fock_basis_tag(Statistics::fermion);
    rho0.rho = MatrixXcd::Zero(basis.dim(), basis.dim());
    rho0.rho(0, 0) = 1.0;
    CHECK_THROWS_AS(
        evolve_lindblad_dense(rho0, spec, p, 0.01, cfg, Statistics::fermion),
        config_error);
}

TEST_CASE("noisy evolution is reproducible and run-index dependent") {
    LatticeSpec spec;
    spec.L = 8;
    const DriveProfile p = step_profile(2.0);
    const EvolutionConfig cfg = window(4.0);
    const BandTable pre = solve_bands(spec, profile_at(p, 0.0));
    const SingleParticleWave wave =
        plane_wave_orbital(spec, pre, 0, pre.kgrid[2]);
    NoiseSpec ns;
    ns.zeta = 0.05;
    ns.xi = 0.05;
    ns.seed = 21;
    const NoiseTrack track_a(ns, spec, 0);
    const NoiseTrack track_b(ns, spec, 0);
    const NoiseTrack track_c(ns, spec, 1);
    const VectorXcd a =
        evolve_single(wave, spec, p, &track_a, cfg).states.back().amplitudes;
    const VectorXcd b =
        evolve_single(wave, spec, p, &track_b, cfg).states.back().amplitudes;
    const VectorXcd c =
        evolve_single(wave, spec, p, &track_c, cfg).states.back().amplitudes;
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - c).cwiseAbs().maxCoeff() > 1e-6);
}
