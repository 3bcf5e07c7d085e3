#pragma once
// Batch front end: each command reads a strict key = value config, runs the
// corresponding study, and emits CSV/JSON data files plus a manifest.json
// that records every parameter actually used, all derived seeds, warnings,
// and the output list. Data files carry no timestamps, so re-running a
// command with the same manifest parameters reproduces them byte-exactly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sshbell/config.hpp"
#include "sshbell/csv.hpp"
#include "sshbell/entangle.hpp"
#include "sshbell/manifest.hpp"
#include "sshbell/threading.hpp"

namespace sshbell {

struct CommandContext {
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int workers = 1;
    bool oracle = false;  // enable dense cross-check outputs
};

namespace cli_detail {

/// Collects outputs and warnings while a command runs, then writes the
/// manifest. path() registers the file in the manifest output list.
struct Emitter {
    RunManifest manifest;
    std::string dir;
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();

    Emitter(const std::string& command, const CommandContext& ctx)
        : dir(ctx.out_dir.empty() ? "." : ctx.out_dir) {
        manifest.command = command;
        manifest.master_seed = ctx.seed;
        manifest.workers = ctx.workers;
        std::filesystem::create_directories(dir);
    }

    std::string path(const std::string& fname) {
        manifest.outputs.push_back(fname);
        return dir + "/" + fname;
    }

    void warn(const std::vector<std::string>& more) {
        for (const std::string& w : more)
            if (!seen_.count(w)) {
                seen_.insert(w);
                manifest.warnings.push_back(w);
            }
    }

    void finalize(const Config& cfg) {
        manifest.parameters = cfg.echo();
        manifest.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
        manifest.write(dir + "/manifest.json");
    }

private:
    std::set<std::string> seen_;
};

inline LatticeSpec read_lattice(Config& cfg, int default_m = 2) {
    LatticeSpec spec;
    spec.M = cfg.get_int("lattice.m", default_m);
    spec.L = cfg.get_int("lattice.l", 240);
    spec.v = cfg.get_double("lattice.v", 1.0);
    const std::string b = cfg.get_string("lattice.boundary", "periodic");
    if (b == "periodic")
        spec.boundary = LatticeSpec::Boundary::periodic;
    else if (b == "open")
        spec.boundary = LatticeSpec::Boundary::open;
    else
        throw config_error("lattice.boundary: expected periodic or open, got '" +
                           b + "'");
    spec.validate();
    return spec;
}

inline DriveProfile::Kind parse_profile_kind(const std::string& s) {
    if (s == "step") return DriveProfile::Kind::step;
    if (s == "arctan") return DriveProfile::Kind::arctan;
    if (s == "two_step") return DriveProfile::Kind::two_step;
    if (s == "onsite_step") return DriveProfile::Kind::onsite_step;
    throw config_error(
        "profile.kind: expected step, arctan, two_step or onsite_step, got '" +
        s + "'");
}

inline DriveProfile read_profile(Config& cfg, const LatticeSpec& spec) {
    DriveProfile p;
    p.kind = parse_profile_kind(cfg.get_string("profile.kind", "step"));
    p.eta_i = cfg.get_double("profile.eta_i", 0.5);
    p.eta_f = cfg.get_double("profile.eta_f", -0.5);
    p.eta_p = cfg.get_double("profile.eta_p", 0.0);
    p.omega = cfg.get_double("profile.omega_v", 1.0);
    p.t_c = cfg.get_double("profile.t_c_inv_v", 160.0);
    p.t_p = cfg.get_double("profile.t_p_inv_v", 80.0);
    p.delta_i = cfg.get_double("profile.delta_i_v", 0.0);
    p.delta_f = cfg.get_double("profile.delta_f_v", 0.0);
    p.v = spec.v;
    p.validate();
    return p;
}

/// Boundary-list entries: "step", "onsite_step", "arctan:<omega>",
/// "two_step:<eta_p>". The numeric part overrides the base profile's value.
inline DriveProfile boundary_variant(const DriveProfile& base,
                                     const std::string& desc) {
    DriveProfile p = base;
    const std::size_t colon = desc.find(':');
    const std::string head =
        colon == std::string::npos ? desc : desc.substr(0, colon);
    double value = 0.0;
    bool has_value = false;
    if (colon != std::string::npos) {
        const std::string tail = desc.substr(colon + 1);
        std::size_t pos = 0;
        try {
            value = std::stod(tail, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != tail.size())
            throw config_error("profile.boundary_list: bad value in '" + desc +
                               "'");
        has_value = true;
    }
    if (head == "step" || head == "onsite_step") {
        if (has_value)
            throw config_error("profile.boundary_list: '" + head +
                               "' takes no value");
        p.kind = head == "step" ? DriveProfile::Kind::step
                                : DriveProfile::Kind::onsite_step;
    } else if (head == "arctan") {
        if (!has_value)
            throw config_error(
                "profile.boundary_list: arctan needs a sharpness, e.g. "
                "arctan:0.2");
        p.kind = DriveProfile::Kind::arctan;
        p.omega = value;
    } else if (head == "two_step") {
        if (!has_value)
            throw config_error(
                "profile.boundary_list: two_step needs a plateau value, e.g. "
                "two_step:0.2");
        p.kind = DriveProfile::Kind::two_step;
        p.eta_p = value;
    } else {
        throw config_error("profile.boundary_list: unknown boundary type '" +
                           desc + "'");
    }
    p.validate();
    return p;
}

inline std::string boundary_label(const std::string& desc) {
    std::string label = desc;
    std::replace(label.begin(), label.end(), ':', '_');
    return label;
}

struct EvolutionSettings {
    EvolutionConfig config;
    EvolvePath path = EvolvePath::automatic;
};

inline EvolutionSettings read_evolution(Config& cfg) {
    EvolutionSettings es;
    es.config.dt = cfg.get_double("evolution.dt_inv_v", 0.005);
    es.config.t_start = 0.0;
    es.config.t_end = cfg.get_double("evolution.t_end_inv_v", 320.0);
    const double every = cfg.get_double("evolution.record_every_inv_v", 0.0);
    if (every < 0.0)
        throw config_error("evolution.record_every_inv_v: must be >= 0");
    if (every > 0.0)
        for (int i = 0; i * every < es.config.t_end - 1e-9; ++i)
            es.config.record_times.push_back(i * every);
    es.config.validate();
    const std::string path = cfg.get_string("evolution.path", "auto");
    if (path == "auto")
        es.path = EvolvePath::automatic;
    else if (path == "real_space")
        es.path = EvolvePath::real_space;
    else if (path == "k_block")
        es.path = EvolvePath::k_block;
    else
        throw config_error(
            "evolution.path: expected auto, real_space or k_block, got '" +
            path + "'");
    return es;
}

struct PacketSettings {
    bool gaussian = true;
    Statistics statistics = Statistics::fermion;
    int incident_band = 0;
    double k0 = 0.5 * pi;   // pair center momentum
    double dk = 0.02 * pi;  // separation: the orbitals sit at k0 -/+ dk/2
    double kw = 0.08 * pi;  // Gaussian momentum width
    double x0 = 69.0;       // common launch cell of both packets

    double k1() const { return k0 - 0.5 * dk; }
    double k2() const { return k0 + 0.5 * dk; }
};

inline PacketSettings read_packet(Config& cfg) {
    PacketSettings ps;
    const std::string kind = cfg.get_string("packet.kind", "gaussian");
    if (kind == "gaussian")
        ps.gaussian = true;
    else if (kind == "plane")
        ps.gaussian = false;
    else
        throw config_error("packet.kind: expected gaussian or plane, got '" +
                           kind + "'");
    const std::string st = cfg.get_string("packet.statistics", "fermion");
    if (st == "fermion")
        ps.statistics = Statistics::fermion;
    else if (st == "boson")
        ps.statistics = Statistics::boson;
    else
        throw config_error(
            "packet.statistics: expected fermion or boson, got '" + st + "'");
    ps.incident_band = cfg.get_int("packet.incident_band", 0);
    ps.k0 = cfg.get_double("packet.k0_pi_units", 0.5) * pi;
    ps.dk = cfg.get_double("packet.dk_pi_units", 0.02) * pi;
    ps.kw = cfg.get_double("packet.kw_pi_units", 0.08) * pi;
    ps.x0 = cfg.get_double("packet.x0_cells", 69.0);
    if (ps.dk <= 0.0)
        throw config_error("packet.dk_pi_units: must be > 0");
    return ps;
}

inline int wrap_index(long n, int L) {
    return static_cast<int>(((n % L) + L) % L);
}

/// Grid indices nearest the two packet momenta.
inline std::pair<int, int> packet_grid_indices(const PacketSettings& ps,
                                               int L) {
    return {wrap_index(std::lround(ps.k1() * L / (2.0 * pi)), L),
            wrap_index(std::lround(ps.k2() * L / (2.0 * pi)), L)};
}

/// Momentum pair used for the two-state entropy: the grid points nearest
/// the packet momenta, pushed one step apart if they coincide.
inline std::pair<int, int> center_pair_indices(const PacketSettings& ps,
                                               int L) {
    auto [i1, i2] = packet_grid_indices(ps, L);
    if (i1 == i2) {
        i1 = wrap_index(i1 - 1, L);
        i2 = wrap_index(i2 + 1, L);
    }
    return {i1, i2};
}

/// Both orbitals are prepared in the eigenbasis of the bands passed in
/// (the t_start snapshot), so the pre-boundary state is an exact eigenstate
/// superposition of the initial Hamiltonian.
inline TwoParticleWave build_pair(const LatticeSpec& spec,
                                  const BandTable& pre,
                                  const PacketSettings& ps,
                                  std::vector<std::string>* warnings) {
    if (ps.incident_band < 0 || ps.incident_band >= spec.M)
        throw config_error("packet.incident_band: out of range");
    if (ps.gaussian) {
        const SingleParticleWave g1 = gaussian_orbital(
            spec, pre, ps.incident_band, ps.k1(), ps.kw, ps.x0, warnings);
        const SingleParticleWave g2 = gaussian_orbital(
            spec, pre, ps.incident_band, ps.k2(), ps.kw, ps.x0, warnings);
        return pair_state(g1, g2, ps.statistics);
    }
    const auto [i1, i2] = packet_grid_indices(ps, pre.L());
    if (i1 == i2)
        throw config_error(
            "packet: the two plane-wave momenta land on the same grid point");
    return pair_state(
        plane_wave_orbital(spec, pre, ps.incident_band, pre.kgrid[i1]),
        plane_wave_orbital(spec, pre, ps.incident_band, pre.kgrid[i2]),
        ps.statistics);
}

/// Full and center-pair projections of one recorded state against the
/// instantaneous eigenbasis at its record time.
struct RecordProjection {
    double t = 0.0;
    ProjectionResult proj;
    CenterPairResult pair;
};

inline RecordProjection project_record(const TwoParticleWave& state,
                                       const LatticeSpec& spec,
                                       const DriveProfile& profile, double t,
                                       int alpha, int beta, int ik1, int ik2,
                                       Emitter* emit) {
    const BandTable bands = solve_bands(spec, profile_at(profile, t));
    if (emit) emit->warn(bands.warnings);
    RecordProjection rec;
    rec.t = t;
    rec.proj = project_band_pair(to_band_amplitudes(state, spec, bands),
                                 alpha, beta);
    rec.pair = center_pair_entropy(rec.proj, ik1, ik2);
    return rec;
}

inline nlohmann::json projection_json(const ProjectionResult& proj) {
    nlohmann::json j;
    j["alpha"] = proj.alpha;
    j["beta"] = proj.beta;
    j["probability"] = proj.probability;
    j["entropy_bits"] = proj.entropy;
    j["null_projection"] = proj.null_projection;
    j["k"] = std::vector<double>(proj.kgrid.data(),
                                 proj.kgrid.data() + proj.kgrid.size());
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index r = 0; r < proj.amplitudes.rows(); ++r) {
        nlohmann::json rrow = nlohmann::json::array();
        nlohmann::json irow = nlohmann::json::array();
        for (Eigen::Index c = 0; c < proj.amplitudes.cols(); ++c) {
            rrow.push_back(proj.amplitudes(r, c).real());
            irow.push_back(proj.amplitudes(r, c).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    j["amplitudes_re"] = std::move(re);
    j["amplitudes_im"] = std::move(im);
    return j;
}

inline void write_entropy_map_rows(CsvWriter& csv, const EntropyMap& map,
                                   const std::vector<std::string>& prefix) {
    for (Eigen::Index i = 0; i < map.axis_i.size(); ++i)
        for (Eigen::Index j = 0; j < map.axis_f.size(); ++j) {
            for (const std::string& cellv : prefix) csv.cell(cellv);
            csv.cell(map.axis_i[i]);
            csv.cell(map.axis_f[j]);
            csv.cell(map.entropy(i, j));
            csv.cell(map.probability(i, j));
            csv.cell(static_cast<bool>(map.null_flag(i, j)));
            csv.end_row();
        }
}

}  // namespace cli_detail

// ---------------------------------------------------------------------------
// bands: dispersion/eigenvector tables, plus per-band transfer probabilities
// and scattering angles when a pre/post coupling pair is configured.
inline void cmd_bands(Config& cfg, const CommandContext& ctx) {
    using namespace cli_detail;
    Emitter emit("bands", ctx);
    LatticeSpec spec = read_lattice(cfg);
    const double eta = cfg.get_double("bands.eta", 0.5);
    const double delta = cfg.get_double("bands.delta_v", 0.0);
    const int incident_band = cfg.get_int("bands.incident_band", 0);
    const bool has_pre = cfg.has("bands.eta_pre");
    const bool has_post = cfg.has("bands.eta_post");
    if (has_pre != has_post)
        throw config_error(
            "bands.eta_pre and bands.eta_post must be given together");
    double eta_pre = 0.0, eta_post = 0.0;
    if (has_pre) {
        eta_pre = cfg.get_double("bands.eta_pre", 0.0);
        eta_post = cfg.get_double("bands.eta_post", 0.0);
    }
    cfg.finish();

    CouplingSnapshot snap;
    snap.w = eta * spec.v;
    snap.delta = delta;
    const BandTable bands = solve_bands(spec, snap);
    emit.warn(bands.warnings);
    {
        CsvWriter csv(emit.path("bands.csv"));
        csv.cell("band").cell("ik").cell("k").cell("energy").cell("velocity");
        for (int m = 0; m < spec.M; ++m) {
            csv.cell("re_u" + std::to_string(m));
            csv.cell("im_u" + std::to_string(m));
        }
        csv.end_row();
        for (int alpha = 0; alpha < spec.M; ++alpha)
            for (int ik = 0; ik < bands.L(); ++ik) {
                csv.cell(alpha)
                    .cell(ik)
                    .cell(bands.kgrid[ik])
                    .cell(bands.energies(ik, alpha))
                    .cell(bands.velocities(ik, alpha));
                for (int m = 0; m < spec.M; ++m) {
                    csv.cell(bands.vectors[ik](m, alpha).real());
                    csv.cell(bands.vectors[ik](m, alpha).imag());
                }
                csv.end_row();
            }
        csv.close();
    }
    if (has_pre) {
        CouplingSnapshot pre, post;
        pre.w = eta_pre * spec.v;
        post.w = eta_post * spec.v;
        CsvWriter csv(emit.path("angles.csv"));
        csv.row("ik", "k", "band", "probability", "theta_deg",
                "theta_incident_deg");
        for (int ik = 0; ik < bands.L(); ++ik) {
            const double k = bands.kgrid[ik];
            const VectorXd prob =
                scattering_probabilities(spec, pre, post, k, incident_band);
            const ScatteringAngles ang =
                scattering_angles(spec, pre, post, k, incident_band);
            for (int alpha = 0; alpha < spec.M; ++alpha)
                csv.row(ik, k, alpha, prob[alpha], ang.theta_deg[alpha],
                        ang.theta_incident_deg);
        }
        csv.close();
    }
    emit.finalize(cfg);
}

// ---------------------------------------------------------------------------
// scatter: evolve a two-orbital pair through one or more time boundaries;
// emit the cell-density space-time map, S(t) curves (full-matrix and
// two-momentum), and the final projected amplitudes as JSON.
inline void cmd_scatter(Config& cfg, const CommandContext& ctx) {
    using namespace cli_detail;
    Emitter emit("scatter", ctx);
    LatticeSpec spec = read_lattice(cfg);
    const DriveProfile base = read_profile(cfg, spec);
    const std::vector<std::string> descs =
        cfg.get_string_list("profile.boundary_list", {});
    EvolutionSettings es = read_evolution(cfg);
    const PacketSettings ps = read_packet(cfg);
    const int alpha = cfg.get_int("project.band_alpha", 0);
    const int beta = cfg.get_int("project.band_beta", 1);
    cfg.finish();

    std::vector<std::pair<std::string, DriveProfile>> runs;
    if (descs.empty()) {
        runs.emplace_back(cfg.echo().at("profile.kind"), base);
    } else {
        for (const std::string& d : descs)
            runs.emplace_back(boundary_label(d), boundary_variant(base, d));
    }
    const auto [ik1, ik2] = center_pair_indices(ps, spec.L);

    CsvWriter density(emit.path("density.csv"));
    density.row("boundary", "t", "cell", "density");
    CsvWriter entropy(emit.path("entropy.csv"));
    entropy.row("boundary", "t", "probability", "s_full", "s_pair",
                "pair_probability", "null_projection");
    nlohmann::json projections = nlohmann::json::object();

    for (const auto& [label, profile] : runs) {
        const BandTable pre =
            solve_bands(spec, profile_at(profile, es.config.t_start));
        emit.warn(pre.warnings);
        std::vector<std::string> packet_warnings;
        const TwoParticleWave pair =
            build_pair(spec, pre, ps, &packet_warnings);
        emit.warn(packet_warnings);
        const OrbitalSnapshots snaps = evolve_orbitals(
            pair, spec, profile, nullptr, es.config, es.path);
        ProjectionResult final_proj;
        for (std::size_t i = 0; i < snaps.times.size(); ++i) {
            const double t = snaps.times[i];
            const VectorXd cells = cell_density(snaps.states[i], spec);
            for (int c = 0; c < spec.L; ++c)
                density.row(label, t, c, cells[c]);
            if (spec.boundary == LatticeSpec::Boundary::open &&
                std::max(cells[0], cells[spec.L - 1]) > 1e-4)
                throw tolerance_error(
                    "scatter: packet reached the open chain edge (cell "
                    "density > 1e-4) at t = " +
                    std::to_string(t));
            const RecordProjection rec = project_record(
                snaps.states[i], spec, profile, t, alpha, beta, ik1, ik2,
                &emit);
            entropy.row(label, t, rec.proj.probability, rec.proj.entropy,
                        rec.pair.entropy, rec.pair.probability,
                        rec.proj.null_projection);
            if (i + 1 == snaps.times.size()) final_proj = rec.proj;
        }
        projections[label] = projection_json(final_proj);
    }
    density.close();
    entropy.close();
    {
        std::ofstream out(emit.path("projection.json"));
        out << projections.dump() << '\n';
        if (!out) throw config_error("projection.json write failed");
    }
    emit.finalize(cfg);
}

// ---------------------------------------------------------------------------
// decohere: uniform-loss open system along the same scattering scenario.
// Production path evolves the two-particle block (pure state + exponential
// weight); --oracle adds a dense Fock-space Lindblad cross-check (small
// lattices only).
inline void cmd_decohere(Config& cfg, const CommandContext& ctx) {
    using namespace cli_detail;
    Emitter emit("decohere", ctx);
    LatticeSpec spec = read_lattice(cfg);
    const DriveProfile profile = read_profile(cfg, spec);
    EvolutionSettings es = read_evolution(cfg);
    const PacketSettings ps = read_packet(cfg);
    const int alpha = cfg.get_int("project.band_alpha", 0);
    const int beta = cfg.get_int("project.band_beta", 1);
    const std::vector<double> gammas = cfg.get_double_list(
        "decohere.gamma_list_v", {0.0, 1e-4, 1e-3, 1e-2});
    cfg.finish();
    for (double g : gammas)
        if (g < 0.0) throw config_error("decohere.gamma_list_v: gamma < 0");

    const auto [ik1, ik2] = center_pair_indices(ps, spec.L);
    const BandTable pre =
        solve_bands(spec, profile_at(profile, es.config.t_start));
    emit.warn(pre.warnings);
    std::vector<std::string> packet_warnings;
    const TwoParticleWave pair = build_pair(spec, pre, ps, &packet_warnings);
    emit.warn(packet_warnings);

    CsvWriter entropy(emit.path("entropy.csv"));
    entropy.row("gamma", "t", "s_full", "s_pair", "null_projection");
    CsvWriter probability(emit.path("probability.csv"));
    probability.row("gamma", "t", "probability", "pair_probability",
                    "block_weight");

    for (double gamma : gammas) {
        const BlockLindbladResult block = evolve_lindblad_block(
            pair, spec, profile, nullptr, gamma, es.config, es.path);
        for (std::size_t i = 0; i < block.snapshots.times.size(); ++i) {
            const double t = block.snapshots.times[i];
            const RecordProjection rec = project_record(
                block.snapshots.states[i], spec, profile, t, alpha, beta,
                ik1, ik2, &emit);
            const double w = block.weights[i];
            entropy.row(gamma, t, rec.proj.entropy, rec.pair.entropy,
                        rec.proj.null_projection);
            probability.row(gamma, t, w * rec.proj.probability,
                            w * rec.pair.probability, w);
        }
    }
    entropy.close();
    probability.close();

    if (ctx.oracle) {
        // Dense Fock-space Lindblad evolution of the same initial pair; the
        // N_s <= 32 guard inside the solver rejects oversized lattices.
        const BandTable post =
            solve_bands(spec, profile_at(profile, es.config.t_end));
        const FockBasis basis = make_fock_basis(spec, ps.statistics);
        const DensityBlock rho0 = density_from_pure_pair(pair, basis);
        const BlockLindbladResult unit = evolve_lindblad_block(
            pair, spec, profile, nullptr, 0.0, es.config, es.path);
        const VectorXcd cpure =
            pair_sector_vector(unit.snapshots.states.back(), basis);
        CsvWriter oracle(emit.path("oracle.csv"));
        oracle.row("gamma", "block_vs_dense_max_diff", "probability_dense",
                   "entropy_dense", "probability_block", "entropy_block");
        for (double gamma : gammas) {
            const DensitySnapshots dense = evolve_lindblad_dense(
                rho0, spec, profile, gamma, es.config, ps.statistics);
            const MatrixXcd pair_block =
                two_particle_block(dense.states.back(), basis);
            const double w =
                std::exp(-2.0 * gamma * (es.config.t_end - es.config.t_start));
            const double diff =
                (pair_block - w * (cpure * cpure.adjoint()))
                    .cwiseAbs()
                    .maxCoeff();
            const PairDensity pd = project_pair_density(
                pair_block, basis, spec, post, alpha, beta, ik1, ik2);
            const RecordProjection rec = project_record(
                unit.snapshots.states.back(), spec, profile, es.config.t_end,
                alpha, beta, ik1, ik2, nullptr);
            oracle.row(gamma, diff, pd.probability, pd.entropy,
                       w * rec.pair.probability, rec.pair.entropy);
        }
        oracle.close();
    }
    emit.finalize(cfg);
}

// ---------------------------------------------------------------------------
// noise_sweep: fidelity of the projected state under stochastic coupling
// (zeta) and onsite (xi) fluctuations, on a (zeta, xi) grid with n_trials
// independent seeded runs per cell. Trials are index-seeded, so results are
// identical for any worker count.
inline void cmd_noise_sweep(Config& cfg, const CommandContext& ctx) {
    using namespace cli_detail;
    Emitter emit("noise_sweep", ctx);
    LatticeSpec spec = read_lattice(cfg);
    const DriveProfile profile = read_profile(cfg, spec);
    EvolutionSettings es = read_evolution(cfg);
    const PacketSettings ps = read_packet(cfg);
    const int alpha = cfg.get_int("project.band_alpha", 0);
    const int beta = cfg.get_int("project.band_beta", 1);
    const std::vector<double> zetas = cfg.get_double_list(
        "noise.zeta_list_v", {0.0, 0.02, 0.04, 0.06, 0.08, 0.1});
    const std::vector<double> xis = cfg.get_double_list(
        "noise.xi_list_v", {0.0, 0.02, 0.04, 0.06, 0.08, 0.1});
    const int n_trials = cfg.get_int("noise.n_trials", 100);
    const std::string hopping = cfg.get_string("noise.hopping_mode", "global");
    const std::string onsite = cfg.get_string("noise.onsite_mode", "staggered");
    cfg.finish();
    if (n_trials < 1) throw config_error("noise.n_trials: must be >= 1");

    NoiseSpec noise_base;
    if (hopping == "global")
        noise_base.hopping_mode = NoiseSpec::HoppingMode::global;
    else if (hopping == "per_bond")
        noise_base.hopping_mode = NoiseSpec::HoppingMode::per_bond;
    else
        throw config_error(
            "noise.hopping_mode: expected global or per_bond, got '" +
            hopping + "'");
    if (onsite == "staggered")
        noise_base.onsite_mode = NoiseSpec::OnsiteMode::staggered;
    else if (onsite == "per_site")
        noise_base.onsite_mode = NoiseSpec::OnsiteMode::per_site;
    else if (onsite == "global")
        noise_base.onsite_mode = NoiseSpec::OnsiteMode::global;
    else
        throw config_error(
            "noise.onsite_mode: expected staggered, per_site or global, got '" +
            onsite + "'");
    noise_base.seed = ctx.seed;

    const BandTable pre =
        solve_bands(spec, profile_at(profile, es.config.t_start));
    emit.warn(pre.warnings);
    const BandTable post =
        solve_bands(spec, profile_at(profile, es.config.t_end));
    emit.warn(post.warnings);
    std::vector<std::string> packet_warnings;
    const TwoParticleWave pair = build_pair(spec, pre, ps, &packet_warnings);
    emit.warn(packet_warnings);

    // The zeta = xi = 0 evolution is the same for every cell, so one
    // reference run is shared by the whole grid.
    EvolutionConfig final_only = es.config;
    final_only.record_times.clear();
    const OrbitalSnapshots ref_snaps =
        evolve_orbitals(pair, spec, profile, nullptr, final_only, es.path);
    const ProjectionResult reference = project_band_pair(
        to_band_amplitudes(ref_snaps.states.back(), spec, post), alpha, beta);
    if (reference.null_projection)
        throw config_error(
            "noise_sweep: reference projection is null; no fidelity is "
            "defined for this configuration");

    const std::int64_t ncells =
        static_cast<std::int64_t>(zetas.size()) * xis.size();
    const std::int64_t njobs = ncells * n_trials;
    std::vector<double> fid(njobs, 0.0);
    run_indexed(njobs, ctx.workers, [&](std::int64_t job) {
        const std::int64_t cell = job / n_trials;
        const std::size_t iz = static_cast<std::size_t>(cell) / xis.size();
        const std::size_t ix = static_cast<std::size_t>(cell) % xis.size();
        NoiseSpec ns = noise_base;
        ns.zeta = zetas[iz];
        ns.xi = xis[ix];
        if (!ns.active()) {
            // A zero-amplitude cell reproduces the reference run by
            // construction (the draws multiply to nothing), so its fidelity
            // is exactly 1.
            fid[job] = 1.0;
            return;
        }
        const NoiseTrack track(ns, spec, static_cast<std::uint64_t>(job));
        const OrbitalSnapshots snaps =
            evolve_orbitals(pair, spec, profile, &track, final_only, es.path);
        const ProjectionResult proj = project_band_pair(
            to_band_amplitudes(snaps.states.back(), spec, post), alpha, beta);
        fid[job] = fidelity(reference, proj);
    });

    CsvWriter trials(emit.path("trials.csv"));
    trials.row("zeta", "xi", "trial", "fidelity");
    CsvWriter fbar(emit.path("fbar.csv"));
    fbar.row("zeta", "xi", "fbar");
    CsvWriter sigma(emit.path("sigma.csv"));
    sigma.row("zeta", "xi", "sigma");
    for (std::size_t iz = 0; iz < zetas.size(); ++iz)
        for (std::size_t ix = 0; ix < xis.size(); ++ix) {
            const std::int64_t cell =
                static_cast<std::int64_t>(iz) * xis.size() + ix;
            std::vector<double> samples(
                fid.begin() + cell * n_trials,
                fid.begin() + (cell + 1) * n_trials);
            for (int t = 0; t < n_trials; ++t)
                trials.row(zetas[iz], xis[ix], t, samples[t]);
            if (n_trials == 1) {
                fbar.row(zetas[iz], xis[ix], samples[0]);
                sigma.row(zetas[iz], xis[ix], 0.0);
            } else {
                const TrialStatistics stats = trial_statistics(samples);
                fbar.row(zetas[iz], xis[ix], stats.mean);
                sigma.row(zetas[iz], xis[ix], stats.stddev);
            }
            for (int t = 0; t < n_trials; ++t) {
                const std::uint64_t run =
                    static_cast<std::uint64_t>(cell * n_trials + t);
                emit.manifest.derived_seeds.emplace_back(
                    "cell" + std::to_string(iz) + "_" + std::to_string(ix) +
                        "_trial" + std::to_string(t),
                    detail::splitmix64(noise_base.seed ^
                                       detail::splitmix64(run + 1)));
            }
        }
    trials.close();
    fbar.close();
    sigma.close();
    emit.finalize(cfg);
}

// ---------------------------------------------------------------------------
// multiband: M >= 3 chains. "evolve" mode runs the packet scenario and emits
// S(t) for every band pair; "map" mode sweeps (eta_i, eta_f) per band pair.
inline void cmd_multiband(Config& cfg, const CommandContext& ctx) {
    using namespace cli_detail;
    Emitter emit("multiband", ctx);
    LatticeSpec spec = read_lattice(cfg, 3);
    if (spec.M < 3)
        throw config_error("multiband: requires lattice.m >= 3");
    const std::string mode = cfg.get_string("multiband.mode", "evolve");

    if (mode == "map") {
        const std::string kind = cfg.get_string("map.kind", "eta");
        if (kind != "eta")
            throw config_error(
                "multiband map mode supports map.kind = eta only");
        const double k0 = cfg.get_double("map.k0_pi_units", 0.75) * pi;
        const double dk = cfg.get_double("map.dk_pi_units", 0.02) * pi;
        const double amin = cfg.get_double("map.axis_min", -1.5);
        const double amax = cfg.get_double("map.axis_max", 1.5);
        const int acount = cfg.get_int("map.axis_count", 61);
        const std::string st = cfg.get_string("map.statistics", "fermion");
        const int incident_band = cfg.get_int("map.incident_band", 0);
        cfg.finish();
        if (acount < 2) throw config_error("map.axis_count: must be >= 2");
        const Statistics stats =
            st == "boson" ? Statistics::boson : Statistics::fermion;
        if (st != "fermion" && st != "boson")
            throw config_error(
                "map.statistics: expected fermion or boson, got '" + st + "'");
        const VectorXd axis = VectorXd::LinSpaced(acount, amin, amax);
        CsvWriter csv(emit.path("map.csv"));
        csv.row("alpha", "beta", "eta_i", "eta_f", "entropy", "probability",
                "null_projection");
        for (int a = 0; a < spec.M; ++a)
            for (int b = a + 1; b < spec.M; ++b) {
                const EntropyMap map = entropy_map_eta(
                    spec, axis, axis, k0, dk, stats, a, b, incident_band);
                write_entropy_map_rows(
                    csv, map, {std::to_string(a), std::to_string(b)});
            }
        csv.close();
        emit.finalize(cfg);
        return;
    }
    if (mode != "evolve")
        throw config_error("multiband.mode: expected evolve or map, got '" +
                           mode + "'");

    const DriveProfile profile = read_profile(cfg, spec);
    EvolutionSettings es = read_evolution(cfg);
    PacketSettings ps = read_packet(cfg);
    cfg.finish();

    const auto [ik1, ik2] = center_pair_indices(ps, spec.L);
    const BandTable pre =
        solve_bands(spec, profile_at(profile, es.config.t_start));
    emit.warn(pre.warnings);
    std::vector<std::string> packet_warnings;
    const TwoParticleWave pair = build_pair(spec, pre, ps, &packet_warnings);
    emit.warn(packet_warnings);
    const OrbitalSnapshots snaps =
        evolve_orbitals(pair, spec, profile, nullptr, es.config, es.path);

    CsvWriter entropy(emit.path("entropy.csv"));
    entropy.row("alpha", "beta", "t", "probability", "s_full", "s_pair",
                "pair_probability", "null_projection");
    for (std::size_t i = 0; i < snaps.times.size(); ++i) {
        const double t = snaps.times[i];
        const BandTable bands = solve_bands(spec, profile_at(profile, t));
        emit.warn(bands.warnings);
        const BandAmplitudes amps =
            to_band_amplitudes(snaps.states[i], spec, bands);
        for (int a = 0; a < spec.M; ++a)
            for (int b = a + 1; b < spec.M; ++b) {
                const ProjectionResult proj = project_band_pair(amps, a, b);
                const CenterPairResult cp =
                    center_pair_entropy(proj, ik1, ik2);
                entropy.row(a, b, t, proj.probability, proj.entropy,
                            cp.entropy, cp.probability,
                            proj.null_projection);
            }
    }
    entropy.close();
    emit.finalize(cfg);
}

// ---------------------------------------------------------------------------
// bell_map: analytic parameter studies. "eta" mode emits the (eta_i, eta_f)
// entropy/probability map, the exact-condition curve with its first-order
// quantities, and entropy-vs-separation rows along the curve. "delta" mode
// maps the staggered-onsite boundary (Delta_i, Delta_f) at fixed w.
inline void cmd_bell_map(Config& cfg, const CommandContext& ctx) {
    using namespace cli_detail;
    Emitter emit("bell_map", ctx);
    LatticeSpec spec = read_lattice(cfg);
    const std::string kind = cfg.get_string("map.kind", "eta");
    const double dk = cfg.get_double("map.dk_pi_units", 0.02) * pi;
    const double amin = cfg.get_double("map.axis_min", -1.5);
    const double amax = cfg.get_double("map.axis_max", 1.5);
    const int acount = cfg.get_int("map.axis_count", 61);
    const std::string st = cfg.get_string("map.statistics", "fermion");
    const int incident_band = cfg.get_int("map.incident_band", 0);
    if (st != "fermion" && st != "boson")
        throw config_error("map.statistics: expected fermion or boson, got '" +
                           st + "'");
    const Statistics stats =
        st == "boson" ? Statistics::boson : Statistics::fermion;
    if (acount < 2) throw config_error("map.axis_count: must be >= 2");
    const VectorXd axis = VectorXd::LinSpaced(acount, amin, amax);

    if (kind == "delta") {
        const double k0 = cfg.get_double("map.k0_pi_units", 0.75) * pi;
        const double w = cfg.get_double("map.w_v", 0.5) * spec.v;
        cfg.finish();
        const EntropyMap map =
            entropy_map_delta(spec, w, axis, axis, k0, dk, stats);
        CsvWriter csv(emit.path("map.csv"));
        csv.row("delta_i", "delta_f", "entropy", "probability",
                "null_projection");
        write_entropy_map_rows(csv, map, {});
        csv.close();
        emit.finalize(cfg);
        return;
    }
    if (kind != "eta")
        throw config_error("map.kind: expected eta or delta, got '" + kind +
                           "'");

    const double k0 = cfg.get_double("map.k0_pi_units", 0.5) * pi;
    const std::vector<double> dk_list = cfg.get_double_list(
        "map.dk_list_pi_units",
        {0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.49});
    cfg.finish();

    {
        const EntropyMap map = entropy_map_eta(spec, axis, axis, k0, dk,
                                               stats, 0, 1, incident_band);
        CsvWriter csv(emit.path("map.csv"));
        csv.row("eta_i", "eta_f", "entropy", "probability",
                "null_projection");
        write_entropy_map_rows(csv, map, {});
        csv.close();
    }

    // Exact-condition curve: for each eta_i on the axis, the eta_f that
    // satisfies the condition at k0, with the first-order quantities
    // (boundary phase Xi, imbalance coefficient Z) and the solved residual.
    std::vector<std::pair<double, double>> curve;
    {
        CsvWriter csv(emit.path("curve.csv"));
        csv.row("eta_i", "eta_f", "xi", "z", "residual", "exact");
        for (Eigen::Index i = 0; i < axis.size(); ++i) {
            try {
                const double eta_f = bell_eta_f(axis[i], k0);
                const TaylorQuantities tq =
                    taylor_quantities(k0, axis[i], eta_f);
                const BellCondition bc = bell_condition(axis[i], eta_f);
                csv.row(axis[i], eta_f, tq.Xi, tq.Z, bc.residual, bc.exact);
                curve.emplace_back(axis[i], eta_f);
            } catch (const config_error& e) {
                emit.warn({std::string("curve point skipped: ") + e.what()});
            }
        }
        csv.close();
    }

    // Entropy against momentum separation for every on-curve point.
    {
        CsvWriter csv(emit.path("scurve.csv"));
        csv.row("eta_i", "eta_f", "dk_pi_units", "entropy", "probability");
        CouplingSnapshot pre, post;
        for (const auto& [eta_i, eta_f] : curve) {
            pre.w = eta_i * spec.v;
            post.w = eta_f * spec.v;
            for (double dkp : dk_list) {
                try {
                    const PairProjection proj = pair_projection(
                        scatter_coefficients(spec, pre, post,
                                             k0 - 0.5 * dkp * pi,
                                             k0 + 0.5 * dkp * pi, stats,
                                             incident_band),
                        0, 1);
                    csv.row(eta_i, eta_f, dkp, proj.entropy,
                            proj.probability);
                } catch (const config_error& e) {
                    emit.warn(
                        {std::string("scurve point skipped: ") + e.what()});
                }
            }
        }
        csv.close();
    }
    emit.finalize(cfg);
}

// ---------------------------------------------------------------------------
inline int run_command(const std::string& name, Config& cfg,
                       const CommandContext& ctx) {
    if (name == "bands")
        cmd_bands(cfg, ctx);
    else if (name == "scatter")
        cmd_scatter(cfg, ctx);
    else if (name == "decohere")
        cmd_decohere(cfg, ctx);
    else if (name == "noise_sweep")
        cmd_noise_sweep(cfg, ctx);
    else if (name == "multiband")
        cmd_multiband(cfg, ctx);
    else if (name == "bell_map")
        cmd_bell_map(cfg, ctx);
    else
        throw config_error(
            "unknown command '" + name +
            "' (expected bands, scatter, decohere, noise_sweep, multiband "
            "or bell_map)");
    return 0;
}

}  // namespace sshbell
