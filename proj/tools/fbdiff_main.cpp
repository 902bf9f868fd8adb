#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fbdiff/cli_io.hpp"
#include "fbdiff/rothe.hpp"

namespace {

using namespace fbdiff;

StopRule parse_stop(const std::string& text) {
    StopRule rule;
    if (text == "max-psnr") {
        rule.kind = StopKind::max_psnr_with_reference;
    } else if (text.rfind("fixed:", 0) == 0) {
        rule.kind = StopKind::fixed_iters;
        rule.fixed_iters = std::stoi(text.substr(6));
    } else if (text.rfind("relchange:", 0) == 0) {
        rule.kind = StopKind::relative_change;
        rule.tol = std::stod(text.substr(10));
    } else {
        throw CLI::ValidationError("--stop", "expected max-psnr, fixed:N or relchange:TOL");
    }
    return rule;
}

int cmd_denoise(const std::string& input, const std::string& synthetic, int rows, int cols,
                std::vector<double> levels, long looks, std::uint64_t seed,
                const SolverConfig& solver, const std::string& stop_text,
                const std::string& out_dir, bool emit_history) {
    ExperimentConfig cfg;
    if (!input.empty()) cfg.input = input;
    if (!synthetic.empty()) {
        SyntheticSpec spec;
        spec.kind = synthetic_kind_from_string(synthetic);
        spec.rows = rows;
        spec.cols = cols;
        if (!levels.empty())
            spec.levels = std::move(levels);
        else if (spec.kind == SyntheticKind::piecewise_constant_shapes)
            spec.levels = {30.0, 100.0, 180.0, 240.0};
        cfg.synthetic = spec;
    }
    cfg.noise = NoiseSpec{looks, seed};
    cfg.solver = solver;
    cfg.solver.stop = parse_stop(stop_text);
    cfg.out_dir = out_dir;
    cfg.emit_history = emit_history;
    return run_experiment(cfg);
}

int cmd_analyze_flux(double p, double delta, double s_max, int n,
                     const std::string& out_dir) {
    const FluxParams params{p, delta};
    const RadialProfile profile = sample_radial_profile(params, s_max, n);
    const ConvexEnvelope env = convexify(profile);

    namespace fs = std::filesystem;
    if (!fs::exists(out_dir)) fs::create_directory(out_dir);
    export_envelope_tables(env, (fs::path(out_dir) / "envelope_psi.txt").string(),
                           (fs::path(out_dir) / "envelope_q.txt").string());

    const MinSlopeResult slope = scalar_flux_min_slope(params, s_max, std::max(n, 100001));
    const StructureReport rep = verify_structure(profile, env, params);

    std::printf("p=%g delta=%g s_max=%g n=%d\n", p, delta, s_max, n);
    std::printf("min flux slope %.6e at s=%.6f -> %s\n", slope.min_slope, slope.argmin,
                slope.min_slope >= 0.0 ? "forward (monotone)" : "forward-backward");
    std::printf("affine segments: %zu\n", env.affine_segments.size());
    for (const auto& [a, b] : env.affine_segments)
        std::printf("  s in [%.6f, %.6f], slope %.9f\n", env.base.s_values[a],
                    env.base.s_values[b], env.slopes[(a + b) / 2]);
    std::printf("structure conditions: %s (gamma1=%g gamma2=%g, worst at s=%.6f)\n",
                rep.holds ? "hold" : "violated", rep.gamma1, rep.gamma2, rep.worst_point);
    std::printf("  lower bound forms: max{g1*s^p-1,0}<=Psi %s, g1*s^p<=Psi** %s\n",
                rep.lower_bound_psi_holds ? "holds" : "fails",
                rep.lower_bound_env_holds ? "holds" : "fails");
    std::printf("envelope tables written to %s\n", out_dir.c_str());
    return rep.holds ? 0 : 1;
}

ImageGrid noisy_step_1d(int cells, long looks, std::uint64_t seed) {
    ImageGrid clean(1, cells, 80.0);
    for (int j = cells / 2; j < cells; ++j) clean.at(0, j) = 160.0;
    const ImageGrid eta = gamma_noise_field(1, cells, NoiseSpec{looks, seed});
    return apply_multiplicative(clean, eta);
}

int cmd_rothe_verify(int cells, long looks, std::uint64_t seed, double p, double delta,
                     double T, const std::string& out_dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(out_dir)) fs::create_directory(out_dir);

    const ImageGrid f = noisy_step_1d(cells, looks, seed);
    const double l = f.min(), d = f.max();
    const FluxParams params{p, delta};
    const RadialProfile profile =
        sample_radial_profile(params, 1.5 * (d - l) + 1.0, 50001);
    const ConvexEnvelope env = convexify(profile);
    const ImageGrid alpha = gray_indicator(f, make_indicator_params(1.0, 1.0));

    int failures = 0;
    auto line = [&](bool ok, const std::string& what) {
        std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
        if (!ok) ++failures;
    };

    std::vector<double> sums;
    for (int m : {4, 8, 16}) {
        RotheConfig cfg;
        cfg.m = m;
        cfg.T = T;
        const std::vector<ImageGrid> w(m, f);
        const RotheTrajectory traj = rothe_sweep(f, w, alpha, env, cfg);
        sums.push_back(traj.apriori_sum);

        bool desc = true, bounds = true;
        std::ofstream csv(fs::path(out_dir) / ("energy_m" + std::to_string(m) + ".csv"));
        csv << "slice,gradient,coupling,fidelity,total\n";
        csv.precision(12);
        for (int j = 1; j <= m; ++j) {
            const EnergyBreakdown after =
                energy(traj.slices[j], traj.slices[j - 1], w[j - 1], f, alpha, env, cfg);
            const EnergyBreakdown before = energy(traj.slices[j - 1], traj.slices[j - 1],
                                                  w[j - 1], f, alpha, env, cfg);
            csv << j << ',' << after.gradient_term << ',' << after.coupling_term << ','
                << after.fidelity_term << ',' << after.total << '\n';
            desc = desc && after.total <= before.total * (1.0 + 1e-12);
            bounds = bounds && traj.slices[j].min() >= l && traj.slices[j].max() <= d;
        }
        line(desc, "m=" + std::to_string(m) + " per-slice energy inequality");
        line(bounds, "m=" + std::to_string(m) + " slices within [l, d]");
        std::printf("       m=%d apriori_sum=%.6f\n", m, traj.apriori_sum);
    }
    const double ratio = *std::max_element(sums.begin(), sums.end()) /
                         *std::min_element(sums.begin(), sums.end());
    line(ratio <= 3.0, "apriori_sum within 3x across m (ratio " + std::to_string(ratio) + ")");

    RotheConfig cfg;
    cfg.m = 8;
    cfg.T = T;
    const FixedPointResult fp = fixed_point(f, alpha, env, cfg, 1e-6, 50);
    line(fp.converged, "fixed point converged in " + std::to_string(fp.iterations) +
                           " outer iterations");
    bool mono = true;
    const std::size_t nd = fp.distances.size();
    for (std::size_t k = nd >= 3 ? nd - 3 : 0; k + 1 < nd; ++k)
        mono = mono && fp.distances[k + 1] <= fp.distances[k];
    line(mono, "successive distances monotone over final iterations");

    std::printf("energy CSVs written to %s\n", out_dir.c_str());
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"forward-backward diffusion denoiser for multiplicative Gamma noise"};
    app.require_subcommand(1);
    // key=value lines under a [denoise] section (or denoise.key=value)
    app.set_config("--config", "", "config file; command-line flags override it");

    // denoise
    auto* denoise = app.add_subcommand("denoise", "run the denoising pipeline");
    std::string input, synthetic, stop_text = "max-psnr", out_dir = "out";
    int rows = 128, cols = 128;
    std::vector<double> levels;
    long looks = 4;
    std::uint64_t seed = 1;
    bool no_history = false;
    SolverConfig solver;
    double sigma = 1.0, beta = 1.0;
    auto* in_opt = denoise->add_option("--input", input, "clean PGM image (P2/P5)");
    auto* syn_opt =
        denoise->add_option("--synthetic", synthetic, "synthetic kind: shapes|step|ramp");
    in_opt->excludes(syn_opt);
    denoise->add_option("--rows", rows, "synthetic rows");
    denoise->add_option("--cols", cols, "synthetic cols");
    denoise->add_option("--levels", levels, "synthetic gray levels in [1,255]");
    denoise->add_option("--looks", looks, "Gamma looks L >= 1");
    denoise->add_option("--seed", seed, "noise seed");
    denoise->add_option("--tau", solver.tau, "time step");
    denoise->add_option("--lambda", solver.lambda, "fidelity weight");
    denoise->add_option("--p", solver.p, "exponent, 1 < p <= 2");
    denoise->add_option("--delta", solver.delta, "p-term weight, > 0");
    denoise->add_option("--epsilon", solver.epsilon, "b-denominator regularization");
    denoise->add_option("--sigma", sigma, "indicator Gaussian sigma");
    denoise->add_option("--beta", beta, "indicator exponent");
    denoise->add_option("--stop", stop_text, "max-psnr | fixed:N | relchange:TOL");
    denoise->add_option("--max-iters", solver.max_iters, "iteration cap");
    denoise->add_option("--out", out_dir, "output directory");
    denoise->add_flag("--no-history", no_history, "skip the per-iteration CSV");

    // analyze-flux
    auto* analyze = app.add_subcommand("analyze-flux", "envelope and monotonicity tables");
    double ap = 2.0, adelta = 0.1, as_max = 50.0;
    int an = 50001;
    std::string aout = "flux_tables";
    analyze->add_option("--p", ap, "exponent");
    analyze->add_option("--delta", adelta, "p-term weight");
    analyze->add_option("--s-max", as_max, "profile range");
    analyze->add_option("--n-samples", an, "profile samples");
    analyze->add_option("--out", aout, "output directory");

    // rothe-verify
    auto* rothe = app.add_subcommand("rothe-verify", "desk-scale time-slice suite");
    int rcells = 128;
    long rlooks = 4;
    std::uint64_t rseed = 7;
    double rp = 2.0, rdelta = 0.2, rT = 1.0;
    std::string rout = "rothe_out";
    rothe->add_option("--cells", rcells, "1D cells (<= 512)");
    rothe->add_option("--looks", rlooks, "Gamma looks");
    rothe->add_option("--seed", rseed, "noise seed");
    rothe->add_option("--p", rp, "exponent");
    rothe->add_option("--delta", rdelta, "p-term weight");
    rothe->add_option("--T", rT, "time horizon");
    rothe->add_option("--out", rout, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (denoise->parsed()) {
            solver.indicator = fbdiff::make_indicator_params(sigma, beta);
            return cmd_denoise(input, synthetic, rows, cols, levels, looks, seed, solver,
                               stop_text, out_dir, !no_history);
        }
        if (analyze->parsed()) return cmd_analyze_flux(ap, adelta, as_max, an, aout);
        if (rothe->parsed())
            return cmd_rothe_verify(rcells, rlooks, rseed, rp, rdelta, rT, rout);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
