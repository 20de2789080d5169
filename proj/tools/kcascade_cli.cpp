#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kcascade/error.hpp"
#include "kcascade/experiment.hpp"

namespace {

using namespace kcascade;

int exit_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::GenerationFailed:
        case ErrorCode::DegenerateDraw: return exit_code::kGenerationFailed;
        case ErrorCode::Overflow: return exit_code::kOverflow;
        case ErrorCode::PreconditionViolation: return exit_code::kUsage;
        default: return exit_code::kValidationFailed;
    }
}

void add_dims_options(CLI::App* cmd, ExperimentConfig& cfg, std::vector<std::size_t>& dims) {
    cmd->add_option("--layers", cfg.layers, "number of layers")->capture_default_str();
    cmd->add_option("--norm-base", cfg.norm_base, "||L_i|| = base^(layers+1-i)")->capture_default_str();
    cmd->add_option("--dim-min", cfg.dim_min, "smallest layer dimension")->capture_default_str();
    cmd->add_option("--dim-max", cfg.dim_max, "largest layer dimension")->capture_default_str();
    cmd->add_option("--dims", dims, "explicit per-layer dimensions")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman spectra of chained cascades"};
    app.require_subcommand(1);
    app.set_version_flag("--version", KCASCADE_VERSION);

    std::uint64_t seed = 2024;
    std::filesystem::path out_dir = "out";
    std::string profile = "default";
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    app.add_option("--tol-profile", profile, "tolerance profile")
        ->check(CLI::IsMember({"default", "strict"}))
        ->capture_default_str();

    ExperimentConfig cfg;
    std::vector<std::size_t> dims;

    auto* generate = app.add_subcommand("generate", "draw a random chained cascade and validate it");
    add_dims_options(generate, cfg, dims);

    SimulateOptions sim;
    std::string sim_x0;
    auto* simulate = app.add_subcommand("simulate", "error series between the coupled and nominal cascades");
    simulate->add_option("spec", sim.spec, "cascade JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--x0", sim_x0, "initial state JSON (default: seeded unit state)")->check(CLI::ExistingFile);
    simulate->add_option("--horizon,-T", sim.horizon, "steps")->capture_default_str();
    simulate->add_option("--csv", sim.csv_name, "CSV file name")->capture_default_str();

    VerifyCommandOptions ver;
    std::string ver_conj;
    std::vector<std::string> ver_checks;
    auto* verify = app.add_subcommand("verify", "run theorem checks; exit 0 iff all pass");
    verify->add_option("spec", ver.spec, "cascade JSON")->required()->check(CLI::ExistingFile);
    verify->add_option("--conjugacy", ver_conj, "conjugacy JSON (needed for theorem3/theorem4)")
        ->check(CLI::ExistingFile);
    verify->add_option("--check", ver_checks, "checks to run (default: all applicable)")
        ->delimiter(',')
        ->check(CLI::IsMember({"theorem1", "corollary1", "theorem2", "corollary2", "theorem3", "theorem4"}));
    verify->add_option("--horizon,-T", ver.horizon, "steps")->capture_default_str();
    verify->add_option("--report", ver.report_name, "report file name")->capture_default_str();

    EigsCommandOptions eig;
    std::size_t eig_layer = 0;
    std::size_t eig_index = 0;
    auto* eigs = app.add_subcommand("eigs", "eigenfunction inventory with Laplace-average convergence");
    eigs->add_option("spec", eig.spec, "cascade JSON")->required()->check(CLI::ExistingFile);
    eigs->add_option("--layer", eig_layer, "restrict to one layer (1-based)")->check(CLI::PositiveNumber);
    eigs->add_option("--index", eig_index, "restrict to one eigenvalue index (1-based)")->check(CLI::PositiveNumber);
    eigs->add_option("--samples", eig.eigs.samples, "sample states for residuals")->capture_default_str();
    eigs->add_option("--out", eig.out_name, "output file name")->capture_default_str();

    auto* repro = app.add_subcommand("repro-paper", "one-shot seven-layer reproduction");
    add_dims_options(repro, cfg, dims);
    repro->add_option("--horizon,-T", cfg.horizon, "steps")->capture_default_str();
    repro->add_option("--cubic", cfg.cubic, "cubic conjugacy coefficient per layer")->capture_default_str();
    repro->add_option("--trials", cfg.trials, "independent seeds seed..seed+k-1")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        CommandResult result;
        cfg.seed = seed;
        cfg.tol_profile = profile;
        if (!dims.empty()) {
            cfg.dims = dims;
            if (generate->count("--layers") == 0 && repro->count("--layers") == 0) cfg.layers = dims.size();
        }

        if (*generate) {
            result = run_generate(cfg, out_dir);
        } else if (*simulate) {
            sim.seed = seed;
            if (!sim_x0.empty()) sim.initial_state = sim_x0;
            result = run_simulate(sim, out_dir);
        } else if (*verify) {
            ver.seed = seed;
            ver.tol_profile = profile;
            if (!ver_conj.empty()) ver.conjugacy = ver_conj;
            for (const auto& c : ver_checks) ver.checks.insert(parse_check(c));
            result = run_verify(ver, out_dir);
        } else if (*eigs) {
            eig.eigs.seed = seed;
            if (eig_layer) eig.eigs.layer = eig_layer;
            if (eig_index) eig.eigs.index = eig_index;
            result = run_eigs(eig, out_dir);
        } else if (*repro) {
            result = run_repro(cfg, out_dir);
        }
        std::cout << result.summary << '\n';
        if (!result.files.empty()) std::cout << "wrote " << result.files.size() << " file(s) to " << out_dir.string() << '\n';
        return result.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::kValidationFailed;
    }
}
