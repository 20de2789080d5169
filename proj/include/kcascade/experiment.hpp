#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kcascade/cascade.hpp"
#include "kcascade/conjugacy.hpp"
#include "kcascade/orbit.hpp"
#include "kcascade/perturbation.hpp"
#include "kcascade/serialization.hpp"

namespace kcascade {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kGenerationFailed = 2;
inline constexpr int kValidationFailed = 3;
inline constexpr int kOverflow = 4;
inline constexpr int kCheckFailed = 5;
}  // namespace exit_code

/// Thresholds for one --tol-profile.
struct TolProfile {
    std::string name = "default";
    CheckSettings checks;
    double residual_tol = 1e-8;
};

/// "default" or "strict"; anything else is a PreconditionViolation.
[[nodiscard]] TolProfile tol_profile(const std::string& name);

/// Independent generator streams derived from one user seed.
[[nodiscard]] Rng make_rng(std::uint64_t seed, std::uint64_t stream);

namespace stream {
inline constexpr std::uint64_t kSystem = 0;
inline constexpr std::uint64_t kInitialState = 1;
inline constexpr std::uint64_t kSamples = 2;
}  // namespace stream

struct ExperimentConfig {
    std::size_t layers = 7;
    /// ||L_i|| = norm_base^{layers + 1 - i}.
    double norm_base = 0.9;
    std::size_t dim_min = 2;
    std::size_t dim_max = 6;
    /// Overrides the random dimension draw when set.
    std::optional<std::vector<std::size_t>> dims;
    std::uint64_t seed = 2024;
    std::size_t horizon = 200;
    /// Cubic coefficient applied to every layer for the nonlinear checks.
    double cubic = 0.1;
    std::size_t trials = 1;
    std::string tol_profile = "default";

    void validate() const;
    [[nodiscard]] std::vector<double> norm_schedule() const;
    [[nodiscard]] Json to_json() const;
};

/// Layer dimensions uniform in [dim_min, dim_max] unless fixed by the config.
[[nodiscard]] std::vector<std::size_t> draw_dims(const ExperimentConfig& cfg, Rng& rng);

/// Random chained cascade for the config, drawn from the system stream of seed.
[[nodiscard]] CascadeSystem generate_cascade(const ExperimentConfig& cfg, std::uint64_t seed);

enum class Check { Theorem1, Corollary1, Theorem2, Corollary2, Theorem3, Theorem4 };

[[nodiscard]] std::string to_string(Check c);
[[nodiscard]] Check parse_check(const std::string& name);
[[nodiscard]] std::set<Check> linear_checks();
[[nodiscard]] std::set<Check> all_checks();

struct VerifyOptions {
    std::set<Check> checks = linear_checks();
    std::optional<Conjugacy> conjugacy;
    std::size_t horizon = 200;
    std::uint64_t seed = 2024;
    TolProfile profile;
    std::size_t samples = 20;
    std::size_t residual_steps = 50;
};

struct VerifyOutcome {
    bool conditions_pass = false;
    bool pass = false;
    std::vector<std::string> failed;
    Json report;
};

/// Runs the selected checks from the seeded unit initial condition. When the
/// conditions fail the checks are skipped and reported as such.
[[nodiscard]] VerifyOutcome verify_system(const CascadeSystem& sys, const ConditionReport& report,
                                          const VerifyOptions& options);

struct EigsOptions {
    std::optional<std::size_t> layer;
    std::optional<std::size_t> index;
    std::uint64_t seed = 2024;
    std::size_t samples = 20;
    std::size_t residual_steps = 50;
    std::vector<std::size_t> average_terms{10, 100, 1000};
};

/// Eigenfunction export records with residuals and the Laplace-average
/// convergence table (deflated when the eigenvalue is not peripheral).
[[nodiscard]] Json eigenfunction_inventory(const CascadeSystem& sys, const PerturbationData& pd,
                                           const EigsOptions& options);

/// What a command produced: exit code, a one-paragraph stdout summary and the
/// files written (relative to the output directory).
struct CommandResult {
    int exit_code = exit_code::kOk;
    std::string summary;
    std::vector<std::string> files;
};

[[nodiscard]] CommandResult run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct SimulateOptions {
    std::filesystem::path spec;
    std::optional<std::filesystem::path> initial_state;
    std::uint64_t seed = 2024;
    std::size_t horizon = 200;
    std::string csv_name = "errors.csv";
};

[[nodiscard]] CommandResult run_simulate(const SimulateOptions& options, const std::filesystem::path& out_dir);

struct VerifyCommandOptions {
    std::filesystem::path spec;
    std::optional<std::filesystem::path> conjugacy;
    std::set<Check> checks;
    std::uint64_t seed = 2024;
    std::size_t horizon = 200;
    std::string tol_profile = "default";
    std::string report_name = "verify.json";
};

[[nodiscard]] CommandResult run_verify(const VerifyCommandOptions& options, const std::filesystem::path& out_dir);

struct EigsCommandOptions {
    std::filesystem::path spec;
    EigsOptions eigs;
    std::string out_name = "eigs.json";
};

[[nodiscard]] CommandResult run_eigs(const EigsCommandOptions& options, const std::filesystem::path& out_dir);

/// One-shot reproduction of the seven-layer experiment: system, error series,
/// all checks (nonlinear ones with the diagonal cubic conjugacy) and a manifest.
/// With trials > 1 each trial goes to trial_<k>/ and runs on a worker thread.
[[nodiscard]] CommandResult run_repro(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Hex SHA-256 of a file's bytes.
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

/// Writes manifest.json listing every file with its hash.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command, const Json& config,
                    std::uint64_t seed, const Json& checks, const std::vector<std::string>& files,
                    const std::string& started_at);

[[nodiscard]] std::string utc_timestamp();

}  // namespace kcascade
