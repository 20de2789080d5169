#include "kcascade/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "kcascade/error.hpp"
#include "kcascade/observables.hpp"

namespace kcascade {

namespace fs = std::filesystem;

TolProfile tol_profile(const std::string& name) {
    TolProfile p;
    p.name = name;
    if (name == "default") return p;
    if (name == "strict") {
        p.checks.slack = 1e-12;
        p.checks.decay_factor = 1e-4;
        p.checks.equivalence_factor = 1e-8;
        p.residual_tol = 1e-10;
        return p;
    }
    throw Error(ErrorCode::PreconditionViolation, "unknown tolerance profile \"" + name + "\"");
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

void ExperimentConfig::validate() const {
    if (layers == 0) throw Error(ErrorCode::PreconditionViolation, "need at least one layer");
    if (!(norm_base > 0.0 && norm_base < 1.0)) {
        throw Error(ErrorCode::PreconditionViolation, "norm base must lie in (0, 1) for a strictly increasing schedule");
    }
    if (dims) {
        if (dims->size() != layers) throw Error(ErrorCode::PreconditionViolation, "need one dimension per layer");
        if (std::find(dims->begin(), dims->end(), std::size_t{0}) != dims->end()) {
            throw Error(ErrorCode::PreconditionViolation, "layer dimensions must be positive");
        }
    } else if (dim_min == 0 || dim_min > dim_max) {
        throw Error(ErrorCode::PreconditionViolation, "dimension range must satisfy 1 <= min <= max");
    }
    if (horizon < 1) throw Error(ErrorCode::PreconditionViolation, "horizon must be at least 1");
    if (trials < 1) throw Error(ErrorCode::PreconditionViolation, "need at least one trial");
    if (!(cubic >= 0.0) || !std::isfinite(cubic)) {
        throw Error(ErrorCode::PreconditionViolation, "cubic coefficient must be finite and non-negative");
    }
    (void)kcascade::tol_profile(tol_profile);
}

std::vector<double> ExperimentConfig::norm_schedule() const {
    return geometric_norm_schedule(layers, norm_base);
}

Json ExperimentConfig::to_json() const {
    Json j = {{"layers", layers},   {"norm_base", norm_base}, {"dim_range", {dim_min, dim_max}},
              {"seed", seed},       {"horizon", horizon},     {"cubic", cubic},
              {"trials", trials},   {"tol_profile", tol_profile}};
    if (dims) j["dims"] = *dims;
    return j;
}

std::vector<std::size_t> draw_dims(const ExperimentConfig& cfg, Rng& rng) {
    if (cfg.dims) return *cfg.dims;
    std::uniform_int_distribution<std::size_t> pick(cfg.dim_min, cfg.dim_max);
    std::vector<std::size_t> out;
    out.reserve(cfg.layers);
    for (std::size_t k = 0; k < cfg.layers; ++k) out.push_back(pick(rng));
    return out;
}

CascadeSystem generate_cascade(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng = make_rng(seed, stream::kSystem);
    const std::vector<std::size_t> dims = draw_dims(cfg, rng);
    return random_chained_cascade(dims, cfg.norm_schedule(), rng);
}

std::string to_string(Check c) {
    switch (c) {
        case Check::Theorem1: return "theorem1";
        case Check::Corollary1: return "corollary1";
        case Check::Theorem2: return "theorem2";
        case Check::Corollary2: return "corollary2";
        case Check::Theorem3: return "theorem3";
        case Check::Theorem4: return "theorem4";
    }
    return "unknown";
}

Check parse_check(const std::string& name) {
    for (Check c : all_checks()) {
        if (to_string(c) == name) return c;
    }
    throw Error(ErrorCode::PreconditionViolation, "unknown check \"" + name + "\"");
}

std::set<Check> linear_checks() {
    return {Check::Theorem1, Check::Corollary1, Check::Theorem2, Check::Corollary2};
}

std::set<Check> all_checks() {
    return {Check::Theorem1, Check::Corollary1, Check::Theorem2, Check::Corollary2, Check::Theorem3, Check::Theorem4};
}

namespace {

Json finite_or_null(double v) {
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

std::vector<StateVector> sample_states(const CascadeSystem& sys, std::uint64_t seed, std::size_t count) {
    Rng rng = make_rng(seed, stream::kSamples);
    std::vector<StateVector> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(random_unit_state(sys.dims(), rng));
    return out;
}

StateVector seeded_initial_state(const CascadeSystem& sys, std::uint64_t seed) {
    Rng rng = make_rng(seed, stream::kInitialState);
    return random_unit_state(sys.dims(), rng);
}

template <class Fn>
void for_each_eigenfunction(const CascadeSystem& sys, Fn&& fn) {
    for (std::size_t i = 1; i <= sys.size(); ++i) {
        for (std::size_t s = 1; s <= sys.dim(i); ++s) fn(i, s);
    }
}

Json theorem1_json(const ErrorSeries& es, const Theorem1Report& r) {
    Json layers = Json::array();
    for (std::size_t k = 0; k < es.layers(); ++k) {
        const std::size_t horizon = es.horizon();
        Json entry = {{"layer", k + 1},
                      {"decay_ratio", finite_or_null(r.decay_ratio[k])},
                      {"terminal_ratio", terminal_ratio(es.rel_err[k])}};
        if (k > 0 && horizon >= 2) entry["log_rel_err_slope"] = log_linear_slope(es.rel_err[k], horizon / 2, horizon);
        layers.push_back(std::move(entry));
    }
    return {{"pass", r.pass},
            {"bound_a", {{"pass", r.bound_a_pass}, {"violations", r.bound_a_violations}, {"margin", r.bound_a_margin}}},
            {"bound_b", {{"pass", r.bound_b_pass}, {"violations", r.bound_b_violations}, {"margin", r.bound_b_margin}}},
            {"decay", {{"pass", r.decay_pass}, {"layers", std::move(layers)}}}};
}

}  // namespace

VerifyOutcome verify_system(const CascadeSystem& sys, const ConditionReport& conditions, const VerifyOptions& options) {
    VerifyOutcome out;
    out.report = {{"conditions", condition_report_to_json(conditions)},
                  {"profile", options.profile.name},
                  {"horizon", options.horizon},
                  {"seed", options.seed}};
    Json selected = Json::array();
    for (Check c : options.checks) selected.push_back(to_string(c));
    out.report["selected"] = std::move(selected);

    out.conditions_pass = conditions.overall && sys.is_chained();
    if (!out.conditions_pass) {
        out.failed.emplace_back(sys.is_chained() ? "conditions" : "not_chained");
        out.report["skipped"] = true;
        out.report["pass"] = false;
        out.report["failed"] = out.failed;
        return out;
    }
    const bool needs_conjugacy = options.checks.count(Check::Theorem3) || options.checks.count(Check::Theorem4);
    if (needs_conjugacy && !options.conjugacy) {
        throw Error(ErrorCode::PreconditionViolation, "theorem3/theorem4 need a conjugacy spec");
    }

    const PerturbationData pd = compute_perturbation(sys, conditions);
    const StateVector x0 = seeded_initial_state(sys, options.seed);
    const CheckSettings& settings = options.profile.checks;
    Json checks = Json::object();

    auto record = [&](Check c, bool pass, Json detail) {
        detail["pass"] = pass;
        checks[to_string(c)] = std::move(detail);
        if (!pass) out.failed.push_back(to_string(c));
    };

    if (options.checks.count(Check::Theorem1)) {
        const ErrorSeries es = compute_error_series(sys, pd, x0, options.horizon);
        const Theorem1Report r = check_theorem1(es, settings);
        record(Check::Theorem1, r.pass, theorem1_json(es, r));
    }
    if (options.checks.count(Check::Corollary1)) {
        const Corollary1Report r = check_corollary1(sys, pd, x0, options.horizon, settings);
        record(Check::Corollary1, r.pass,
               {{"initial_error", r.initial_error}, {"terminal_error", r.terminal_error}, {"ratio", r.ratio},
                {"threshold", settings.equivalence_factor}});
    }
    if (options.checks.count(Check::Theorem2)) {
        Json entries = Json::array();
        bool pass = true;
        for_each_eigenfunction(sys, [&](std::size_t i, std::size_t s) {
            const Theorem2Report r = check_theorem2(sys, pd, i, s, x0, options.horizon, settings);
            pass = pass && r.pass;
            entries.push_back({{"layer", i},
                               {"index", s},
                               {"pass", r.pass},
                               {"violations", r.violations},
                               {"margin", r.margin},
                               {"decay_ratio", r.decay_ratio}});
        });
        record(Check::Theorem2, pass, {{"eigenfunctions", std::move(entries)}});
    }
    if (options.checks.count(Check::Corollary2)) {
        const std::vector<StateVector> samples = sample_states(sys, options.seed, options.samples);
        Json entries = Json::array();
        double worst = 0.0;
        for_each_eigenfunction(sys, [&](std::size_t i, std::size_t s) {
            const double res = eigenfunction_residual(sys, pd, i, s, samples, options.residual_steps);
            worst = std::max(worst, res);
            entries.push_back({{"layer", i}, {"index", s}, {"residual", res}});
        });
        record(Check::Corollary2, worst < options.profile.residual_tol,
               {{"max_residual", worst}, {"threshold", options.profile.residual_tol}, {"eigenfunctions", entries}});
    }
    if (needs_conjugacy) {
        const NonlinearCascade nl(sys, *options.conjugacy);
        const Json conj = conjugacy_to_json(*options.conjugacy);
        if (options.checks.count(Check::Theorem3)) {
            const Theorem3Report r = check_theorem3(nl, pd, x0, options.horizon, settings);
            record(Check::Theorem3, r.pass,
                   {{"terminal_ratio", r.terminal_ratio},
                    {"in_working_ball", r.in_working_ball},
                    {"working_ball_radius", kWorkingBallRadius},
                    {"conjugacy", conj}});
        }
        if (options.checks.count(Check::Theorem4)) {
            Json entries = Json::array();
            bool pass = true;
            for_each_eigenfunction(sys, [&](std::size_t i, std::size_t s) {
                const Theorem4Report r = check_theorem4(nl, pd, i, s, x0, options.horizon, settings);
                pass = pass && r.pass;
                entries.push_back({{"layer", i},
                                   {"index", s},
                                   {"pass", r.pass},
                                   {"paths_agree", r.paths_agree},
                                   {"max_path_gap", r.max_path_gap},
                                   {"decay_ratio", r.decay_ratio}});
            });
            record(Check::Theorem4, pass, {{"eigenfunctions", std::move(entries)}, {"conjugacy", conj}});
        }
    }

    out.pass = out.failed.empty();
    out.report["checks"] = std::move(checks);
    out.report["pass"] = out.pass;
    out.report["failed"] = out.failed;
    return out;
}

Json eigenfunction_inventory(const CascadeSystem& sys, const PerturbationData& pd, const EigsOptions& options) {
    const std::vector<StateVector> samples = sample_states(sys, options.seed, options.samples);
    const StateVector x = seeded_initial_state(sys, options.seed);
    Json entries = Json::array();

    for (std::size_t i = 1; i <= sys.size(); ++i) {
        if (options.layer && *options.layer != i) continue;
        for (std::size_t s = 1; s <= sys.dim(i); ++s) {
            if (options.index && *options.index != s) continue;
            const PrincipalEigenfunction psi = principal_eigenfunction(sys, i, s);
            Json entry = eigenfunction_to_json(psi, true);
            entry["residual"] = eigenfunction_residual(sys, pd, i, s, samples, options.residual_steps);
            const bool peripheral = is_peripheral(sys, i, s);
            entry["peripheral"] = peripheral;
            entry["average_mode"] = peripheral ? "plain" : "deflated";

            const Complex target = pert_eigenfunction_value(sys, pd, i, s, x);
            entry["target"] = complex_to_json(target);
            Json table = Json::array();
            for (std::size_t n : options.average_terms) {
                Json row = {{"terms", n}};
                try {
                    const Complex avg = peripheral ? laplace_average(sys, pd, i, s, x, n)
                                                   : deflated_laplace_average(sys, pd, i, s, x, n);
                    const double err = std::abs(avg - target);
                    row["average"] = complex_to_json(avg);
                    row["abs_error"] = err;
                    row["rel_error"] = finite_or_null(err / std::abs(target));
                } catch (const Error& e) {
                    row["error"] = e.what();
                }
                table.push_back(std::move(row));
            }
            entry["laplace_average"] = std::move(table);
            entries.push_back(std::move(entry));
        }
    }
    return {{"initial_state", state_to_json(x)},
            {"samples", options.samples},
            {"residual_steps", options.residual_steps},
            {"eigenfunctions", std::move(entries)}};
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidFormat, "cannot read " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::InvalidFormat, "hashing failed for " + path.string());
    }
    std::ostringstream hex;
    for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
    return hex.str();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const Json& config, std::uint64_t seed,
                    const Json& checks, const std::vector<std::string>& files, const std::string& started_at) {
    Json inventory = Json::array();
    for (const std::string& f : files) {
        const fs::path p = out_dir / f;
        inventory.push_back({{"path", f}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
    }
    const Json manifest = {{"tool", "kcascade"},
                           {"version", KCASCADE_VERSION},
                           {"command", command},
                           {"config", config},
                           {"seed", seed},
                           {"started_at", started_at},
                           {"finished_at", utc_timestamp()},
                           {"checks", checks},
                           {"files", std::move(inventory)}};
    write_json_file((out_dir / "manifest.json").string(), manifest);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidFormat, "cannot write " + path.string());
    out << text;
}

std::string gnuplot_script(const std::string& csv_name, std::size_t layers) {
    std::ostringstream gp;
    gp << "# Log errors per layer; layer 1 is uncoupled and omitted.\n"
       << "set datafile separator ','\n"
       << "set key outside right\n"
       << "set xlabel 't'\n"
       << "set multiplot layout 2,1\n"
       << "set ylabel 'log absolute error'\n"
       << "plot for [i=2:" << layers << "] '" << csv_name
       << "' using ($2==i ? $1 : 1/0):7 with lines title sprintf('layer %d', i), \\\n"
       << "     for [i=2:" << layers << "] '" << csv_name
       << "' using ($2==i ? $1 : 1/0):(log($5 > 1e-300 ? $5 : 1e-300)) with points pt 3 notitle\n"
       << "set ylabel 'log relative error'\n"
       << "plot for [i=2:" << layers << "] '" << csv_name
       << "' using ($2==i ? $1 : 1/0):8 with lines title sprintf('layer %d', i)\n"
       << "unset multiplot\n";
    return gp.str();
}

LoadedCascade load_spec(const fs::path& spec) {
    return cascade_from_json(read_json_file(spec.string()));
}

// Everything repro-paper writes for one trial; returns the check summary.
struct TrialOutput {
    bool pass = false;
    Json checks;
    std::vector<std::string> files;
    std::string summary;
};

TrialOutput run_trial(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir, const std::string& prefix) {
    fs::create_directories(dir);
    TrialOutput out;
    const CascadeSystem sys = generate_cascade(cfg, seed);
    const ConditionReport conditions = validate_conditions(sys);
    const PerturbationData pd = compute_perturbation(sys, conditions);
    const StateVector x0 = seeded_initial_state(sys, seed);

    write_json_file((dir / "cascade.json").string(), cascade_to_json(sys));
    write_json_file((dir / "conditions.json").string(), condition_report_to_json(conditions));
    write_json_file((dir / "perturbation.json").string(), perturbation_to_json(pd));
    write_json_file((dir / "initial_state.json").string(), state_to_json(x0));

    const ErrorSeries es = compute_error_series(sys, pd, x0, cfg.horizon);
    {
        std::ostringstream csv;
        write_error_series_csv(csv, es);
        write_text(dir / "errors.csv", csv.str());
    }
    write_text(dir / "errors.gp", gnuplot_script("errors.csv", sys.size()));

    VerifyOptions vo;
    vo.checks = all_checks();
    vo.conjugacy = make_polynomial_conjugacy(sys, std::vector<double>(sys.size(), cfg.cubic));
    vo.horizon = cfg.horizon;
    vo.seed = seed;
    vo.profile = tol_profile(cfg.tol_profile);
    const VerifyOutcome verdict = verify_system(sys, conditions, vo);
    write_json_file((dir / "verify.json").string(), verdict.report);

    for (const char* f : {"cascade.json", "conditions.json", "perturbation.json", "initial_state.json", "errors.csv",
                          "errors.gp", "verify.json"}) {
        out.files.push_back(prefix + f);
    }
    out.pass = verdict.pass;
    out.checks = {{"pass", verdict.pass}, {"failed", verdict.failed}, {"excluded_layers", {1}}};
    std::ostringstream summary;
    summary << "seed " << seed << ": " << sys.size() << " layers, dims";
    for (std::size_t d : sys.dims()) summary << ' ' << d;
    summary << "; checks " << (verdict.pass ? "passed" : "FAILED");
    for (const auto& f : verdict.failed) summary << ' ' << f;
    out.summary = summary.str();
    return out;
}

}  // namespace

CommandResult run_generate(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const std::string started = utc_timestamp();
    cfg.validate();
    CommandResult result;
    const CascadeSystem sys = generate_cascade(cfg, cfg.seed);
    const ConditionReport report = validate_conditions(sys);
    fs::create_directories(out_dir);
    write_json_file((out_dir / "cascade.json").string(), cascade_to_json(sys));
    write_json_file((out_dir / "conditions.json").string(), condition_report_to_json(report));
    result.files = {"cascade.json", "conditions.json"};
    write_manifest(out_dir, "generate", cfg.to_json(), cfg.seed, {{"conditions", report.overall}}, result.files, started);

    std::ostringstream s;
    s << "generated " << sys.size() << "-layer chained cascade (dims";
    for (std::size_t d : sys.dims()) s << ' ' << d;
    s << "); conditions " << (report.overall ? "pass" : "FAIL");
    result.summary = s.str();
    result.exit_code = report.overall ? exit_code::kOk : exit_code::kGenerationFailed;
    return result;
}

CommandResult run_simulate(const SimulateOptions& options, const fs::path& out_dir) {
    const std::string started = utc_timestamp();
    CommandResult result;
    const LoadedCascade loaded = load_spec(options.spec);
    const CascadeSystem& sys = loaded.system;
    if (!loaded.report.overall || !sys.is_chained()) {
        result.exit_code = exit_code::kValidationFailed;
        result.summary = sys.is_chained() ? "cascade conditions fail; nothing simulated"
                                          : "cascade is not chained; nothing simulated";
        fs::create_directories(out_dir);
        write_json_file((out_dir / "conditions.json").string(), condition_report_to_json(loaded.report));
        result.files = {"conditions.json"};
        return result;
    }
    const StateVector x0 = options.initial_state ? state_from_json(read_json_file(options.initial_state->string()))
                                                 : seeded_initial_state(sys, options.seed);
    if (x0.dims() != sys.dims()) throw Error(ErrorCode::DimensionMismatch, "initial state does not match the cascade");

    const PerturbationData pd = compute_perturbation(sys, loaded.report);
    ErrorSeries es;
    try {
        es = compute_error_series(sys, pd, x0, options.horizon);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Overflow) throw;
        result.exit_code = exit_code::kOverflow;
        result.summary = e.what();
        return result;
    }
    const Theorem1Report t1 = check_theorem1(es);

    fs::create_directories(out_dir);
    {
        std::ostringstream csv;
        write_error_series_csv(csv, es);
        write_text(out_dir / options.csv_name, csv.str());
    }
    const std::string gp_name = fs::path(options.csv_name).replace_extension(".gp").string();
    write_text(out_dir / gp_name, gnuplot_script(options.csv_name, sys.size()));
    write_json_file((out_dir / "initial_state.json").string(), state_to_json(x0));
    write_json_file((out_dir / "perturbation.json").string(), perturbation_to_json(pd));
    result.files = {options.csv_name, gp_name, "initial_state.json", "perturbation.json"};

    const Json config = {{"spec", options.spec.string()},
                         {"horizon", options.horizon},
                         {"initial_state", options.initial_state ? options.initial_state->string() : "seeded"}};
    write_manifest(out_dir, "simulate", config, options.seed,
                   {{"bounds_dominate", t1.bound_a_pass && t1.bound_b_pass}, {"excluded_layers", {1}}}, result.files,
                   started);

    std::ostringstream s;
    s << "simulated " << options.horizon << " steps; bound violations " << t1.bound_a_violations << '/'
      << t1.bound_b_violations;
    result.summary = s.str();
    return result;
}

CommandResult run_verify(const VerifyCommandOptions& options, const fs::path& out_dir) {
    const std::string started = utc_timestamp();
    CommandResult result;
    const LoadedCascade loaded = load_spec(options.spec);

    VerifyOptions vo;
    vo.horizon = options.horizon;
    vo.seed = options.seed;
    vo.profile = tol_profile(options.tol_profile);
    if (options.conjugacy) vo.conjugacy = conjugacy_from_json(read_json_file(options.conjugacy->string()), loaded.system);
    if (options.checks.empty()) {
        vo.checks = options.conjugacy ? all_checks() : linear_checks();
    } else {
        vo.checks = options.checks;
    }
    const VerifyOutcome verdict = verify_system(loaded.system, loaded.report, vo);

    fs::create_directories(out_dir);
    write_json_file((out_dir / options.report_name).string(), verdict.report);
    result.files = {options.report_name};
    Json config = {{"spec", options.spec.string()}, {"horizon", options.horizon}, {"tol_profile", options.tol_profile}};
    if (options.conjugacy) config["conjugacy"] = options.conjugacy->string();
    write_manifest(out_dir, "verify", config, options.seed, {{"pass", verdict.pass}, {"failed", verdict.failed}},
                   result.files, started);

    std::ostringstream s;
    if (!verdict.conditions_pass) {
        s << "cascade conditions fail; checks skipped";
        result.exit_code = exit_code::kValidationFailed;
    } else if (verdict.pass) {
        s << "all " << vo.checks.size() << " checks passed";
    } else {
        s << "failed checks:";
        for (const auto& f : verdict.failed) s << ' ' << f;
        result.exit_code = exit_code::kCheckFailed;
    }
    result.summary = s.str();
    return result;
}

CommandResult run_eigs(const EigsCommandOptions& options, const fs::path& out_dir) {
    const std::string started = utc_timestamp();
    CommandResult result;
    const LoadedCascade loaded = load_spec(options.spec);
    if (!loaded.report.overall || !loaded.system.is_chained()) {
        result.exit_code = exit_code::kValidationFailed;
        result.summary = "cascade conditions fail; no eigenfunctions computed";
        return result;
    }
    const PerturbationData pd = compute_perturbation(loaded.system, loaded.report);
    const Json inventory = eigenfunction_inventory(loaded.system, pd, options.eigs);
    fs::create_directories(out_dir);
    write_json_file((out_dir / options.out_name).string(), inventory);
    result.files = {options.out_name};

    double worst = 0.0;
    for (const Json& e : inventory.at("eigenfunctions")) worst = std::max(worst, e.at("residual").get<double>());
    write_manifest(out_dir, "eigs", {{"spec", options.spec.string()}}, options.eigs.seed, {{"max_residual", worst}},
                   result.files, started);
    std::ostringstream s;
    s << inventory.at("eigenfunctions").size() << " eigenfunctions; max residual " << format_double(worst);
    result.summary = s.str();
    return result;
}

CommandResult run_repro(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const std::string started = utc_timestamp();
    cfg.validate();
    CommandResult result;
    fs::create_directories(out_dir);

    std::vector<TrialOutput> trials(cfg.trials);
    if (cfg.trials == 1) {
        trials[0] = run_trial(cfg, cfg.seed, out_dir, "");
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr first_error;
        const std::size_t workers = std::min<std::size_t>(cfg.trials, std::max(1u, std::thread::hardware_concurrency()));
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < cfg.trials; k = next++) {
                    try {
                        char name[32];
                        std::snprintf(name, sizeof name, "trial_%03zu", k);
                        trials[k] = run_trial(cfg, cfg.seed + k, out_dir / name, std::string(name) + "/");
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    Json checks = Json::array();
    std::size_t passed = 0;
    std::ostringstream s;
    for (const TrialOutput& t : trials) {
        checks.push_back(t.checks);
        result.files.insert(result.files.end(), t.files.begin(), t.files.end());
        passed += t.pass ? 1 : 0;
        s << t.summary << '\n';
    }
    write_manifest(out_dir, "repro-paper", cfg.to_json(), cfg.seed, checks, result.files, started);
    s << passed << '/' << trials.size() << " trials passed every check";
    result.summary = s.str();
    result.exit_code = passed == trials.size() ? exit_code::kOk : exit_code::kCheckFailed;
    return result;
}

}  // namespace kcascade
