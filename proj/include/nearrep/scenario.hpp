#pragma once

// Scenario files and the measure -> construct -> verify pipelines behind the
// command-line tool. Scenarios are JSON documents with a strict schema.

#include "nearrep/csv.hpp"
#include "nearrep/prefcore.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nearrep::scenario {

/// Malformed scenario: syntax error (with line) or schema error (with field path).
class ScenarioError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

enum class Domain { Risk, Uncertainty, TimeDiscrete, TimeContinuous };
std::string to_string(Domain d);

struct ContinuousSpec {
    /// "linear" (u = x - t/b) or "log_hyperbolic" (u = x - log(1 + k t)).
    std::string type = "linear";
    double x_bar = 0.0;
    double parameter = 1.0;
    friend bool operator==(const ContinuousSpec&, const ContinuousSpec&) = default;
};

struct RiskSampler {
    std::size_t resolution = 101;
    std::size_t pair_resolution = 10;
    std::size_t lambda_resolution = 9;
    std::size_t independence_pairs = 20;
    std::size_t independence_alphas = 9;
    std::size_t independence_mixers = 3;
    std::size_t converse_resolution = 40;
    double converse_eps = 0.01;
    friend bool operator==(const RiskSampler&, const RiskSampler&) = default;
};

struct UncertaintySampler {
    double box_bound = 10.0;
    std::size_t box_resolution = 21;
    std::size_t theta_resolution = 5;
    int n_max = 40;
    /// 0 disables the homogeneous benchmark.
    double eta = 2.0;
    /// 0 disables the quasi-concave benchmark.
    std::size_t qc_resolution = 0;
    std::size_t qc_levels = 64;
    std::size_t ua_resolution = 9;
    std::size_t ua_lambdas = 3;
    friend bool operator==(const UncertaintySampler&, const UncertaintySampler&) = default;
};

struct DiscreteSampler {
    std::size_t horizon = 200;
    std::size_t t_max = 50;
    int n_max = 40;
    double anchor = 1.0;
    std::size_t pair_max = 100;
    friend bool operator==(const DiscreteSampler&, const DiscreteSampler&) = default;
};

struct ContinuousSampler {
    double x_min = -3.0;
    std::size_t x_points = 13;
    double t_max = 50.0;
    std::size_t t_points = 26;
    double delta_max = 10.0;
    std::size_t delta_points = 11;
    friend bool operator==(const ContinuousSampler&, const ContinuousSampler&) = default;
};

struct Tolerances {
    double sup_slack = kSupNormSlack;
    double bisection = kBisectionTol;
    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

using ModelSpec = std::variant<RiskModel, ActModel, TimeModel, ContinuousSpec>;
using SamplerSpec = std::variant<RiskSampler, UncertaintySampler, DiscreteSampler, ContinuousSampler>;

struct Scenario {
    int version = 1;
    std::string name;
    Domain domain = Domain::Risk;
    ModelSpec model;
    SamplerSpec sampler;
    std::uint64_t seed = 0;
    Tolerances tolerances;
    /// Empty: use the --out directory or the working directory.
    std::string output_dir;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses a scenario document. `source` prefixes diagnostics.
Scenario parse(const std::string& text, const std::string& source = "scenario");
Scenario load(const std::filesystem::path& path);
/// Canonical JSON with every default filled in; parse(dump(s)) == s.
std::string dump(const Scenario& s);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid;
};

enum class VerdictStatus { Pass, Fail, NotApplicable };
std::string to_string(VerdictStatus s);

struct Verdict {
    std::string name;
    VerdictStatus status = VerdictStatus::Pass;
    std::string detail;
};

struct NamedTable {
    std::string name;
    csv::Table table;
};

struct RunResult {
    std::string name;
    std::vector<ViolationReport> measurements;
    std::vector<NearRepresentation> representations;
    std::vector<Verdict> verdicts;
    std::vector<NamedTable> tables;
    /// Scalar results outside the report structs (builtins).
    std::map<std::string, double> summary;
    double seconds = 0.0;
    /// Report document (JSON).
    std::string report;

    bool all_passed() const;
    /// 0 when every verdict passes or is not applicable, 2 otherwise.
    int exit_code() const;
};

/// Runs the pipeline for the scenario's domain. Does not touch the disk.
RunResult run(const Scenario& s, const RunOptions& opts = {});

/// Writes <name>-report.json and <name>-<table>.csv into dir.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

std::vector<std::string> builtin_names();
/// Canonical scenarios pinned to the reference parameters. Unknown names
/// throw ScenarioError listing the available ones.
std::vector<RunResult> run_builtin(const std::string& name, const RunOptions& opts = {});

}  // namespace nearrep::scenario
