// nearrep: run scenario files or canonical builtins and write reports.
//
// Exit codes: 0 all bounds pass, 2 a bound is violated, 1 bad input.

#include "nearrep/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace sc = nearrep::scenario;

namespace {

void print_summary(const sc::RunResult& r, const std::filesystem::path& dir) {
    std::printf("%s: %s (%.3f s) -> %s\n", r.name.c_str(), r.all_passed() ? "PASS" : "FAIL", r.seconds,
                dir.string().c_str());
    for (const auto& v : r.verdicts)
        std::printf("  %-28s %-15s %s\n", v.name.c_str(), sc::to_string(v.status).c_str(), v.detail.c_str());
}

int finish(const std::vector<sc::RunResult>& results, const std::filesystem::path& dir) {
    int code = 0;
    for (const auto& r : results) {
        sc::write_outputs(r, dir);
        print_summary(r, dir);
        code = std::max(code, r.exit_code());
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Measure axiom violations and verify near-representation bounds"};
    app.require_subcommand(1);

    std::string file;
    std::string builtin;
    std::string out_dir;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid;

    auto add_flags = [&](CLI::App* sub) {
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--tol", tol, "Sup-norm slack override")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "Sampler seed override");
        sub->add_option("--grid", grid, "Grid resolution override")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("file", file, "Scenario JSON")->required();
    add_flags(run);

    auto* bi = app.add_subcommand("builtin", "Run a canonical scenario");
    bi->add_option("name", builtin, "Builtin name")->required();
    add_flags(bi);

    app.add_subcommand("list", "List builtin scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        sc::RunOptions opts;
        opts.tol = tol;
        opts.seed = seed;
        opts.grid = grid;
        if (app.got_subcommand("list")) {
            for (const auto& n : sc::builtin_names()) std::cout << n << '\n';
            return 0;
        }
        if (app.got_subcommand("run")) {
            const sc::Scenario s = sc::load(file);
            std::filesystem::path dir = !out_dir.empty() ? std::filesystem::path(out_dir)
                                        : !s.output_dir.empty() ? std::filesystem::path(s.output_dir)
                                                                : std::filesystem::path(".");
            return finish({sc::run(s, opts)}, dir);
        }
        const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(out_dir);
        return finish(sc::run_builtin(builtin, opts), dir);
    } catch (const nearrep::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
