// kmu: analyze contact metric models and list the bundled fixtures.

#include "kmu/analysis.hpp"
#include "kmu/error.hpp"
#include "kmu/model_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct FixtureInfo {
    const char* name;
    const char* note;
};

constexpr FixtureInfo kFixtures[] = {
    {"s3-sasakian", "unit sphere S^3, chart backend, 20 seeded sample points; Sasakian (kappa = 1, h = 0)"},
    {"flat-kappa0", "3-dim Lie model with kappa = mu = 0 (flat metric, lambda = 1)"},
    {"kmu-generator", "parametric 3-dim Lie model for any (kappa, mu) with kappa < 1; use --kmu K,M"},
    {"perturbed-negative-control",
     "generator (0, 4) with [e,f] += 0.1 e; contact metric but not a (kappa, mu)-space"},
};

kmu::ManifoldModel fixture(const std::string& name, std::uint64_t seed, const std::vector<double>& kmu_params) {
    if (name == "s3-sasakian") return kmu::make_s3_model(seed);
    if (name == "flat-kappa0") return kmu::make_flat_model();
    if (name == "perturbed-negative-control") return kmu::make_negative_control();
    if (name == "kmu-generator") {
        if (kmu_params.size() != 2) throw kmu::Error(kmu::ErrorCode::SchemaError, "kmu-generator needs --kmu K,M");
        return kmu::make_kmu_model(kmu_params[0], kmu_params[1]);
    }
    throw kmu::Error(kmu::ErrorCode::SchemaError, "unknown fixture '" + name + "' (see `kmu fixtures`)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contact metric (kappa, mu)-spaces and bi-Legendrian connections"};
    app.require_subcommand(1);

    std::string model_path, fixture_name, format = "text", report_path;
    std::vector<double> kmu_params, deformations;
    double tolerance = kmu::kDefaultTolerance;
    std::uint64_t seed = kmu::kDefaultSeed;

    CLI::App* analyze = app.add_subcommand("analyze", "Run the full analysis pipeline on one model");
    auto* model_opt = analyze->add_option("--model", model_path, "Model file (JSON)")->check(CLI::ExistingFile);
    auto* fixture_opt = analyze->add_option("--fixture", fixture_name, "Bundled fixture name");
    analyze->add_option("--kmu", kmu_params, "Generator model for K,M")->delimiter(',')->expected(2);
    analyze->add_option("--tolerance", tolerance, "Global tolerance")->check(CLI::PositiveNumber);
    analyze->add_option("--deform", deformations, "D-homothetic constant a > 0 (repeatable)")
        ->check(CLI::PositiveNumber);
    analyze->add_option("--report", report_path, "Write the report to this file");
    analyze->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
    analyze->add_option("--seed", seed, "Seed for sample points");
    model_opt->excludes(fixture_opt);

    CLI::App* fixtures = app.add_subcommand("fixtures", "List the bundled fixtures");
    std::string write_dir;
    fixtures->add_option("--write", write_dir, "Also write the fixed fixtures as model files into this directory");

    CLI11_PARSE(app, argc, argv);

    if (fixtures->parsed()) {
        for (const FixtureInfo& f : kFixtures) std::cout << f.name << "  " << f.note << "\n";
        if (!write_dir.empty()) {
            try {
                std::filesystem::create_directories(write_dir);
                for (const char* name : {"s3-sasakian", "flat-kappa0", "perturbed-negative-control"}) {
                    kmu::save_model(fixture(name, seed, {}), std::filesystem::path(write_dir) / (std::string(name) + ".json"));
                }
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }
        return 0;
    }

    const int sources = (model_path.empty() ? 0 : 1) + (fixture_name.empty() ? 0 : 1) +
                        (kmu_params.empty() || fixture_name == "kmu-generator" ? 0 : 1);
    if (sources != 1) {
        std::cerr << "error: give exactly one of --model, --fixture, --kmu\n";
        return 2;
    }

    kmu::AnalysisReport report;
    try {
        kmu::ManifoldModel model;
        if (!model_path.empty()) {
            model = kmu::load_model(model_path, tolerance);
        } else if (!fixture_name.empty()) {
            model = fixture(fixture_name, seed, kmu_params);
        } else {
            model = kmu::make_kmu_model(kmu_params[0], kmu_params[1], tolerance);
        }
        kmu::AnalysisOptions options;
        options.tolerance = tolerance;
        options.seed = seed;
        options.deformations = deformations;
        report = kmu::analyze(model, options);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const std::string out = format == "json" ? kmu::report_to_json(report) + "\n" : kmu::report_to_text(report);
    if (report_path.empty()) {
        std::cout << out;
    } else {
        std::ofstream file(report_path);
        if (!(file << out)) {
            std::cerr << "error: cannot write " << report_path << "\n";
            return 2;
        }
    }
    for (const kmu::Check& c : report.checks) {
        if (c.state == kmu::VerdictState::Fail) std::cerr << "check failed: " << c.name << " " << c.reason << "\n";
    }
    return kmu::exit_code(report);
}
