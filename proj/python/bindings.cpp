#include "kmu/analysis.hpp"
#include "kmu/error.hpp"
#include "kmu/expr.hpp"
#include "kmu/model_io.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

namespace py = pybind11;

namespace {

kmu::ManifoldModel fixture(const std::string& name, std::uint64_t seed) {
    if (name == "s3-sasakian") return kmu::make_s3_model(seed);
    if (name == "flat-kappa0") return kmu::make_flat_model();
    if (name == "perturbed-negative-control") return kmu::make_negative_control();
    throw kmu::Error(kmu::ErrorCode::SchemaError, "unknown fixture '" + name + "'");
}

std::string run(const kmu::ManifoldModel& model, double tolerance, std::uint64_t seed,
                const std::vector<double>& deform) {
    kmu::AnalysisOptions options{tolerance, seed, deform};
    kmu::AnalysisReport report;
    {
        py::gil_scoped_release release;
        report = kmu::analyze(model, options);
    }
    return kmu::report_to_json(report, -1);
}

}  // namespace

PYBIND11_MODULE(_kmu, m) {
    m.doc() = "(kappa, mu) contact metric analysis";

    py::register_exception<kmu::Error>(m, "KmuError", PyExc_ValueError);

    m.attr("REPORT_VERSION") = kmu::kReportVersion;
    m.attr("DEFAULT_TOLERANCE") = kmu::kDefaultTolerance;

    m.def("fixture_names", [] {
        return std::vector<std::string>{"s3-sasakian", "flat-kappa0", "kmu-generator", "perturbed-negative-control"};
    });

    m.def("fixture_json", [](const std::string& name, std::uint64_t seed) {
        return kmu::model_to_json(fixture(name, seed)).dump();
    }, py::arg("name"), py::arg("seed") = kmu::kDefaultSeed);

    m.def("kmu_model_json", [](double kappa, double mu) { return kmu::model_to_json(kmu::make_kmu_model(kappa, mu)).dump(); },
          py::arg("kappa"), py::arg("mu"));

    m.def("analyze_fixture", [](const std::string& name, double tolerance, std::uint64_t seed,
                                const std::vector<double>& deform) {
        return run(fixture(name, seed), tolerance, seed, deform);
    }, py::arg("name"), py::arg("tolerance") = kmu::kDefaultTolerance, py::arg("seed") = kmu::kDefaultSeed,
       py::arg("deform") = std::vector<double>{});

    m.def("analyze_kmu", [](double kappa, double mu, double tolerance, const std::vector<double>& deform) {
        return run(kmu::make_kmu_model(kappa, mu, tolerance), tolerance, kmu::kDefaultSeed, deform);
    }, py::arg("kappa"), py::arg("mu"), py::arg("tolerance") = kmu::kDefaultTolerance,
       py::arg("deform") = std::vector<double>{});

    m.def("analyze_model_json", [](const std::string& text, double tolerance, const std::vector<double>& deform) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw kmu::Error(kmu::ErrorCode::SchemaError, e.what());
        }
        return run(kmu::model_from_json(doc, tolerance), tolerance, kmu::kDefaultSeed, deform);
    }, py::arg("text"), py::arg("tolerance") = kmu::kDefaultTolerance, py::arg("deform") = std::vector<double>{});

    m.def("report_text", [](const std::string& json) { return kmu::report_to_text(kmu::report_from_json(json)); });
    m.def("report_roundtrip", [](const std::string& json) {
        return kmu::report_to_json(kmu::report_from_json(json), -1);
    });

    m.def("parse_expression", [](const std::string& src, int coords) {
        return kmu::expr::to_string(kmu::expr::parse(src, coords));
    }, py::arg("source"), py::arg("coords"));

    m.def("evaluate", [](const std::string& src, const std::vector<double>& point) {
        return kmu::expr::evaluate(kmu::expr::parse(src, static_cast<int>(point.size())), point);
    }, py::arg("source"), py::arg("point"));

    m.def("jet2", [](const std::string& src, const std::vector<double>& point) {
        kmu::expr::Jet2 j = kmu::expr::eval_jet2(kmu::expr::parse(src, static_cast<int>(point.size())), point);
        std::vector<double> grad(j.gradient.data(), j.gradient.data() + j.gradient.size());
        std::vector<std::vector<double>> hess(static_cast<std::size_t>(j.hessian.rows()));
        for (Eigen::Index i = 0; i < j.hessian.rows(); ++i) {
            for (Eigen::Index k = 0; k < j.hessian.cols(); ++k) hess[static_cast<std::size_t>(i)].push_back(j.hessian(i, k));
        }
        return std::make_tuple(j.value, grad, hess);
    }, py::arg("source"), py::arg("point"));

    m.def("closed_form_invariants", [](double kappa, double mu) { return kmu::closed_form_invariants(kappa, mu); },
          py::arg("kappa"), py::arg("mu"));
}
