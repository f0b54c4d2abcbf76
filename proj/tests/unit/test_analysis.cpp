#include "kmu/analysis.hpp"
#include "kmu/error.hpp"
#include "kmu/model_io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace kmu;
using nlohmann::json;

namespace {

const Check* find_check(const AnalysisReport& r, const std::string& name) {
    for (const Check& c : r.checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

VerdictState state_of(const AnalysisReport& r, const std::string& name) {
    const Check* c = find_check(r, name);
    REQUIRE_MESSAGE(c != nullptr, "missing check " << name);
    return c->state;
}

// Value printed after "  label: " in the text report.
double text_value(const std::string& text, const std::string& label) {
    std::istringstream in(text);
    std::string line;
    const std::string key = "  " + label + ": ";
    while (std::getline(in, line)) {
        if (line.rfind(key, 0) == 0) return std::stod(line.substr(key.size()));
    }
    FAIL("label not found: " << label);
    return NAN;
}

AnalysisReport run(const ManifoldModel& m, std::vector<double> deform = {}) {
    AnalysisOptions o;
    o.deformations = std::move(deform);
    return analyze(m, o);
}

}  // namespace

TEST_CASE("bundled models pass") {
    for (const ManifoldModel& m : {make_s3_model(), make_flat_model(), make_kmu_model(0.75, 1), make_kmu_model(-1, 2),
                                   make_kmu_model(0.5, -3)}) {
        CAPTURE(m.name);
        AnalysisReport r = run(m, {0.5, 2, 3});
        for (const Check& c : r.checks) {
            CAPTURE(c.name);
            CAPTURE(c.reason);
            CHECK(c.state != VerdictState::Fail);
            CHECK(std::isfinite(c.residual));
            CHECK(c.residual >= 0.0);
        }
        CHECK_FALSE(r.failed());
        CHECK(exit_code(r) == 0);
        CHECK(r.report_version == 1);
    }
}

TEST_CASE("S3 report") {
    AnalysisReport r = run(make_s3_model());
    CHECK(r.model.backend == "chart");
    CHECK(r.model.contexts == 20);
    CHECK(r.curvature.sasakian);
    CHECK(r.curvature.kappa == 1.0);
    CHECK_FALSE(r.curvature.mu.has_value());
    CHECK(r.contact.k_contact);
    REQUIRE(r.foliation.has_value());
    CHECK(r.foliation->source == "declared");
    CHECK(std::abs(r.foliation->pi_l[0][0] - 4) <= 1e-9);
    CHECK(std::abs(r.foliation->pi_q[0][0] - 4) <= 1e-9);
    CHECK(r.foliation->class_l == "NonDegenerate");
    CHECK(r.foliation->class_q == "NonDegenerate");
    CHECK_FALSE(r.foliation->ratio.has_value());
    REQUIRE(r.bileg.has_value());
    CHECK(r.bileg->theorem == VerdictState::NotApplicable);
    CHECK(r.bileg->theorem_reason.find("Killing") != std::string::npos);
    CHECK(state_of(r, "bileg.connection_characterization") == VerdictState::NotApplicable);
    CHECK(state_of(r, "curvature.sasakian") == VerdictState::Pass);
    CHECK(report_to_text(r).find("mu: indeterminate") != std::string::npos);
}

TEST_CASE("generator report carries both mu values") {
    AnalysisReport r = run(make_flat_model(), {2});
    REQUIRE(r.foliation.has_value());
    const FoliationSection& f = *r.foliation;
    CHECK(f.source == "eigenspaces");
    CHECK(*f.closed_form_l == doctest::Approx(4));
    CHECK(std::abs(*f.closed_form_q) <= 1e-12);
    CHECK(std::abs(*f.mu_recovered) <= 1e-9);
    CHECK(*f.paper_eq13_value == doctest::Approx(4));
    CHECK(*f.ratio == doctest::Approx(1));
    CHECK(*f.boeckx_im == doctest::Approx(1));
    CHECK(f.class_l == "NonDegenerate");
    CHECK(f.class_q == "Flat");
    REQUIRE(r.deformations.size() == 1);
    CHECK(*r.deformations[0].kappa == doctest::Approx(0.75));
    CHECK(*r.deformations[0].mu == doctest::Approx(1.0));
    CHECK(*r.deformations[0].boeckx_im == doctest::Approx(1.0));
    CHECK(state_of(r, "deformation[2].extraction") == VerdictState::Pass);
    CHECK(state_of(r, "foliation.mu_recovery") == VerdictState::Pass);
}

TEST_CASE("kmu generator deformed extraction") {
    AnalysisReport r = run(make_kmu_model(0.75, 1), {2});
    CHECK(std::abs(r.deformations[0].kappa.value() - 0.9375) <= 1e-9);
    CHECK(std::abs(r.deformations[0].mu.value() - 1.5) <= 1e-9);
}

TEST_CASE("negative control fails") {
    AnalysisReport r = run(make_negative_control());
    CHECK(r.failed());
    CHECK(exit_code(r) == 1);
    CHECK(state_of(r, "curvature.nullity") == VerdictState::Fail);
    CHECK(r.curvature.nullity_residual >= 1e-3);
    REQUIRE(r.bileg.has_value());
    CHECK(r.bileg->theorem_conditions.at("parallel_g") >= 1e-3);
    CHECK(state_of(r, "bileg.connection_characterization") == VerdictState::Pass);
}

TEST_CASE("model errors propagate") {
    ManifoldModel m = make_flat_model();
    m.structure->g(0, 0) = -1;
    CHECK_THROWS_AS(run(m), Error);
    try {
        run(make_flat_model(), {-1});
        FAIL("expected NonPositiveConstant");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonPositiveConstant);
    }
}

TEST_CASE("report round trip") {
    for (const ManifoldModel& m : {make_s3_model(), make_kmu_model(-1, 2), make_negative_control()}) {
        AnalysisReport r = run(m, {0.5, 3});
        AnalysisReport back = report_from_json(report_to_json(r));
        CHECK(back == r);
        CHECK(report_to_json(back, -1) == report_to_json(r, -1));
        json doc = json::parse(report_to_json(r));
        CHECK(doc.at("report_version") == 1);
        if (!r.curvature.mu) CHECK(doc.at("curvature").at("mu").is_null());
    }
}

TEST_CASE("report parsing rejects bad input") {
    json doc = json::parse(report_to_json(run(make_flat_model())));
    doc["report_version"] = 2;
    CHECK_THROWS_AS(report_from_json(doc.dump()), Error);
    CHECK_THROWS_AS(report_from_json("not json"), Error);
    try {
        report_from_json("{}");
        FAIL("expected SchemaError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
    }
}

TEST_CASE("text and json agree") {
    for (const ManifoldModel& m : {make_flat_model(), make_kmu_model(-1, 2), make_kmu_model(0.5, -3)}) {
        AnalysisReport r = run(m);
        std::string text = report_to_text(r);
        auto near = [](double shown, double exact) { return std::abs(shown - exact) <= 5e-6 * std::max(1.0, std::abs(exact)); };
        CHECK(near(text_value(text, "kappa"), r.curvature.kappa));
        CHECK(near(text_value(text, "mu"), *r.curvature.mu));
        CHECK(near(text_value(text, "nullity residual"), r.curvature.nullity_residual));
        CHECK(near(text_value(text, "ratio"), *r.foliation->ratio));
        CHECK(near(text_value(text, "I_M"), *r.foliation->boeckx_im));
        CHECK(near(text_value(text, "mu recovered"), *r.foliation->mu_recovered));
        CHECK(text.find("all checks passed") != std::string::npos);
    }
    std::string bad = report_to_text(run(make_negative_control()));
    CHECK(bad.find("check(s) failed") != std::string::npos);
}

TEST_CASE("analysis is deterministic") {
    AnalysisReport a = run(make_s3_model(), {2}), b = run(make_s3_model(), {2});
    a.timings_ms.clear();
    b.timings_ms.clear();
    CHECK(a == b);
    CHECK(exit_code(a) == exit_code(b));
}

TEST_CASE("timings cover the stages") {
    AnalysisReport r = run(make_flat_model(), {2});
    for (const char* stage : {"validate", "contact", "curvature", "foliations", "bi-legendrian", "deformations"}) {
        CHECK(r.timings_ms.count(stage) == 1);
    }
}

TEST_CASE("models loaded from files analyze like the generators") {
    AnalysisReport file = run(load_model(std::string(KMU_FIXTURE_DIR) + "/flat-kappa0.json"));
    AnalysisReport built = run(make_flat_model());
    file.timings_ms.clear();
    built.timings_ms.clear();
    CHECK(file == built);
}
