#include "kmu/error.hpp"
#include "kmu/model_io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

using namespace kmu;
using nlohmann::json;
using testing::max_abs;

namespace {

const std::filesystem::path kFixtures{KMU_FIXTURE_DIR};

// Code and message of the error raised by model_from_json.
std::pair<ErrorCode, std::string> failure(const json& doc) {
    try {
        model_from_json(doc);
    } catch (const Error& e) {
        return {e.code(), e.what()};
    }
    FAIL("model_from_json accepted " << doc.dump());
    return {ErrorCode::IoError, {}};
}

void check_same(const ManifoldModel& a, const ManifoldModel& b) {
    CHECK(a.name == b.name);
    CHECK(a.dim == b.dim);
    CHECK(a.backend == b.backend);
    CHECK(a.frame_names == b.frame_names);
    REQUIRE(a.structure.has_value() == b.structure.has_value());
    if (a.structure) {
        CHECK(max_abs(a.structure->phi - b.structure->phi) == 0.0);
        CHECK(max_abs(a.structure->xi - b.structure->xi) == 0.0);
        CHECK(max_abs(a.structure->eta - b.structure->eta) == 0.0);
        CHECK(max_abs(a.structure->g - b.structure->g) == 0.0);
    }
    PointContext ca = make_context(a), cb = make_context(b);
    for (int i = 0; i < a.dim; ++i) {
        for (int j = 0; j < a.dim; ++j) CHECK(max_abs(bracket(ca, i, j) - bracket(cb, i, j)) <= 1e-15);
    }
}

json flat_doc() { return model_to_json(make_flat_model()); }

}  // namespace

TEST_CASE("committed fixtures load and match the generators") {
    check_same(load_model(kFixtures / "flat-kappa0.json"), make_flat_model());
    check_same(load_model(kFixtures / "perturbed-negative-control.json"), make_negative_control());
    ManifoldModel s3 = load_model(kFixtures / "s3-sasakian.json");
    check_same(s3, make_s3_model());
    REQUIRE(s3.blocks.has_value());
    CHECK(s3.blocks->L == std::vector<int>{0});
    CHECK(s3.blocks->Q == std::vector<int>{1});
    CHECK(s3.blocks->xi == 2);
    CHECK(s3.chart.samples.size() == 20);
}

TEST_CASE("round trip through JSON") {
    for (const ManifoldModel& m : {make_flat_model(), make_kmu_model(-1, 2), make_s3_model(7)}) {
        ManifoldModel back = model_from_json(json::parse(model_to_json(m).dump()));
        check_same(back, m);
        CHECK(model_to_json(back) == model_to_json(m));
    }
}

TEST_CASE("save and load") {
    auto path = std::filesystem::temp_directory_path() / "kmu_test_model_io.json";
    save_model(make_kmu_model(0.5, -3), path);
    check_same(load_model(path), make_kmu_model(0.5, -3));
    std::filesystem::remove(path);
}

TEST_CASE("file errors") {
    try {
        load_model(kFixtures / "does-not-exist.json");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
    auto path = std::filesystem::temp_directory_path() / "kmu_test_bad.json";
    std::ofstream(path) << "{ \"name\": ";
    try {
        load_model(path);
        FAIL("expected SchemaError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
    }
    std::filesystem::remove(path);
}

TEST_CASE("schema errors carry the path") {
    json doc = flat_doc();
    doc.erase("name");
    auto [code, msg] = failure(doc);
    CHECK(code == ErrorCode::SchemaError);
    CHECK(msg.find("$.name") != std::string::npos);

    doc = flat_doc();
    doc["name"] = 3;
    CHECK(failure(doc).second.find("$.name: expected a string") != std::string::npos);

    doc = flat_doc();
    doc["dim"] = 4;
    CHECK(failure(doc).second.find("$.dim") != std::string::npos);

    doc = flat_doc();
    doc["backend"] = "spline";
    CHECK(failure(doc).second.find("$.backend") != std::string::npos);

    doc = flat_doc();
    doc["tensors"]["phi"][1] = json::array({1, 0});
    CHECK(failure(doc).second.find("$.tensors.phi[1]") != std::string::npos);

    doc = flat_doc();
    doc["tensors"]["g"][2][2] = "one";
    CHECK(failure(doc).second.find("$.tensors.g[2][2]") != std::string::npos);

    doc = json::array();
    CHECK(failure(doc).first == ErrorCode::SchemaError);
}

TEST_CASE("Lie brackets are checked for the Jacobi identity") {
    json doc = flat_doc();
    doc["structure_constants"][0]["bracket"] = json::array({0.1, 0, 2});
    // Jacobi residual 0.2: the loader rejects it at the default tolerance.
    CHECK(failure(doc).first == ErrorCode::SchemaError);
    CHECK(failure(doc).second.find("$.structure_constants") != std::string::npos);
}

TEST_CASE("chart errors") {
    json s3 = model_to_json(make_s3_model());

    json bad = s3;
    bad["frame"][0][1] = "x1 + ";
    auto [code, msg] = failure(bad);
    CHECK(code == ErrorCode::SyntaxError);
    CHECK(msg.find("$.frame[0][1]") != std::string::npos);

    bad = s3;
    bad["frame"][2][0] = "x9";
    CHECK(failure(bad).first == ErrorCode::VariableIndexOutOfRange);

    bad = s3;
    bad["constraints"][0] = "x1 + y";
    CHECK(failure(bad).first == ErrorCode::UnknownIdentifier);

    bad = s3;
    bad["sample_points"][3] = json::array({1.0, 1.0, 0.0, 0.0});
    std::tie(code, msg) = failure(bad);
    CHECK(code == ErrorCode::ConstraintViolated);

    // At the origin every frame component vanishes.
    bad = s3;
    bad["constraints"] = json::array();
    bad["sample_points"] = json::array({json::array({0.0, 0.0, 0.0, 0.0})});
    CHECK(failure(bad).first == ErrorCode::FrameRankDeficient);

    bad = s3;
    bad["sample_points"] = json::array();
    CHECK(failure(bad).first == ErrorCode::SchemaError);
}

TEST_CASE("plain numbers are accepted as frame entries") {
    json doc = model_to_json(make_s3_model());
    doc["constraints"] = json::array();
    doc["frame"] = json::array({json::array({1, 0, 0, 0}), json::array({0, "x1", 0, 0}), json::array({0, 0, 1, 0})});
    doc["sample_points"] = json::array({json::array({2.0, 0.0, 0.0, 0.0})});
    doc.erase("tensors");
    doc.erase("adapted_blocks");
    ManifoldModel m = model_from_json(doc);
    CHECK(max_abs(bracket(make_context(m), 0, 1) - testing::vec({0, 0.5, 0})) <= 1e-15);
}

TEST_CASE("written numbers carry no negative zero") {
    std::string text = model_to_json(make_kmu_model(0.5, -3)).dump();
    CHECK(text.find("-0.0") == std::string::npos);
    CHECK(text.find("-0,") == std::string::npos);
}
