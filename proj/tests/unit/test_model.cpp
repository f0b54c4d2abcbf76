#include "kmu/error.hpp"
#include "kmu/model.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace kmu;
using testing::max_abs;
using testing::unit;
using testing::vec;

namespace {

// The S^3 frame fields are linear: V(x) = A_V x.
Mat linear_field(int which) {
    Mat a = Mat::Zero(4, 4);
    switch (which) {
        case 0:  // X = (x2, -x1, -x4, x3)
            a(0, 1) = 1; a(1, 0) = -1; a(2, 3) = -1; a(3, 2) = 1;
            break;
        case 1:  // Y = (x4, -x3, x2, -x1)
            a(0, 3) = 1; a(1, 2) = -1; a(2, 1) = 1; a(3, 0) = -1;
            break;
        default:  // xi = (x3, x4, -x1, -x2)
            a(0, 2) = 1; a(1, 3) = 1; a(2, 0) = -1; a(3, 1) = -1;
            break;
    }
    return a;
}

// [V, W] = DW V - DV W, expressed in the (ambient-orthonormal) frame.
Vec s3_bracket_oracle(const Vec& x, int i, int j) {
    const Mat ai = linear_field(i), aj = linear_field(j);
    Vec ambient = aj * ai * x - ai * aj * x;
    Vec out(3);
    for (int k = 0; k < 3; ++k) out[k] = (linear_field(k) * x).dot(ambient);
    return out;
}

}  // namespace

TEST_CASE("flat fixture brackets") {
    PointContext ctx = make_context(make_flat_model());
    CHECK(max_abs(bracket(ctx, 0, 1) - vec({0, 0, 2})) == 0.0);  // [e,f] = 2 xi
    CHECK(max_abs(bracket(ctx, 2, 0) - vec({0, 2, 0})) == 0.0);  // [xi,e] = 2 f
    CHECK(max_abs(bracket(ctx, 2, 1)) == 0.0);                   // [xi,f] = 0
    for (int i = 0; i < 3; ++i) CHECK(max_abs(bracket(ctx, i, i)) == 0.0);
}

TEST_CASE("Jacobi residuals") {
    CHECK(jacobi_check(make_flat_model()) == 0.0);
    CHECK(jacobi_check(make_kmu_model(0.75, 1.0)) <= 1e-12);
    // [e,f] = 2xi + 0.1e: cyclic sum picks up [xi, 0.1 e] = 0.2 f.
    ManifoldModel bad = perturb_structure_constant(make_flat_model(), 0, 1, 0, 0.1);
    CHECK(jacobi_check(bad) >= 0.1);
    CHECK(jacobi_check(bad) == doctest::Approx(0.2));
    CHECK_THROWS_AS(jacobi_check(make_s3_model()), Error);
}

TEST_CASE("generator brackets follow the coefficient formulas") {
    PointContext flat = make_context(make_flat_model());
    PointContext gen00 = make_context(make_kmu_model(0, 0));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(max_abs(bracket(flat, i, j) - bracket(gen00, i, j)) == 0.0);
    }
    PointContext g = make_context(make_kmu_model(0.75, 1.0));
    CHECK(max_abs(bracket(g, 2, 0) - vec({0, 1, 0})) <= 1e-15);  // [xi,e] = f
    CHECK(max_abs(bracket(g, 2, 1)) <= 1e-15);                   // [xi,f] = 0
    CHECK(max_abs(bracket(g, 0, 1) - vec({0, 0, 2})) == 0.0);
}

TEST_CASE("generator rejects the Sasakian limit") {
    auto code = [](double k) {
        try {
            make_kmu_model(k, 0.0);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::SchemaError;
    };
    CHECK(code(1.0) == ErrorCode::SasakianLimit);
    CHECK(code(1.0 - 1e-20) == ErrorCode::SasakianLimit);
    CHECK(code(2.0) == ErrorCode::SasakianLimit);
    CHECK_NOTHROW(make_kmu_model(0.99, 0.0));
}

TEST_CASE("generator Jacobi over random draws") {
    for (auto [k, m] : testing::kappa_mu_draws(100)) {
        CAPTURE(k);
        CAPTURE(m);
        CHECK(jacobi_check(make_kmu_model(k, m)) <= 1e-12);
    }
}

TEST_CASE("S3 chart model data") {
    ManifoldModel s3 = make_s3_model();
    CHECK(s3.backend == Backend::Chart);
    CHECK(s3.dim == 3);
    CHECK(s3.chart.coords == 4);
    REQUIRE(s3.chart.samples.size() == 20);
    for (const Vec& p : s3.chart.samples) {
        std::vector<double> x(p.data(), p.data() + 4);
        CHECK(std::abs(expr::evaluate(s3.chart.constraints.at(0), x)) <= 1e-12);
        for (int a = 0; a < 3; ++a) {
            Vec expected = linear_field(a) * p;
            for (int k = 0; k < 4; ++k) CHECK(expr::evaluate(s3.chart.frame[a][k], x) == expected[k]);
        }
    }
}

TEST_CASE("S3 sample points are deterministic in the seed") {
    ManifoldModel a = make_s3_model(42), b = make_s3_model(42), c = make_s3_model(7);
    CHECK(max_abs(a.chart.samples[5] - b.chart.samples[5]) == 0.0);
    CHECK(max_abs(a.chart.samples[5] - c.chart.samples[5]) > 0.0);
    CHECK(normal_draws(42, 9) == normal_draws(42, 9));
}

TEST_CASE("S3 chart brackets match the paper's and the linear-field oracle") {
    ManifoldModel s3 = make_s3_model();
    std::vector<PointContext> contexts = make_contexts(s3);
    REQUIRE(contexts.size() == 20);
    for (const PointContext& ctx : contexts) {
        CHECK(max_abs(bracket(ctx, 0, 2) - vec({0, -2, 0})) <= 1e-9);  // [X,xi] = -2Y
        CHECK(max_abs(bracket(ctx, 1, 2) - vec({2, 0, 0})) <= 1e-9);   // [Y,xi] = 2X
        CHECK(max_abs(bracket(ctx, 0, 1) - vec({0, 0, 2})) <= 1e-9);   // [X,Y] = 2xi
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                CHECK(max_abs(bracket(ctx, i, j) - s3_bracket_oracle(ctx.point, i, j)) <= 1e-12);
                CHECK(max_abs(bracket(ctx, i, j) + bracket(ctx, j, i)) <= 1e-12);
                for (int k = 0; k < 3; ++k) CHECK(max_abs(ctx.brackets.derivative(k, i, j)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("chart bracket outside the frame span is rejected") {
    // e1 = d1, e2 = d2 + x1 d4, e3 = d3 in R^4: [e1, e2] = d4 is not in the span.
    ManifoldModel m;
    m.name = "open";
    m.dim = 3;
    m.backend = Backend::Chart;
    m.chart.coords = 4;
    m.chart.frame = {{expr::parse("1", 4), expr::parse("0", 4), expr::parse("0", 4), expr::parse("0", 4)},
                     {expr::parse("0", 4), expr::parse("1", 4), expr::parse("0", 4), expr::parse("x1", 4)},
                     {expr::parse("0", 4), expr::parse("0", 4), expr::parse("1", 4), expr::parse("0", 4)}};
    m.chart.samples = {vec({0.5, 0, 0, 0})};
    try {
        make_contexts(m);
        FAIL("expected SpanResidualExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SpanResidualExceeded);
    }
}

TEST_CASE("chart structure functions and their derivatives") {
    // e1 = d1, e2 = x1 d2, e3 = d3 on R^3: [e1, e2] = d2 = e2 / x1.
    ManifoldModel m;
    m.name = "scaled";
    m.dim = 3;
    m.backend = Backend::Chart;
    m.chart.coords = 3;
    m.chart.frame = {{expr::parse("1", 3), expr::parse("0", 3), expr::parse("0", 3)},
                     {expr::parse("0", 3), expr::parse("x1", 3), expr::parse("0", 3)},
                     {expr::parse("0", 3), expr::parse("0", 3), expr::parse("1", 3)}};
    m.chart.samples = {vec({2.0, 0.3, -1.0})};
    PointContext ctx = make_context(m);
    CHECK(max_abs(bracket(ctx, 0, 1) - vec({0, 0.5, 0})) <= 1e-14);
    // e1(1/x1) = -1/x1^2; e2 and e3 do not change x1.
    CHECK(max_abs(ctx.brackets.derivative(0, 0, 1) - vec({0, -0.25, 0})) <= 1e-14);
    CHECK(max_abs(ctx.brackets.derivative(1, 0, 1)) <= 1e-14);
    CHECK_FALSE(ctx.brackets.position_independent());
}

TEST_CASE("frame change of a Lie model") {
    ManifoldModel flat = make_flat_model();
    Mat swap = Mat::Zero(3, 3);
    swap(1, 0) = 1;  // new e0 = f
    swap(0, 1) = 1;  // new e1 = e
    swap(2, 2) = 1;
    ManifoldModel m = change_frame(flat, swap);
    PointContext ctx = make_context(m);
    CHECK(max_abs(bracket(ctx, 0, 1) - vec({0, 0, -2})) == 0.0);  // [f, e] = -2 xi
    CHECK(max_abs(bracket(ctx, 2, 1) - vec({2, 0, 0})) == 0.0);   // [xi, e] = 2 f = 2 e0'
    CHECK(m.frame_names == std::vector<std::string>{"f", "e", "xi"});
    REQUIRE(m.structure.has_value());
    CHECK(max_abs(m.structure->phi * unit(3, 1) - unit(3, 0)) == 0.0);  // phi e = f

    Mat scale = Mat::Identity(3, 3);
    scale(2, 2) = 0.5;
    ManifoldModel half = change_frame(flat, scale);
    CHECK(max_abs(make_context(half).brackets(0, 1) - vec({0, 0, 4})) == 0.0);  // [e,f] = 2 xi = 4 (xi/2)
    CHECK(max_abs(half.structure->xi - vec({0, 0, 2})) == 0.0);
    CHECK_THROWS_AS(change_frame(flat, Mat::Zero(3, 3)), Error);
}
