// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include "kmu/analysis.hpp"
#include "kmu/bileg.hpp"
#include "kmu/contact.hpp"
#include "kmu/curvature.hpp"
#include "kmu/error.hpp"
#include "kmu/foliation.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace kmu;

namespace {

constexpr double kTol = 1e-9;

struct Outcome {
    bool ok = true;
    std::string detail;

    // Records a failed expectation with a short description.
    void expect(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
    void at_most(double value, double bound, const std::string& what) {
        std::ostringstream os;
        os << what << " = " << value << " > " << bound;
        expect(std::isfinite(value) && value <= bound, os.str());
    }
    void near(double value, double expected, double tol, const std::string& what) {
        std::ostringstream os;
        os << what << " = " << value << ", expected " << expected;
        expect(std::abs(value - expected) <= tol, os.str());
    }
};

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double worst(const std::map<std::string, double>& r) {
    double w = 0;
    for (const auto& [k, v] : r) w = std::max(w, v);
    return w;
}

DistributionBasis span_of(const Vec& v) {
    DistributionBasis b;
    b.vectors = v;
    return b;
}

std::vector<std::pair<double, double>> named() { return {{0.0, 0.0}, {0.75, 1.0}, {-1.0, 2.0}, {0.5, -3.0}}; }

std::vector<std::pair<double, double>> random_draws() {
    std::mt19937_64 rng(kDefaultSeed);
    std::uniform_real_distribution<double> kappa(-5.0, 0.99), mu(-5.0, 5.0);
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < 100; ++i) {
        double k = kappa(rng);
        out.emplace_back(k, mu(rng));
    }
    return out;
}

std::vector<std::pair<double, double>> all_generators() {
    auto v = named();
    auto r = random_draws();
    v.insert(v.end(), r.begin(), r.end());
    return v;
}

std::string label(double k, double m) {
    std::ostringstream os;
    os << "(" << k << "," << m << ")";
    return os.str();
}

// Adapted (e, f, xi) frame of a three-dimensional Lie model.
AdaptedFrame lie_frame(const ManifoldModel& m) {
    return adapted_frame(m, *m.structure, span_of(Vec::Unit(3, 0)), span_of(Vec::Unit(3, 1)));
}

double torsion_on_d(const PointContext& ctx, const Connection& c, const AdaptedFrame& f) {
    TorsionField t = torsion(ctx, c);
    TwoForm phi = fundamental_form(f.structure);
    double w = 0;
    for (int i = 0; i < 2 * f.n; ++i) {
        for (int j = 0; j < 2 * f.n; ++j) w = std::max(w, max_abs(t(i, j) - 2 * phi(i, j) * f.structure.xi));
    }
    return w;
}

Outcome s3_example() {
    Outcome o;
    ManifoldModel s3 = make_s3_model();
    const ContactMetricStructure& s = *s3.structure;
    auto contexts = make_contexts(s3);
    o.expect(contexts.size() == 20, "expected 20 sample points");
    for (const PointContext& ctx : contexts) {
        o.at_most(max_abs(bracket(ctx, 0, 2) + 2 * Vec::Unit(3, 1)), kTol, "[X,xi] + 2Y");
        o.at_most(max_abs(bracket(ctx, 1, 2) - 2 * Vec::Unit(3, 0)), kTol, "[Y,xi] - 2X");
        o.at_most(max_abs(bracket(ctx, 0, 1) - 2 * Vec::Unit(3, 2)), kTol, "[X,Y] - 2xi");
    }
    o.expect(validate_acm(s).empty(), "structure does not validate");
    std::vector<EndoField> hs;
    for (const PointContext& ctx : contexts) {
        hs.push_back(compute_h(ctx, s));
        o.at_most(max_abs(hs.back()), kTol, "|h|");
        o.expect(sasakian_check(levi_civita(ctx, s.g), s, kTol), "Sasakian check fails");
    }
    AdaptedFrame f = adapted_frame(s3, s, *s3.blocks, kTol);
    for (const PointContext& ctx : make_contexts(f.model)) {
        Connection bar = bileg_connection(ctx, f).connection;
        for (const Mat& c : bar.coeffs) o.at_most(max_abs(c), kTol, "nablabar coefficient");
        o.at_most(check_parallel(ctx, bar, f.structure, Tensor::Phi), kTol, "nablabar phi");
        o.at_most(check_parallel(ctx, bar, f.structure, Tensor::G), kTol, "nablabar g");
    }
    for (int a = 0; a < 2; ++a) {
        DistributionBasis b = span_of(Vec::Unit(3, a));
        PangForm pi = pang_invariant(contexts, s, b, kTol);
        for (const Mat& m : pi.matrices) o.near(m(0, 0), 4.0, kTol, a == 0 ? "Pi(X,X)" : "Pi(Y,Y)");
        o.expect(classify(pi, contexts, s, b, kTol).type == FoliationType::NonDegenerate, "foliation not NonDegenerate");
    }
    o.detail = o.ok ? "20 points; brackets, h = 0, Sasakian, nablabar = 0, Pi = 4 on X and Y" : o.detail;
    return o;
}

Outcome generator_extraction() {
    Outcome o;
    double worst_err = 0, worst_res = 0;
    for (auto [k, m] : all_generators()) {
        ManifoldModel model = make_kmu_model(k, m);
        auto ctx = make_contexts(model);
        KappaMuReport r = extract_kappa_mu(ctx, *model.structure, kTol);
        worst_err = std::max({worst_err, std::abs(r.kappa - k), std::abs(r.mu.value_or(NAN) - m)});
        worst_res = std::max(worst_res, r.residual);
        o.near(r.kappa, k, kTol, "kappa " + label(k, m));
        o.near(r.mu.value_or(NAN), m, kTol, "mu " + label(k, m));
        o.at_most(r.residual, kTol, "nullity residual " + label(k, m));
    }
    if (o.ok) {
        std::ostringstream os;
        os << "104 models; max error " << worst_err << ", max residual " << worst_res;
        o.detail = os.str();
    }
    return o;
}

Outcome closed_form_coherence() {
    Outcome o;
    for (auto [k, m] : all_generators()) {
        ManifoldModel model = make_kmu_model(k, m);
        auto ctx = make_contexts(model);
        const ContactMetricStructure& s = *model.structure;
        auto [cl, cq] = closed_form_invariants(k, m, kTol);
        o.near(pang_invariant(ctx, s, span_of(Vec::Unit(3, 0)), kTol).matrices[0](0, 0), cl, kTol, "Pi_L " + label(k, m));
        o.near(pang_invariant(ctx, s, span_of(Vec::Unit(3, 1)), kTol).matrices[0](0, 0), cq, kTol, "Pi_Q " + label(k, m));
    }
    auto [a, b] = closed_form_invariants(0, 0);
    o.near(a, 4, kTol, "(0,0) on L");
    o.near(b, 0, kTol, "(0,0) on Q");
    auto [c, d] = closed_form_invariants(0.75, 1);
    o.near(c, 2, kTol, "(3/4,1) on L");
    o.near(d, 0, kTol, "(3/4,1) on Q");
    if (o.ok) o.detail = "104 models; (0,0) -> (4,0), (3/4,1) -> (2,0)";
    return o;
}

Outcome difference_identity() {
    Outcome o;
    double w = 0;
    auto run = [&](const ManifoldModel& m, const Vec& l, const std::string& name) {
        auto ctx = make_contexts(m);
        double r = lemma0_check(ctx, *m.structure, span_of(l), kTol).residual;
        w = std::max(w, r);
        o.at_most(r, kTol, "residual on " + name);
    };
    for (auto [k, m] : all_generators()) run(make_kmu_model(k, m), Vec::Unit(3, 0), label(k, m));
    run(make_s3_model(), Vec::Unit(3, 0), "s3-sasakian");
    run(make_negative_control(), Vec::Unit(3, 0), "perturbed-negative-control");
    ManifoldModel s3 = make_s3_model();
    auto ctx = make_contexts(s3);
    Lemma0Result r = lemma0_check(ctx, *s3.structure, span_of(Vec::Unit(3, 0)), kTol);
    o.expect(r.corollary1, "h = 0 on S3 but the classes differ");
    if (o.ok) {
        std::ostringstream os;
        os << "106 models; max residual " << w << "; S3 classes agree with h = 0";
        o.detail = os.str();
    }
    return o;
}

Outcome deformation_suite() {
    Outcome o;
    ManifoldModel d = deform(make_flat_model(), 2.0);
    auto dctx = make_contexts(d);
    KappaMuReport r = extract_kappa_mu(dctx, *d.structure, kTol);
    o.near(r.kappa, 0.75, kTol, "deformed kappa");
    o.near(r.mu.value_or(NAN), 1.0, kTol, "deformed mu");
    for (auto [k, m] : named()) {
        ManifoldModel model = make_kmu_model(k, m);
        auto ctx = make_contexts(model);
        const double im = (1 - m / 2) / std::sqrt(1 - k);
        for (double a : {0.5, 2.0, 3.0}) {
            o.at_most(pi_deformation_invariance(ctx, *model.structure, a, span_of(Vec::Unit(3, 0)), kTol), kTol,
                      "Pi change " + label(k, m));
            o.at_most(connection_deformation_invariance(model, *model.structure, a, span_of(Vec::Unit(3, 0)),
                                                        span_of(Vec::Unit(3, 1)), kTol),
                      kTol, "connection change " + label(k, m));
            ManifoldModel dm = deform(model, a);
            auto c2 = make_contexts(dm);
            KappaMuReport e = extract_kappa_mu(c2, *dm.structure, kTol);
            o.near((1 - e.mu.value_or(NAN) / 2) / std::sqrt(1 - e.kappa), im, kTol, "I_M " + label(k, m));
        }
    }
    if (o.ok) o.detail = "deform(flat, 2) -> (0.75, 1); Pi, connection and I_M unchanged for a in {0.5, 2, 3}";
    return o;
}

Outcome parallelism() {
    Outcome o;
    for (auto [k, m] : all_generators()) {
        AdaptedFrame f = lie_frame(make_kmu_model(k, m));
        PointContext ctx = make_context(f.model);
        Connection bar = bileg_connection(ctx, f).connection;
        o.at_most(check_parallel(ctx, bar, f.structure, Tensor::Phi), kTol, "nablabar phi " + label(k, m));
        o.at_most(check_parallel(ctx, bar, f.structure, Tensor::H), kTol, "nablabar h " + label(k, m));
        o.at_most(check_parallel(ctx, bar, f.structure, Tensor::G), kTol, "nablabar g " + label(k, m));
        o.at_most(torsion_on_d(ctx, bar, f), kTol, "torsion on D " + label(k, m));
    }
    if (o.ok) o.detail = "104 models; phi, h, g parallel and T(Z,Z') = 2 Phi(Z,Z') xi";
    return o;
}

Outcome levi_civita_relation_check() {
    Outcome o;
    for (auto [k, m] : all_generators()) {
        AdaptedFrame f = lie_frame(make_kmu_model(k, m));
        PointContext ctx = make_context(f.model);
        o.at_most(levi_civita_relation(bileg_connection(ctx, f).connection, levi_civita(ctx, f.structure.g), f), kTol,
                  "relation " + label(k, m));
    }
    ManifoldModel s3 = make_s3_model();
    AdaptedFrame f = adapted_frame(s3, *s3.structure, *s3.blocks, kTol);
    for (const PointContext& ctx : make_contexts(f.model)) {
        o.at_most(levi_civita_relation(bileg_connection(ctx, f).connection, levi_civita(ctx, f.structure.g), f), kTol,
                  "relation on S3");
    }
    if (o.ok) o.detail = "104 generators and S3 (20 points)";
    return o;
}

Outcome characterization() {
    Outcome o;
    for (auto [k, m] : named()) {
        ManifoldModel model = make_kmu_model(k, m);
        TheoremReport r = theorem_main_suite(model, *model.structure, kTol);
        o.expect(r.conditions_hold, "connection conditions fail on " + label(k, m));
        o.expect(r.verdict == VerdictState::Pass, "verdict not pass on " + label(k, m));
        o.near(r.kappa_mu->kappa, k, kTol, "kappa " + label(k, m));
        o.near(r.kappa_mu->mu.value_or(NAN), m, kTol, "mu " + label(k, m));
    }
    ManifoldModel bad = make_negative_control(0.1);
    TheoremReport br = theorem_main_suite(bad, *bad.structure, kTol);
    const double nullity = br.kappa_mu ? br.kappa_mu->residual : 0.0;
    const double axiom = worst(br.conditions);
    o.expect(nullity > 1e-3, "negative control nullity residual too small");
    o.expect(axiom > 1e-3, "negative control connection residuals too small");
    ManifoldModel s3 = make_s3_model();
    o.expect(theorem_main_suite(s3, *s3.structure, kTol).verdict == VerdictState::NotApplicable,
             "S3 not reported as not-applicable");
    if (o.ok) {
        std::ostringstream os;
        os << "generators pass; control nullity " << nullity << ", worst connection condition " << axiom
           << "; S3 not-applicable";
        o.detail = os.str();
    }
    return o;
}

Outcome trichotomy() {
    Outcome o;
    for (auto [k, m] : all_generators()) {
        ManifoldModel model = make_kmu_model(k, m);
        auto ctx = make_contexts(model);
        const ContactMetricStructure& s = *model.structure;
        const double l = std::sqrt(1 - k);
        const bool flat_l = std::abs(k + m * l - (l + 1) * (l + 1)) <= kTol;
        const bool flat_q = std::abs(k - m * l - (l - 1) * (l - 1)) <= kTol;
        for (int a = 0; a < 2; ++a) {
            DistributionBasis b = span_of(Vec::Unit(3, a));
            FoliationClass c = classify(pang_invariant(ctx, s, b, kTol), ctx, s, b, kTol);
            const FoliationType expected = (a == 0 ? flat_l : flat_q) ? FoliationType::Flat : FoliationType::NonDegenerate;
            o.expect(c.type == expected, "class disagrees with sign test on " + label(k, m));
        }
        o.expect(!(flat_l && flat_q), "both flat at " + label(k, m));
        FlatnessConditions fc = flatness_conditions(k, m, kTol);
        o.expect(fc.f_lambda_flat == flat_l && fc.f_minus_flat == flat_q, "flatness_conditions disagree " + label(k, m));
    }
    for (auto [k, m] : {std::pair{0.0, 0.0}, std::pair{0.75, 1.0}}) {
        ManifoldModel model = make_kmu_model(k, m);
        auto ctx = make_contexts(model);
        const ContactMetricStructure& s = *model.structure;
        DistributionBasis L = span_of(Vec::Unit(3, 0)), Q = span_of(Vec::Unit(3, 1));
        o.expect(classify(pang_invariant(ctx, s, Q, kTol), ctx, s, Q, kTol).type == FoliationType::Flat,
                 "F_-lambda not flat on " + label(k, m));
        o.expect(classify(pang_invariant(ctx, s, L, kTol), ctx, s, L, kTol).type == FoliationType::NonDegenerate,
                 "F_lambda not non-degenerate on " + label(k, m));
    }
    if (o.ok) o.detail = "104 models agree with the sign tests; never both flat";
    return o;
}

Outcome erratum_values() {
    Outcome o;
    for (auto [k, m] : all_generators()) {
        ManifoldModel model = make_kmu_model(k, m);
        auto ctx = make_contexts(model);
        const ContactMetricStructure& s = *model.structure;
        DistributionBasis l = span_of(Vec::Unit(3, 0));
        PangForm pl = pang_invariant(ctx, s, l, kTol);
        PangForm pq = pang_invariant(ctx, s, conjugate_distribution(l, s, kTol), kTol);
        BoeckxResult b = boeckx_invariant(pl, pq, s, l, k, m, kTol);
        const double im = (1 - m / 2) / std::sqrt(1 - k);
        o.near(b.ratio, im, kTol, "ratio " + label(k, m));
        if (std::abs(im) > kTol) o.expect(std::abs(b.ratio - im / 4) > kTol, "ratio equals I_M/4 on " + label(k, m));
        MuRecovery r = recover_mu(pl, std::sqrt(1 - k), s, l);
        o.near(r.mu_recovered, m, kTol, "mu_recovered " + label(k, m));
    }
    ManifoldModel flat = make_flat_model();
    AnalysisReport rep = analyze(flat);
    nlohmann::json doc = nlohmann::json::parse(report_to_json(rep));
    const auto& fol = doc.at("foliation");
    o.expect(fol.at("mu_recovered").is_number() && fol.at("paper_eq13_value").is_number(),
             "report lacks mu_recovered or paper_eq13_value");
    const double diff = fol.at("paper_eq13_value").get<double>() - fol.at("mu_recovered").get<double>();
    o.near(diff, 4.0, kTol, "paper_eq13_value - mu_recovered on (0,0)");
    if (o.ok) o.detail = "ratio = I_M (not I_M/4) and mu recovered on 104 models; (0,0) values differ by 4, both in the report";
    return o;
}

Outcome tanaka_webster_check() {
    Outcome o;
    for (auto [k, m] : all_generators()) {
        AdaptedFrame f = lie_frame(make_kmu_model(k, m));
        PointContext ctx = make_context(f.model);
        o.at_most(worst(tanaka_webster(ctx, bileg_connection(ctx, f), f).residuals), kTol, "residual " + label(k, m));
    }
    ManifoldModel s3 = make_s3_model();
    AdaptedFrame f = adapted_frame(s3, *s3.structure, *s3.blocks, kTol);
    for (const PointContext& ctx : make_contexts(f.model)) {
        o.at_most(worst(tanaka_webster(ctx, bileg_connection(ctx, f), f).residuals), kTol, "residual on S3");
    }
    if (o.ok) o.detail = "g, phi, xi, eta parallel and torsion 2 Phi xi on D for 104 generators and S3";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"S3 example reproduction", s3_example},
        {"generator extraction", generator_extraction},
        {"Pang coefficients match the closed forms", closed_form_coherence},
        {"difference identity Pi_L - Pi_Q = 4 g(h., .)", difference_identity},
        {"D-homothetic deformation suite", deformation_suite},
        {"phi, h, g parallel and torsion on D", parallelism},
        {"relation to the Levi-Civita connection", levi_civita_relation_check},
        {"connection characterization round trip", characterization},
        {"flat / non-degenerate trichotomy", trichotomy},
        {"ratio and mu recovery values", erratum_values},
        {"Tanaka-Webster connection", tanaka_webster_check},
    };
    const auto start = std::chrono::steady_clock::now();
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += o.ok ? 0 : 1;
        std::printf("criterion %2zu: %s  %s (%s)\n", i + 1, o.ok ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of %zu criteria passed in %.2f s\n", static_cast<int>(criteria.size()) - failed, criteria.size(),
                seconds);
    return failed ? 1 : 0;
}
