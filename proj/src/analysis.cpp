#include "kmu/analysis.hpp"

#include "kmu/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nlohmann {
template <typename T>
struct adl_serializer<std::optional<T>> {
    static void to_json(json& j, const std::optional<T>& v) {
        if (v) {
            j = *v;
        } else {
            j = nullptr;
        }
    }
    static void from_json(const json& j, std::optional<T>& v) {
        if (j.is_null()) {
            v.reset();
        } else {
            v = j.get<T>();
        }
    }
};
}  // namespace nlohmann

namespace kmu {

NLOHMANN_JSON_SERIALIZE_ENUM(VerdictState, {{VerdictState::Pass, "pass"},
                                            {VerdictState::Fail, "fail"},
                                            {VerdictState::NotApplicable, "not-applicable"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Check, name, state, residual, reason)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ModelIdentity, name, dim, backend, contexts, frame_names)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ContactSection, structure_violations, contact, deta_phi_residual, min_abs_det,
                                   h_norm, h_identity_failures, k_contact)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CurvatureSection, torsion_free_residual, metric_residual, antisymmetry_residual,
                                   pair_symmetry_residual, nabla_xi_residual, sasakian, sasakian_residual, kappa, mu,
                                   lambda, nullity_residual, spread, nullity, covariant_formula_residual)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FoliationSection, source, lambda, legendrian_l, legendrian_q, integrability_l,
                                   integrability_q, pi_l, pi_q, pang_formula_residual, class_l, class_q,
                                   bracket_criterion_agrees, pi_l_coeff, pi_q_coeff, closed_form_l, closed_form_q,
                                   f_lambda, f_minus_lambda, lemma_residual, same_class_when_h_zero,
                                   h_zero_when_both_flat, ratio, boeckx_im, mu_recovered, paper_eq13_value)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BilegSection, axioms, parallel, levi_civita_relation, nabla_g, nabla_phi,
                                   explicit_formulas, totally_geodesic, equivalence_consistent, theorem,
                                   theorem_reason, theorem_conditions, tanaka_webster)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DeformationEntry, a, kappa, mu, expected_kappa, expected_mu, pi_residual,
                                   connection_residual, boeckx_im)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AnalysisReport, report_version, model, tolerance, seed, contact, curvature,
                                   foliation, bileg, deformations, checks, timings_ms)

namespace {

using Clock = std::chrono::steady_clock;

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double max_value(const std::map<std::string, double>& m) {
    double worst = 0.0;
    for (const auto& [k, v] : m) worst = std::max(worst, v);
    return worst;
}

Matrix to_matrix(const Mat& m) {
    Matrix out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

class Pipeline {
public:
    Pipeline(const ManifoldModel& model, const AnalysisOptions& options) : model_(model), tol_(options.tolerance) {
        report_.tolerance = options.tolerance;
        report_.seed = options.seed;
        deformations_ = options.deformations;
    }

    AnalysisReport run() {
        if (!model_.structure) throw Error(ErrorCode::SchemaError, "model has no tensors");
        s_ = *model_.structure;
        timed("validate", [&] { validate(); });
        timed("contact", [&] { contact(); });
        timed("h", [&] { h_stage(); });
        timed("curvature", [&] { curvature(); });
        timed("extraction", [&] { extraction(); });
        if (valid_) {
            timed("foliations", [&] { foliations(); });
            timed("bi-legendrian", [&] { bileg(); });
            timed("deformations", [&] { deformations(); });
        }
        return std::move(report_);
    }

private:
    template <typename F>
    void timed(const char* stage, F&& f) {
        auto start = Clock::now();
        f();
        report_.timings_ms[stage] = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }

    void check(std::string name, VerdictState state, double residual = 0.0, std::string reason = {}) {
        if (!std::isfinite(residual)) {
            state = VerdictState::Fail;
            reason = "non-finite residual" + (reason.empty() ? "" : "; " + reason);
            residual = 0.0;
        }
        report_.checks.push_back({std::move(name), state, std::abs(residual), std::move(reason)});
    }
    void bound(std::string name, double residual, std::string reason = {}) {
        check(std::move(name), residual <= tol_ ? VerdictState::Pass : VerdictState::Fail, residual,
              std::move(reason));
    }
    void flag(std::string name, bool ok, std::string reason = {}) {
        check(std::move(name), ok ? VerdictState::Pass : VerdictState::Fail, 0.0, std::move(reason));
    }
    void skip(std::string name, std::string reason) {
        check(std::move(name), VerdictState::NotApplicable, 0.0, std::move(reason));
    }

    void validate() {
        ModelIdentity& id = report_.model;
        id.name = model_.name;
        id.dim = model_.dim;
        id.backend = model_.backend == Backend::Lie ? "lie" : "chart";
        for (int i = 0; i < model_.dim; ++i) id.frame_names.push_back(model_.frame_name(i));
        contexts_ = make_contexts(model_, tol_);
        id.contexts = static_cast<int>(contexts_.size());
        report_.contact.structure_violations = validate_acm(s_, tol_);
        std::string joined;
        for (const auto& v : report_.contact.structure_violations) joined += (joined.empty() ? "" : ", ") + v;
        flag("structure.almost_contact_metric", joined.empty(), joined);
        valid_ = joined.empty();
    }

    void contact() {
        ContactCheck c = contact_check(contexts_, s_, tol_);
        report_.contact.contact = c.contact;
        report_.contact.deta_phi_residual = c.deta_phi_residual;
        report_.contact.min_abs_det = c.min_abs_det;
        std::string joined;
        for (const auto& d : c.diagnostics) joined += (joined.empty() ? "" : "; ") + d;
        check("contact.d_eta_equals_Phi", c.contact ? VerdictState::Pass : VerdictState::Fail, c.deta_phi_residual,
              joined);
        valid_ = valid_ && c.contact;
    }

    void h_stage() {
        std::vector<std::string> failures;
        for (const PointContext& ctx : contexts_) {
            PointCurvature pc = point_curvature(ctx, s_);
            report_.contact.h_norm = std::max(report_.contact.h_norm, max_abs(pc.h));
            for (const auto& f : h_identities_check(s_, pc.h, tol_)) {
                if (std::find(failures.begin(), failures.end(), f) == failures.end()) failures.push_back(f);
            }
            hs_.push_back(std::move(pc.h));
            nablas_.push_back(std::move(pc.levi_civita));
            curvatures_.push_back(std::move(pc.riemann));
        }
        report_.contact.h_identity_failures = failures;
        report_.contact.k_contact = is_k_contact(hs_, tol_);
        std::string joined;
        for (const auto& f : failures) joined += (joined.empty() ? "" : ", ") + f;
        if (valid_) {
            flag("h.identities", failures.empty(), joined);
        } else {
            skip("h.identities", "structure is not contact metric");
        }
    }

    void curvature() {
        CurvatureSection& c = report_.curvature;
        for (std::size_t k = 0; k < contexts_.size(); ++k) {
            c.torsion_free_residual = std::max(c.torsion_free_residual, torsion_free_residual(contexts_[k], nablas_[k]));
            c.metric_residual = std::max(c.metric_residual, metric_residual(nablas_[k], s_.g));
            c.antisymmetry_residual = std::max(c.antisymmetry_residual, curvature_antisymmetry_residual(curvatures_[k]));
            c.pair_symmetry_residual =
                std::max(c.pair_symmetry_residual, curvature_pair_symmetry_residual(curvatures_[k], s_.g));
            c.nabla_xi_residual = std::max(c.nabla_xi_residual, check_nabla_xi(nablas_[k], s_, hs_[k]));
            c.sasakian_residual = std::max(c.sasakian_residual, sasakian_residual(nablas_[k], s_));
        }
        bound("curvature.levi_civita_torsion_free", c.torsion_free_residual);
        bound("curvature.levi_civita_metric", c.metric_residual);
        bound("curvature.antisymmetry", c.antisymmetry_residual);
        bound("curvature.pair_symmetry", c.pair_symmetry_residual);
        if (valid_) {
            bound("curvature.nabla_xi_formula", c.nabla_xi_residual);
        } else {
            skip("curvature.nabla_xi_formula", "structure is not contact metric");
        }
        c.sasakian = report_.contact.k_contact && c.sasakian_residual <= tol_;
        if (!report_.contact.k_contact) {
            skip("curvature.sasakian", "xi is not Killing");
        } else if (c.sasakian) {
            bound("curvature.sasakian", c.sasakian_residual);
        } else {
            skip("curvature.sasakian", "K-contact but not normal");
        }
    }

    void extraction() {
        CurvatureSection& c = report_.curvature;
        if (!valid_) {
            skip("curvature.nullity", "structure is not contact metric");
            return;
        }
        KappaMuReport km = fit_kappa_mu(curvatures_, hs_, s_, tol_);
        c.kappa = km.kappa;
        c.mu = km.mu;
        c.lambda = km.lambda;
        c.nullity_residual = km.residual;
        c.spread = km.spread;
        c.nullity = km.residual <= tol_ && km.spread <= tol_ && km.kappa <= 1.0 + tol_;
        std::string reason;
        if (km.residual > tol_) reason = "curvature is not of nullity type";
        if (km.spread > tol_) reason += (reason.empty() ? "" : "; ") + std::string("constants vary across points");
        check("curvature.nullity", c.nullity ? VerdictState::Pass : VerdictState::Fail,
              std::max(km.residual, km.spread), reason);
        if (c.nullity && c.mu && !km.sasakian) {
            double worst = 0.0;
            for (std::size_t k = 0; k < contexts_.size(); ++k) {
                worst = std::max(worst, check_kmu_covariant_formulas(contexts_[k], nablas_[k], s_, c.kappa, *c.mu));
            }
            c.covariant_formula_residual = worst;
            bound("curvature.kappa_mu_covariant_formulas", worst);
        } else {
            skip("curvature.kappa_mu_covariant_formulas", c.nullity ? "Sasakian" : "no nullity constants");
        }
    }

    bool kmu_space() const { return report_.curvature.nullity && report_.curvature.mu && !report_.curvature.sasakian; }

    void select_pair(FoliationSection& f) {
        if (!report_.contact.k_contact) {
            try {
                Eigendistributions ed = eigendistributions(hs_, s_, tol_);
                l_ = ed.L;
                q_ = ed.Q;
                f.source = "eigenspaces";
                f.lambda = ed.lambda;
                return;
            } catch (const Error& e) {
                pair_reason_ = e.what();
            }
        }
        if (model_.blocks) {
            Mat l(s_.dim(), static_cast<Eigen::Index>(model_.blocks->L.size()));
            for (std::size_t a = 0; a < model_.blocks->L.size(); ++a) {
                l.col(static_cast<Eigen::Index>(a)) = Vec::Unit(s_.dim(), model_.blocks->L[a]);
            }
            l_ = DistributionBasis{l, "L"};
            q_ = conjugate_distribution(*l_, s_, tol_);
            f.source = "declared";
            f.lambda = report_.curvature.lambda;
        }
    }

    void foliations() {
        FoliationSection f;
        select_pair(f);
        if (!l_) {
            std::string reason = "no bi-Legendrian pair" + (pair_reason_.empty() ? "" : ": " + pair_reason_);
            skip("foliation.pair", reason);
            return;
        }
        std::vector<TwoForm> deta;
        for (const PointContext& ctx : contexts_) deta.push_back(d_eta(ctx, s_));
        f.legendrian_l = legendrian_check(*l_, deta, s_, tol_);
        f.legendrian_q = legendrian_check(*q_, deta, s_, tol_);
        f.integrability_l = integrability_residual(contexts_, *l_);
        f.integrability_q = integrability_residual(contexts_, *q_);
        flag("foliation.legendrian", f.legendrian_l && f.legendrian_q);
        bound("foliation.integrable", std::max(f.integrability_l, f.integrability_q));

        PangForm pi_l, pi_q;
        try {
            pi_l = pang_invariant(contexts_, s_, *l_, tol_);
            pi_q = pang_invariant(contexts_, s_, *q_, tol_);
            f.pang_formula_residual = std::max(pi_l.formula_residual, pi_q.formula_residual);
            bound("foliation.pang_two_routes", f.pang_formula_residual);
        } catch (const Error& e) {
            pi_l.formula_residual = pi_q.formula_residual = 0.0;
            check("foliation.pang_two_routes", VerdictState::Fail, 0.0, e.what());
            report_.foliation = std::move(f);
            return;
        }
        f.pi_l = to_matrix(pi_l.matrices.front());
        f.pi_q = to_matrix(pi_q.matrices.front());
        FoliationClass cl = classify(pi_l, contexts_, s_, *l_, tol_);
        FoliationClass cq = classify(pi_q, contexts_, s_, *q_, tol_);
        f.class_l = std::string(to_string(cl.type));
        f.class_q = std::string(to_string(cq.type));
        f.bracket_criterion_agrees = cl.bracket_criterion_agrees && cq.bracket_criterion_agrees;
        std::string diag = cl.diagnostics;
        if (!cq.diagnostics.empty()) diag += (diag.empty() ? "" : "; ") + cq.diagnostics;
        flag("foliation.bracket_criterion", f.bracket_criterion_agrees, diag);
        const Vec x = (*l_)[0];
        const Vec y = (*q_)[0];
        f.pi_l_coeff = pi_l.matrices.front()(0, 0) / x.dot(s_.g * x);
        f.pi_q_coeff = pi_q.matrices.front()(0, 0) / y.dot(s_.g * y);

        Lemma0Result lemma = lemma0_check(contexts_, s_, *l_, tol_);
        f.lemma_residual = lemma.residual;
        f.same_class_when_h_zero = lemma.corollary1;
        f.h_zero_when_both_flat = lemma.corollary2;
        bound("foliation.pi_difference_identity", lemma.residual);
        flag("foliation.corollaries", lemma.corollary1 && lemma.corollary2);

        if (kmu_space() && f.source == "eigenspaces") {
            const double kappa = report_.curvature.kappa;
            const double mu = *report_.curvature.mu;
            auto [cp, cm] = closed_form_invariants(kappa, mu, tol_);
            f.closed_form_l = cp;
            f.closed_form_q = cm;
            double closed = 0.0;
            for (std::size_t c = 0; c < contexts_.size(); ++c) {
                const Mat gl = l_->vectors.transpose() * s_.g * l_->vectors;
                const Mat gq = q_->vectors.transpose() * s_.g * q_->vectors;
                closed = std::max(closed, max_abs(pi_l.matrices[c] - cp * gl));
                closed = std::max(closed, max_abs(pi_q.matrices[c] - cm * gq));
            }
            bound("foliation.closed_form_coefficients", closed);

            FlatnessConditions fc = flatness_conditions(kappa, mu, tol_);
            f.f_lambda = fc.f_lambda_value;
            f.f_minus_lambda = fc.f_minus_value;
            bool agree = fc.f_lambda_flat == (cl.type == FoliationType::Flat) &&
                         fc.f_minus_flat == (cq.type == FoliationType::Flat);
            flag("foliation.flatness_conditions", agree);

            PangForm pi_phi_l = pang_invariant(contexts_, s_, DistributionBasis{s_.phi * l_->vectors, "phiL"}, tol_);
            try {
                BoeckxResult br = boeckx_invariant(pi_l, pi_phi_l, s_, *l_, kappa, mu, tol_);
                f.ratio = br.ratio;
                f.boeckx_im = br.boeckx_im;
                bound("foliation.ratio_equals_boeckx_invariant",
                      std::max(std::abs(br.ratio - br.boeckx_im), br.ratio_spread));
            } catch (const Error& e) {
                check("foliation.ratio_equals_boeckx_invariant", VerdictState::Fail, 0.0, e.what());
            }
            MuRecovery mr = recover_mu(pi_l, report_.curvature.lambda, s_, *l_);
            f.mu_recovered = mr.mu_recovered;
            f.paper_eq13_value = mr.paper_eq13_value;
            bound("foliation.mu_recovery", std::max(std::abs(mr.mu_recovered - mu), mr.spread));
        } else {
            std::string reason = kmu_space() ? "pair is not the eigenspace pair of h" : "no (kappa, mu) constants with kappa < 1";
            for (const char* name : {"foliation.closed_form_coefficients", "foliation.flatness_conditions",
                                     "foliation.ratio_equals_boeckx_invariant", "foliation.mu_recovery"}) {
                skip(name, reason);
            }
        }
        report_.foliation = std::move(f);
    }

    void bileg() {
        if (!l_) {
            skip("bileg.connection", "no bi-Legendrian pair");
            return;
        }
        try {
            frame_ = adapted_frame(model_, s_, *l_, *q_, std::nullopt, tol_);
        } catch (const Error& e) {
            check("bileg.connection", VerdictState::Fail, 0.0, e.what());
            return;
        }
        BilegSection b;
        const std::vector<PointContext> actx = make_contexts(frame_->model, tol_);
        const ContactMetricStructure& as = frame_->structure;
        auto bump = [](std::map<std::string, double>& m, const std::string& key, double v) {
            m[key] = std::max(m[key], v);
        };
        double lc_relation = 0.0;
        for (const PointContext& ctx : actx) {
            BiLegConnection bar = bileg_connection(ctx, *frame_);
            for (const auto& [k, v] : check_axioms(ctx, bar.connection, *frame_)) bump(b.axioms, k, v);
            bump(b.parallel, "phi", check_parallel(ctx, bar.connection, as, Tensor::Phi));
            bump(b.parallel, "h", check_parallel(ctx, bar.connection, as, Tensor::H));
            bump(b.parallel, "g", check_parallel(ctx, bar.connection, as, Tensor::G));
            bump(b.parallel, "eta", check_parallel(ctx, bar.connection, as, Tensor::Eta));
            bump(b.parallel, "d_eta", check_parallel(ctx, bar.connection, as, Tensor::DEta));
            lc_relation = std::max(lc_relation, levi_civita_relation(bar.connection, levi_civita(ctx, as.g), *frame_));
            for (const auto& [k, v] : tanaka_webster(ctx, bar, *frame_).residuals) bump(b.tanaka_webster, k, v);
        }
        bound("bileg.defining_axioms", max_value(b.axioms));
        bound("bileg.parallel_eta", b.parallel["eta"]);

        MetricEquivalence me = metric_equivalence_suite(actx, *frame_, tol_);
        b.nabla_g = me.nabla_g;
        b.nabla_phi = me.nabla_phi;
        b.explicit_formulas = me.explicit_formulas;
        b.totally_geodesic = me.totally_geodesic;
        b.equivalence_consistent = me.consistent;
        flag("bileg.metric_equivalence", me.consistent,
             std::string("nabla g ") + (me.nabla_g ? "1" : "0") + ", nabla phi " + (me.nabla_phi ? "1" : "0") +
                 ", explicit " + (me.explicit_formulas ? "1" : "0") + ", totally geodesic " +
                 (me.totally_geodesic ? "1" : "0"));

        const bool kmu = kmu_space() || report_.curvature.sasakian;
        if (kmu) {
            b.levi_civita_relation = lc_relation;
            bound("bileg.parallel_phi_h_g",
                  std::max({b.parallel["phi"], b.parallel["h"], b.parallel["g"]}));
            bound("bileg.levi_civita_relation", lc_relation);
            bound("bileg.tanaka_webster", max_value(b.tanaka_webster));
        } else {
            for (const char* name : {"bileg.parallel_phi_h_g", "bileg.levi_civita_relation", "bileg.tanaka_webster"}) {
                skip(name, "no (kappa, mu) constants");
            }
        }

        try {
            TheoremReport tr = theorem_main_suite(model_, s_, tol_);
            b.theorem = tr.verdict;
            b.theorem_reason = tr.reason;
            b.theorem_conditions = tr.conditions;
            check("bileg.connection_characterization", tr.verdict, 0.0, tr.reason);
        } catch (const Error& e) {
            b.theorem = VerdictState::Fail;
            b.theorem_reason = e.what();
            check("bileg.connection_characterization", VerdictState::Fail, 0.0, e.what());
        }
        report_.bileg = std::move(b);
    }

    void deformations() {
        const CurvatureSection& c = report_.curvature;
        for (double a : deformations_) {
            DeformationEntry d;
            d.a = a;
            const ContactMetricStructure t = deform(s_, a);
            const std::string tag = "deformation[" + num(a) + "].";
            std::vector<CurvatureField> r;
            std::vector<EndoField> h;
            for (const PointContext& ctx : contexts_) {
                PointCurvature pc = point_curvature(ctx, t);
                r.push_back(std::move(pc.riemann));
                h.push_back(std::move(pc.h));
            }
            KappaMuReport km = fit_kappa_mu(r, h, t, tol_);
            if (km.residual <= tol_ && km.spread <= tol_) {
                d.kappa = km.kappa;
                d.mu = km.mu;
            }
            if (c.nullity) {
                d.expected_kappa = (c.kappa + a * a - 1.0) / (a * a);
                if (c.mu) d.expected_mu = (*c.mu + 2.0 * a - 2.0) / a;
                double err = d.kappa ? std::abs(*d.kappa - *d.expected_kappa) : INFINITY;
                if (d.expected_mu) err = std::max(err, d.mu ? std::abs(*d.mu - *d.expected_mu) : INFINITY);
                if (std::isfinite(err)) {
                    bound(tag + "extraction", err);
                } else {
                    check(tag + "extraction", VerdictState::Fail, 0.0, "deformed structure is not of nullity type");
                }
            } else {
                skip(tag + "extraction", "no (kappa, mu) constants");
            }
            if (l_) {
                d.pi_residual = pi_deformation_invariance(contexts_, s_, a, *l_, tol_);
                bound(tag + "pi_invariance", d.pi_residual);
                if (frame_) {
                    d.connection_residual = connection_deformation_invariance(model_, s_, a, *l_, *q_, tol_);
                    bound(tag + "connection_invariance", d.connection_residual);
                }
            }
            if (d.kappa && d.mu && *d.kappa < 1.0 - tol_ && report_.foliation && report_.foliation->boeckx_im) {
                d.boeckx_im = (1.0 - *d.mu / 2.0) / std::sqrt(1.0 - *d.kappa);
                bound(tag + "boeckx_invariance", std::abs(*d.boeckx_im - *report_.foliation->boeckx_im));
            } else {
                skip(tag + "boeckx_invariance", "no Boeckx invariant");
            }
            report_.deformations.push_back(std::move(d));
        }
    }

    const ManifoldModel& model_;
    double tol_;
    std::vector<double> deformations_;
    AnalysisReport report_;
    ContactMetricStructure s_;
    bool valid_ = true;
    std::vector<PointContext> contexts_;
    std::vector<EndoField> hs_;
    std::vector<Connection> nablas_;
    std::vector<CurvatureField> curvatures_;
    std::optional<DistributionBasis> l_, q_;
    std::string pair_reason_;
    std::optional<AdaptedFrame> frame_;
};

void line(std::ostringstream& os, const std::string& key, const std::string& value) {
    os << "  " << key << ": " << value << "\n";
}

std::string opt(const std::optional<double>& v, const char* absent = "absent") { return v ? num(*v) : absent; }

std::string matrix_text(const Matrix& m) {
    std::string out = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += i ? "; " : "";
        for (std::size_t j = 0; j < m[i].size(); ++j) out += (j ? " " : "") + num(m[i][j]);
    }
    return out + "]";
}

}  // namespace

bool AnalysisReport::failed() const {
    return std::any_of(checks.begin(), checks.end(), [](const Check& c) { return c.state == VerdictState::Fail; });
}

AnalysisReport analyze(const ManifoldModel& model, const AnalysisOptions& options) {
    for (double a : options.deformations) {
        if (!(a > 0.0)) throw Error(ErrorCode::NonPositiveConstant, "deformation constant must be positive, got " + num(a));
    }
    return Pipeline(model, options).run();
}

int exit_code(const AnalysisReport& report) { return report.failed() ? 1 : 0; }

std::string report_to_json(const AnalysisReport& report, int indent) {
    nlohmann::json j = report;
    return j.dump(indent);
}

AnalysisReport report_from_json(std::string_view text) {
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        if (j.value("report_version", 0) != kReportVersion) {
            throw Error(ErrorCode::SchemaError, "unsupported report_version");
        }
        return j.get<AnalysisReport>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed report: ") + e.what());
    }
}

std::string report_to_text(const AnalysisReport& r) {
    std::ostringstream os;
    os << "model " << r.model.name << " (dim " << r.model.dim << ", " << r.model.backend << ", " << r.model.contexts
       << " point" << (r.model.contexts == 1 ? "" : "s") << ")\n";
    os << "tolerance " << num(r.tolerance) << ", seed " << r.seed << "\n";

    os << "contact\n";
    line(os, "contact", r.contact.contact ? "yes" : "no");
    line(os, "d eta - Phi", num(r.contact.deta_phi_residual));
    line(os, "|h|", num(r.contact.h_norm));
    line(os, "K-contact", r.contact.k_contact ? "yes" : "no");

    const CurvatureSection& c = r.curvature;
    os << "curvature\n";
    line(os, "sasakian", c.sasakian ? "yes" : "no");
    line(os, "kappa", num(c.kappa));
    line(os, "mu", opt(c.mu, "indeterminate"));
    line(os, "lambda", num(c.lambda));
    line(os, "nullity residual", num(c.nullity_residual));

    if (r.foliation) {
        const FoliationSection& f = *r.foliation;
        os << "foliations (" << f.source << ")\n";
        line(os, "lambda", num(f.lambda));
        line(os, "Pi on L", matrix_text(f.pi_l) + " " + f.class_l);
        line(os, "Pi on Q", matrix_text(f.pi_q) + " " + f.class_q);
        line(os, "closed form on L, Q", opt(f.closed_form_l) + ", " + opt(f.closed_form_q));
        line(os, "difference identity residual", num(f.lemma_residual));
        line(os, "ratio", opt(f.ratio));
        line(os, "I_M", opt(f.boeckx_im));
        line(os, "mu recovered", opt(f.mu_recovered));
        line(os, "Pi_L(X,X)/(lambda g(X,X))", opt(f.paper_eq13_value));
    }
    if (r.bileg) {
        const BilegSection& b = *r.bileg;
        os << "bi-Legendrian connection\n";
        for (const auto& [k, v] : b.axioms) line(os, k, num(v));
        for (const auto& [k, v] : b.parallel) line(os, "nabla " + k, num(v));
        line(os, "Levi-Civita relation", opt(b.levi_civita_relation));
        line(os, "characterization", std::string(to_string(b.theorem)) + ": " + b.theorem_reason);
        for (const auto& [k, v] : b.tanaka_webster) line(os, "Tanaka-Webster " + k, num(v));
    }
    for (const DeformationEntry& d : r.deformations) {
        os << "deformation a=" << num(d.a) << "\n";
        line(os, "kappa, mu", opt(d.kappa) + ", " + opt(d.mu, "indeterminate"));
        line(os, "expected", opt(d.expected_kappa) + ", " + opt(d.expected_mu));
        line(os, "Pi change", num(d.pi_residual));
        line(os, "connection change", num(d.connection_residual));
    }

    os << "checks\n";
    int failed = 0;
    for (const Check& ch : r.checks) {
        if (ch.state == VerdictState::Fail) ++failed;
        os << "  [" << to_string(ch.state) << "] " << ch.name;
        if (ch.residual != 0.0) os << " (" << num(ch.residual) << ")";
        if (!ch.reason.empty()) os << " - " << ch.reason;
        os << "\n";
    }
    os << (failed ? std::to_string(failed) + " check(s) failed" : std::string("all checks passed")) << "\n";
    return os.str();
}

}  // namespace kmu
