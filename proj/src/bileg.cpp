#include "kmu/bileg.hpp"

#include "kmu/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kmu {

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Vec keep_block(Vec v, int begin, int end) {
    for (int k = 0; k < v.size(); ++k) {
        if (k < begin || k >= end) v[k] = 0.0;
    }
    return v;
}

// Frame derivative e_i(d eta) for constant-component eta.
Mat d_eta_derivative(const PointContext& ctx, const ContactMetricStructure& s, int i) {
    const int n = s.dim();
    Mat out = Mat::Zero(n, n);
    if (ctx.brackets.position_independent()) return out;
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) out(j, k) = -0.5 * s.eta.dot(ctx.brackets.derivative(i, j, k));
    }
    return out;
}

Vec out_of_span(const Vec& v, const Mat& b, const Mat& g) {
    Mat gram = b.transpose() * g * b;
    return v - b * gram.ldlt().solve(b.transpose() * g * v);
}

}  // namespace

std::string_view to_string(VerdictState v) {
    switch (v) {
        case VerdictState::Pass: return "pass";
        case VerdictState::Fail: return "fail";
        case VerdictState::NotApplicable: return "not-applicable";
    }
    return "?";
}

AdaptedFrame adapted_frame(const ManifoldModel& model, const ContactMetricStructure& s, const DistributionBasis& l,
                           const DistributionBasis& q, const std::optional<Vec>& reeb, double tol) {
    const int dim = s.dim();
    const int n = (dim - 1) / 2;
    if (l.size() != n || q.size() != n) {
        throw Error(ErrorCode::NotComplementary, "L and Q must each have " + std::to_string(n) + " vectors");
    }
    Mat basis(dim, dim);
    basis << l.vectors, q.vectors, reeb.value_or(s.xi);
    Eigen::FullPivLU<Mat> lu(basis);
    lu.setThreshold(tol);
    if (lu.rank() != dim) {
        throw Error(ErrorCode::NotComplementary, "L, Q and R xi do not span the tangent space");
    }
    if (model.backend == Backend::Chart) {
        for (int a = 0; a < dim; ++a) {
            if ((basis.col(a).array().abs() > tol).count() != 1) {
                throw Error(ErrorCode::ChartFrameNotAdapted,
                            "adapted frame vector " + std::to_string(a) + " is not a multiple of a frame field");
            }
        }
    }

    ManifoldModel source = model;
    source.structure = s;
    AdaptedFrame out;
    out.model = change_frame(source, basis);
    out.structure = *out.model.structure;
    out.basis = basis;
    out.n = n;
    out.model.blocks = AdaptedBlocks{{}, {}, 2 * n};
    for (int a = 0; a < n; ++a) {
        out.model.blocks->L.push_back(a);
        out.model.blocks->Q.push_back(n + a);
    }
    out.projectors.L = Mat::Zero(dim, dim);
    out.projectors.Q = Mat::Zero(dim, dim);
    out.projectors.xi = Mat::Zero(dim, dim);
    for (int a = 0; a < n; ++a) {
        out.projectors.L(a, a) = 1.0;
        out.projectors.Q(n + a, n + a) = 1.0;
    }
    out.projectors.xi(2 * n, 2 * n) = 1.0;
    return out;
}

AdaptedFrame adapted_frame(const ManifoldModel& model, const ContactMetricStructure& s, const AdaptedBlocks& blocks,
                           double tol) {
    const int dim = s.dim();
    auto unit_basis = [&](const std::vector<int>& idx, const char* label) {
        Mat m(dim, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = Vec::Unit(dim, idx[k]);
        return DistributionBasis{m, label};
    };
    if (blocks.xi < 0 || blocks.xi >= dim) throw Error(ErrorCode::NotComplementary, "xi block index out of range");
    Vec reeb = Vec::Unit(dim, blocks.xi);
    if ((s.xi - s.xi[blocks.xi] * reeb).cwiseAbs().maxCoeff() > tol || std::abs(s.xi[blocks.xi]) <= tol) {
        throw Error(ErrorCode::ChartFrameNotAdapted, "declared xi block is not the Reeb direction");
    }
    return adapted_frame(model, s, unit_basis(blocks.L, "L"), unit_basis(blocks.Q, "Q"), reeb, tol);
}

FrameVector h_operator(const PointContext& ctx, const ContactMetricStructure& s, const Vec& v, const Vec& w) {
    const Mat basis = contact_basis(s);
    const TwoForm deta = d_eta(ctx, s);
    const Eigen::Index k = basis.cols();
    Mat system = basis.transpose() * deta.transpose() * basis;  // (z, p) = d eta(B_p, B_z)
    Vec rhs(k);
    for (Eigen::Index z = 0; z < k; ++z) {
        const Vec bz = basis.col(z);
        double lie = -0.5 * s.eta.dot(ctx.brackets.derivative_of(v, w, bz));
        rhs[z] = lie - w.dot(deta * ctx.brackets.of(v, bz));
    }
    Eigen::PartialPivLU<Mat> lu(system);
    if (!(std::abs(lu.determinant()) > 1e-12)) {
        throw Error(ErrorCode::SingularRestriction, "d eta is degenerate on D");
    }
    return basis * lu.solve(rhs);
}

BiLegConnection bileg_connection(const PointContext& ctx, const AdaptedFrame& frame) {
    const ContactMetricStructure& s = frame.structure;
    const int dim = s.dim();
    const int n = frame.n;
    BiLegConnection out;
    out.n = n;
    out.connection.coeffs.assign(dim, Mat::Zero(dim, dim));
    for (int i = 0; i < dim; ++i) {
        const Vec ei = Vec::Unit(dim, i);
        for (int j = 0; j < 2 * n; ++j) {
            const Vec ej = Vec::Unit(dim, j);
            const bool same_block = (frame.in_l(i) && frame.in_l(j)) || (frame.in_q(i) && frame.in_q(j));
            Vec v = same_block ? h_operator(ctx, s, ei, ej) : ctx.brackets(i, j);
            out.connection.coeffs[i].col(j) = frame.in_l(j) ? keep_block(v, 0, n) : keep_block(v, n, 2 * n);
        }
    }
    return out;
}

TorsionField torsion(const PointContext& ctx, const Connection& connection) {
    const int dim = connection.dim();
    TorsionField t;
    t.dim = dim;
    t.values.resize(static_cast<std::size_t>(dim * dim));
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            t.values[static_cast<std::size_t>(i * dim + j)] = connection(i, j) - connection(j, i) - ctx.brackets(i, j);
        }
    }
    return t;
}

std::map<std::string, double> check_axioms(const PointContext& ctx, const Connection& connection,
                                           const AdaptedFrame& frame) {
    const ContactMetricStructure& s = frame.structure;
    const int dim = s.dim();
    const int n = frame.n;
    const TwoForm deta = d_eta(ctx, s);
    const TorsionField t = torsion(ctx, connection);
    auto block_of = [&](int j) { return frame.in_l(j) ? std::pair{0, n} : frame.in_q(j) ? std::pair{n, 2 * n}
                                                                                         : std::pair{2 * n, dim}; };

    std::map<std::string, double> r{{"block_preservation", 0.0}, {"parallel_deta", 0.0}, {"parallel_eta", 0.0},
                                    {"parallel_xi", 0.0},        {"torsion_LQ", 0.0},    {"torsion_xi", 0.0},
                                    {"torsion_LL", 0.0},         {"torsion_QQ", 0.0}};
    auto bump = [&](const char* key, double v) { r[key] = std::max(r[key], v); };

    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            auto [b, e] = block_of(j);
            Vec v = connection(i, j);
            bump("block_preservation", (v - keep_block(v, b, e)).cwiseAbs().maxCoeff());
        }
        bump("parallel_deta", max_abs(d_eta_derivative(ctx, s, i) + connection.covariant_bilinear(i, deta)));
        bump("parallel_eta", connection.covariant_form(i, s.eta).cwiseAbs().maxCoeff());
        bump("parallel_xi", (connection.coeffs[i] * s.xi).cwiseAbs().maxCoeff());

        // T(V, xi) = [xi, V_L]_Q + [xi, V_Q]_L
        Vec t_xi = Vec::Zero(dim);
        for (int k = 0; k < dim; ++k) t_xi += s.xi[k] * t(i, k);
        Vec ei = Vec::Unit(dim, i);
        Vec expected = Vec::Zero(dim);
        if (frame.in_l(i)) expected = keep_block(ctx.brackets.of(s.xi, ei), n, 2 * n);
        if (frame.in_q(i)) expected = keep_block(ctx.brackets.of(s.xi, ei), 0, n);
        bump("torsion_xi", (t_xi - expected).cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < 2 * n; ++i) {
        for (int j = 0; j < 2 * n; ++j) {
            if (frame.in_l(i) && frame.in_q(j)) {
                bump("torsion_LQ", (t(i, j) - 2.0 * deta(i, j) * s.xi).cwiseAbs().maxCoeff());
            } else if (frame.in_l(i) && frame.in_l(j)) {
                bump("torsion_LL", (t(i, j) + keep_block(ctx.brackets(i, j), n, 2 * n)).cwiseAbs().maxCoeff());
            } else if (frame.in_q(i) && frame.in_q(j)) {
                bump("torsion_QQ", (t(i, j) + keep_block(ctx.brackets(i, j), 0, n)).cwiseAbs().maxCoeff());
            }
        }
    }
    return r;
}

double check_parallel(const PointContext& ctx, const Connection& connection, const ContactMetricStructure& s,
                      Tensor tensor) {
    const int dim = s.dim();
    const Mat zero = Mat::Zero(dim, dim);
    const EndoField h = tensor == Tensor::H ? compute_h(ctx, s) : zero;
    const TwoForm deta = tensor == Tensor::DEta ? d_eta(ctx, s) : zero;
    double worst = 0.0;
    for (int i = 0; i < dim; ++i) {
        double v = 0.0;
        switch (tensor) {
            case Tensor::Phi: v = max_abs(connection.covariant_endo(i, s.phi, zero)); break;
            case Tensor::H: v = max_abs(connection.covariant_endo(i, h, compute_h_derivative(ctx, s, i))); break;
            case Tensor::G: v = max_abs(connection.covariant_bilinear(i, s.g)); break;
            case Tensor::Eta: v = connection.covariant_form(i, s.eta).cwiseAbs().maxCoeff(); break;
            case Tensor::DEta:
                v = max_abs(d_eta_derivative(ctx, s, i) + connection.covariant_bilinear(i, deta));
                break;
        }
        worst = std::max(worst, v);
    }
    return worst;
}

double levi_civita_relation(const Connection& bileg, const Connection& levi_civita, const AdaptedFrame& frame) {
    const ContactMetricStructure& s = frame.structure;
    double worst = 0.0;
    for (int i = 0; i < 2 * frame.n; ++i) {
        for (int j = 0; j < 2 * frame.n; ++j) {
            Vec lc = levi_civita(i, j);
            Vec diff = bileg(i, j) - lc + s.eta.dot(lc) * s.xi;
            worst = std::max(worst, diff.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

MetricEquivalence metric_equivalence_suite(std::span<const PointContext> contexts, const AdaptedFrame& frame,
                                           double tol) {
    const ContactMetricStructure& s = frame.structure;
    const int dim = s.dim();
    const int n = frame.n;
    const Mat l_basis = frame.projectors.L.leftCols(n);
    const Mat q_basis = frame.projectors.Q.middleCols(n, n);
    MetricEquivalence out;
    for (const PointContext& ctx : contexts) {
        const Connection bar = bileg_connection(ctx, frame).connection;
        const Connection lc = levi_civita(ctx, s.g);
        const EndoField h = compute_h(ctx, s);
        out.nabla_g_residual = std::max(out.nabla_g_residual, check_parallel(ctx, bar, s, Tensor::G));
        out.nabla_phi_residual = std::max(out.nabla_phi_residual, check_parallel(ctx, bar, s, Tensor::Phi));

        for (int i = 0; i < 2 * n; ++i) {
            const bool l_block = frame.in_l(i);
            const int begin = l_block ? 0 : n;
            const Vec ei = Vec::Unit(dim, i);
            Vec hv = h.col(i);
            out.explicit_residual = std::max(out.explicit_residual, (hv - keep_block(hv, begin, begin + n)).cwiseAbs().maxCoeff());
            for (int j = begin; j < begin + n; ++j) {
                Vec ej = Vec::Unit(dim, j);
                Vec formula = keep_block(s.phi * ctx.brackets.of(ei, s.phi * ej), begin, begin + n);
                out.explicit_residual = std::max(out.explicit_residual, (bar(i, j) - formula).cwiseAbs().maxCoeff());
                Vec normal = out_of_span(lc(i, j), l_block ? l_basis : q_basis, s.g);
                out.geodesic_residual = std::max(out.geodesic_residual, normal.cwiseAbs().maxCoeff());
            }
        }
    }
    out.nabla_g = out.nabla_g_residual <= tol;
    out.nabla_phi = out.nabla_phi_residual <= tol;
    out.explicit_formulas = out.explicit_residual <= tol;
    out.totally_geodesic = out.geodesic_residual <= tol;
    out.consistent = out.nabla_g == out.nabla_phi && out.nabla_phi == out.explicit_formulas &&
                     out.explicit_formulas == out.totally_geodesic;
    return out;
}

TheoremReport theorem_main_suite(const ManifoldModel& model, const ContactMetricStructure& s, double tol) {
    TheoremReport rep;
    const std::vector<PointContext> contexts = make_contexts(model, tol);
    std::vector<EndoField> hs;
    std::vector<CurvatureField> curv;
    for (const PointContext& ctx : contexts) {
        PointCurvature pc = point_curvature(ctx, s);
        hs.push_back(std::move(pc.h));
        curv.push_back(std::move(pc.riemann));
    }
    if (is_k_contact(hs, tol)) {
        rep.verdict = VerdictState::NotApplicable;
        rep.reason = "hypothesis xi non-Killing violated: xi is Killing (K-contact); theorem not applicable";
        return rep;
    }

    rep.kappa_mu = fit_kappa_mu(curv, hs, s, tol);
    rep.nullity_holds = rep.kappa_mu->residual <= tol && rep.kappa_mu->spread <= tol;

    std::optional<Eigendistributions> ed;
    try {
        ed = eigendistributions(hs, s, tol);
    } catch (const Error& e) {
        rep.reason = std::string("no orthogonal conjugate Legendrian pair from h: ") + e.what();
    }

    if (ed) {
        const AdaptedFrame frame = adapted_frame(model, s, ed->L, ed->Q, std::nullopt, tol);
        const ContactMetricStructure& as = frame.structure;
        const int dim = as.dim();
        const std::vector<PointContext> actx = make_contexts(frame.model, tol);
        const TwoForm phi_form = fundamental_form(as);
        std::map<std::string, double>& c = rep.conditions;
        for (const char* key : {"block_preservation", "parallel_eta", "parallel_deta", "parallel_g", "parallel_h",
                                "torsion_D", "torsion_xi"}) {
            c[key] = 0.0;
        }
        auto bump = [&](const char* key, double v) { c[key] = std::max(c[key], v); };
        for (const PointContext& ctx : actx) {
            const Connection bar = bileg_connection(ctx, frame).connection;
            auto axioms = check_axioms(ctx, bar, frame);
            bump("block_preservation", axioms["block_preservation"]);
            bump("torsion_xi", axioms["torsion_xi"]);
            bump("parallel_eta", check_parallel(ctx, bar, as, Tensor::Eta));
            bump("parallel_deta", check_parallel(ctx, bar, as, Tensor::DEta));
            bump("parallel_g", check_parallel(ctx, bar, as, Tensor::G));
            bump("parallel_h", check_parallel(ctx, bar, as, Tensor::H));
            const TorsionField t = torsion(ctx, bar);
            for (int i = 0; i < 2 * frame.n; ++i) {
                for (int j = 0; j < 2 * frame.n; ++j) {
                    bump("torsion_D", (t(i, j) - 2.0 * phi_form(i, j) * as.xi).cwiseAbs().maxCoeff());
                }
            }
        }
        rep.conditions_hold = std::all_of(c.begin(), c.end(), [&](const auto& kv) { return kv.second <= tol; });

        std::vector<TwoForm> deta;
        for (const PointContext& ctx : contexts) deta.push_back(d_eta(ctx, s));
        rep.matches_eigenspaces = legendrian_check(ed->L, deta, s, tol) && legendrian_check(ed->Q, deta, s, tol) &&
                                  integrability_check(contexts, ed->L, tol) &&
                                  integrability_check(contexts, ed->Q, tol);
        (void)dim;
    }

    if (rep.conditions_hold && !rep.nullity_holds) {
        std::ostringstream os;
        os << "connection conditions hold but the curvature is not of nullity type (residual "
           << rep.kappa_mu->residual << ")";
        throw Error(ErrorCode::NotKappaMu, os.str());
    }
    if (rep.conditions_hold && rep.nullity_holds) {
        rep.verdict = rep.matches_eigenspaces ? VerdictState::Pass : VerdictState::Fail;
        rep.reason = rep.matches_eigenspaces ? "connection conditions and nullity both hold"
                                             : "bi-Legendrian pair differs from the eigenspaces of h";
    } else if (!rep.conditions_hold && !rep.nullity_holds) {
        rep.verdict = VerdictState::Pass;
        if (!rep.reason.empty()) rep.reason += "; ";
        rep.reason += "connection conditions and nullity both fail (consistent)";
    } else {
        rep.verdict = VerdictState::Fail;
        rep.reason = "nullity holds but the connection conditions fail";
    }
    return rep;
}

TanakaWebster tanaka_webster(const PointContext& ctx, const BiLegConnection& bileg, const AdaptedFrame& frame) {
    const ContactMetricStructure& s = frame.structure;
    const int dim = s.dim();
    const int last = frame.xi_index();
    TanakaWebster tw;
    tw.connection = bileg.connection;
    const EndoField h = compute_h(ctx, s);
    Mat ad_xi(dim, dim);
    for (int j = 0; j < dim; ++j) ad_xi.col(j) = ctx.brackets.of(s.xi, Vec::Unit(dim, j));
    tw.connection.coeffs[last] = s.eta[last] * (-s.phi * h + ad_xi);

    const TwoForm phi_form = fundamental_form(s);
    const Connection& c = tw.connection;
    std::map<std::string, double>& r = tw.residuals;
    r = {{"nabla_g", 0.0}, {"nabla_phi", 0.0}, {"nabla_xi", 0.0}, {"nabla_eta", 0.0}, {"torsion_D", 0.0}};
    const Mat zero = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        r["nabla_g"] = std::max(r["nabla_g"], max_abs(c.covariant_bilinear(i, s.g)));
        r["nabla_phi"] = std::max(r["nabla_phi"], max_abs(c.covariant_endo(i, s.phi, zero)));
        r["nabla_xi"] = std::max(r["nabla_xi"], (c.coeffs[i] * s.xi).cwiseAbs().maxCoeff());
        r["nabla_eta"] = std::max(r["nabla_eta"], c.covariant_form(i, s.eta).cwiseAbs().maxCoeff());
    }
    const TorsionField t = torsion(ctx, c);
    for (int i = 0; i < 2 * frame.n; ++i) {
        for (int j = 0; j < 2 * frame.n; ++j) {
            r["torsion_D"] = std::max(r["torsion_D"], (t(i, j) - 2.0 * phi_form(i, j) * s.xi).cwiseAbs().maxCoeff());
        }
    }
    return tw;
}

double connection_deformation_invariance(const ManifoldModel& model, const ContactMetricStructure& s, double a,
                                         const DistributionBasis& l, const DistributionBasis& q, double tol) {
    const AdaptedFrame before = adapted_frame(model, s, l, q, s.xi, tol);
    const AdaptedFrame after = adapted_frame(model, deform(s, a), l, q, s.xi, tol);
    const std::vector<PointContext> contexts = make_contexts(before.model, tol);
    double worst = 0.0;
    for (const PointContext& ctx : contexts) {
        const Connection c0 = bileg_connection(ctx, before).connection;
        const Connection c1 = bileg_connection(ctx, after).connection;
        for (int i = 0; i < c0.dim(); ++i) worst = std::max(worst, max_abs(c0.coeffs[i] - c1.coeffs[i]));
    }
    return worst;
}

}  // namespace kmu
