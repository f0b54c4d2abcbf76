#include "kmu/foliation.hpp"

#include "kmu/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kmu {

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

int half_dim(const ContactMetricStructure& s) { return (s.dim() - 1) / 2; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

int numeric_rank(const Mat& m, double tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& sv = svd.singularValues();
    return static_cast<int>((sv.array() >= tol).count());
}

// Component of v g-orthogonal to span(B).
Vec out_of_span(const Vec& v, const Mat& b, const Mat& g) {
    Mat gram = b.transpose() * g * b;
    Vec coeffs = gram.ldlt().solve(b.transpose() * g * v);
    return v - b * coeffs;
}

}  // namespace

std::string_view to_string(FoliationType t) {
    switch (t) {
        case FoliationType::Flat: return "Flat";
        case FoliationType::Degenerate: return "Degenerate";
        case FoliationType::NonDegenerate: return "NonDegenerate";
    }
    return "?";
}

Eigendistributions eigendistributions(std::span<const EndoField> hs, const ContactMetricStructure& s, double tol) {
    const int n = half_dim(s);
    HSpectrum spec = h_spectrum(hs.front(), s);
    const Vec& ev = spec.eigenvalues;
    double lambda = (ev.tail(n).sum() - ev.head(n).sum()) / (2.0 * n);
    if (!(lambda >= tol)) {
        throw Error(ErrorCode::NoSplitting, "h vanishes on D (lambda = " + fmt(lambda) + ")");
    }
    for (int k = 0; k < 2 * n; ++k) {
        double target = k < n ? -lambda : lambda;
        if (std::abs(ev[k] - target) > tol) {
            throw Error(ErrorCode::SpectrumNotPaired,
                        "eigenvalue " + fmt(ev[k]) + " of h on D does not match " + fmt(target));
        }
    }

    Eigendistributions out;
    out.lambda = lambda;
    Mat l = spec.eigenvectors.rightCols(n);
    for (int a = 0; a < n; ++a) {
        Eigen::Index idx;
        l.col(a).cwiseAbs().maxCoeff(&idx);
        if (l(idx, a) < 0.0) l.col(a) = -l.col(a);
    }
    out.L = {l, "L"};
    out.Q = {s.phi * l, "Q"};

    for (std::size_t c = 1; c < hs.size(); ++c) {
        double dev = max_abs(hs[c] * out.L.vectors - lambda * out.L.vectors);
        dev = std::max(dev, max_abs(hs[c] * out.Q.vectors + lambda * out.Q.vectors));
        if (dev > tol) {
            throw Error(ErrorCode::NonConstantAcrossPoints,
                        "eigenbasis of h moves between sample points (deviation " + fmt(dev) + " at context " +
                            std::to_string(c) + ")");
        }
    }
    return out;
}

Eigendistributions eigendistributions(std::span<const PointContext> contexts, const ContactMetricStructure& s,
                                      double tol) {
    std::vector<EndoField> hs;
    hs.reserve(contexts.size());
    for (const PointContext& ctx : contexts) hs.push_back(compute_h(ctx, s));
    return eigendistributions(hs, s, tol);
}

bool legendrian_check(const DistributionBasis& b, std::span<const TwoForm> deta, const ContactMetricStructure& s,
                      double tol) {
    if (b.size() != half_dim(s)) return false;
    if (max_abs(s.eta * b.vectors) > tol) return false;
    return std::all_of(deta.begin(), deta.end(), [&](const TwoForm& w) {
        return max_abs(b.vectors.transpose() * w * b.vectors) <= tol;
    });
}

double integrability_residual(std::span<const PointContext> contexts, const DistributionBasis& b) {
    double worst = 0.0;
    Eigen::ColPivHouseholderQR<Mat> qr(b.vectors);
    for (const PointContext& ctx : contexts) {
        for (int a = 0; a < b.size(); ++a) {
            for (int c = a + 1; c < b.size(); ++c) {
                Vec w = ctx.brackets.of(b[a], b[c]);
                Vec fit = b.vectors * qr.solve(w);
                worst = std::max(worst, (w - fit).cwiseAbs().maxCoeff());
            }
        }
    }
    return worst;
}

bool integrability_check(std::span<const PointContext> contexts, const DistributionBasis& b, double tol) {
    return integrability_residual(contexts, b) <= tol;
}

DistributionBasis conjugate_distribution(const DistributionBasis& b, const ContactMetricStructure& s, double tol) {
    DistributionBasis q{s.phi * b.vectors, b.label == "L" ? "Q" : "phi(" + b.label + ")"};
    Mat all(s.dim(), 2 * b.size() + 1);
    all << b.vectors, q.vectors, s.xi;
    if (numeric_rank(all, tol) != s.dim()) {
        throw Error(ErrorCode::NotComplementary, "B + phi B + R xi does not span the tangent space");
    }
    return q;
}

Mat pang_by_definition(const PointContext& ctx, const ContactMetricStructure& s, const DistributionBasis& b) {
    const int k = b.size();
    Mat out(k, k);
    for (int a = 0; a < k; ++a) {
        Vec x = b[a];
        Vec w = ctx.brackets.of(x, s.xi);
        for (int c = 0; c < k; ++c) {
            Vec xp = b[c];
            Vec outer = ctx.brackets.of(xp, w) + ctx.brackets.derivative_of(xp, x, s.xi);
            out(a, c) = -s.eta.dot(outer);
        }
    }
    return out;
}

Mat pang_by_metric(const PointContext& ctx, const ContactMetricStructure& s, const DistributionBasis& b) {
    const int k = b.size();
    Mat out(k, k);
    for (int a = 0; a < k; ++a) {
        Vec w = ctx.brackets.of(s.xi, b[a]);
        for (int c = 0; c < k; ++c) out(a, c) = 2.0 * w.dot(s.g * (s.phi * b[c]));
    }
    return out;
}

PangForm pang_invariant(std::span<const PointContext> contexts, const ContactMetricStructure& s,
                        const DistributionBasis& b, double tol) {
    PangForm pi;
    for (const PointContext& ctx : contexts) {
        Mat def = pang_by_definition(ctx, s, b);
        Mat met = pang_by_metric(ctx, s, b);
        pi.formula_residual = std::max(pi.formula_residual, max_abs(def - met));
        pi.matrices.push_back(met);
    }
    if (!(pi.formula_residual <= tol)) {
        throw Error(ErrorCode::FormulaMismatch,
                    "the two expressions of Pi differ by " + fmt(pi.formula_residual));
    }
    return pi;
}

FoliationClass classify(const PangForm& pi, double tol) {
    FoliationClass out;
    for (const Mat& m : pi.matrices) {
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
        int rank = static_cast<int>((es.eigenvalues().array().abs() >= tol).count());
        out.ranks.push_back(rank);
        FoliationType t = rank == 0 ? FoliationType::Flat
                          : rank == m.rows() ? FoliationType::NonDegenerate
                                             : FoliationType::Degenerate;
        out.per_context.push_back(t);
    }
    out.type = out.per_context.empty() ? FoliationType::Degenerate : out.per_context.front();
    for (std::size_t c = 1; c < out.per_context.size(); ++c) {
        if (out.per_context[c] != out.type) {
            out.consistent_across_contexts = false;
            out.diagnostics = "class changes between context 0 (" + std::string(to_string(out.type)) +
                              ") and context " + std::to_string(c) + " (" +
                              std::string(to_string(out.per_context[c])) + ")";
            out.type = FoliationType::Degenerate;
            break;
        }
    }
    return out;
}

FoliationClass classify(const PangForm& pi, std::span<const PointContext> contexts, const ContactMetricStructure& s,
                        const DistributionBasis& b, double tol) {
    FoliationClass out = classify(pi, tol);
    const int k = b.size();
    for (std::size_t c = 0; c < contexts.size(); ++c) {
        Mat transverse(s.dim(), k);
        for (int a = 0; a < k; ++a) {
            transverse.col(a) = out_of_span(contexts[c].brackets.of(s.xi, b[a]), b.vectors, s.g);
        }
        int rank = numeric_rank(transverse, tol);
        if (c == 0) out.bracket_rank = rank;
        bool agrees = (rank == 0) == (out.per_context[c] == FoliationType::Flat) &&
                      (rank == k) == (out.per_context[c] == FoliationType::NonDegenerate);
        if (!agrees) {
            out.bracket_criterion_agrees = false;
            if (!out.diagnostics.empty()) out.diagnostics += "; ";
            out.diagnostics += "bracket criterion disagrees at context " + std::to_string(c);
        }
    }
    return out;
}

std::pair<double, double> closed_form_invariants(double kappa, double mu, double tol) {
    if (!(kappa < 1.0 - tol)) {
        throw Error(ErrorCode::SasakianLimit, "closed forms need kappa < 1, got " + fmt(kappa));
    }
    const double lambda = std::sqrt(1.0 - kappa);
    double plus = ((lambda + 1.0) * (lambda + 1.0) - kappa - mu * lambda) / lambda;
    double minus = (-(lambda - 1.0) * (lambda - 1.0) + kappa - mu * lambda) / lambda;
    return {plus, minus};
}

Lemma0Result lemma0_check(std::span<const PointContext> contexts, const ContactMetricStructure& s,
                          const DistributionBasis& l, double tol) {
    Lemma0Result out;
    DistributionBasis q{s.phi * l.vectors, "phiL"};
    PangForm pi_l = pang_invariant(contexts, s, l, tol);
    PangForm pi_q = pang_invariant(contexts, s, q, tol);
    std::vector<EndoField> hs;
    for (std::size_t c = 0; c < contexts.size(); ++c) {
        EndoField h = compute_h(contexts[c], s);
        Mat expected = 4.0 * l.vectors.transpose() * s.g * h * l.vectors;
        out.residual = std::max(out.residual, max_abs(pi_l.matrices[c] - pi_q.matrices[c] - expected));
        hs.push_back(std::move(h));
    }
    FoliationClass cl = classify(pi_l, tol);
    FoliationClass cq = classify(pi_q, tol);
    if (is_k_contact(hs, tol)) out.corollary1 = cl.type == cq.type;
    if (cl.type == FoliationType::Flat && cq.type == FoliationType::Flat) out.corollary2 = is_k_contact(hs, tol);
    return out;
}

BoeckxResult boeckx_invariant(const PangForm& pi_l, const PangForm& pi_q_conjugate, const ContactMetricStructure& s,
                              const DistributionBasis& l, double kappa, double mu, double tol) {
    if (!(kappa < 1.0 - tol)) {
        throw Error(ErrorCode::SasakianLimit, "Boeckx invariant needs kappa < 1, got " + fmt(kappa));
    }
    BoeckxResult out;
    out.boeckx_im = (1.0 - mu / 2.0) / std::sqrt(1.0 - kappa);
    Mat gram = l.vectors.transpose() * s.g * l.vectors;
    bool first = true;
    for (std::size_t c = 0; c < pi_l.matrices.size(); ++c) {
        for (int a = 0; a < l.size(); ++a) {
            for (int b = 0; b < l.size(); ++b) {
                if (std::abs(gram(a, b)) <= tol) continue;
                double pl = pi_l.matrices[c](a, b);
                double pq = pi_q_conjugate.matrices[c](a, b);
                double den = pl - pq;
                if (std::abs(den) <= tol) {
                    throw Error(ErrorCode::ZeroDenominator,
                                "Pi_L(X,X') - Pi_Q(phiX,phiX') vanishes (h = 0 on the pair)");
                }
                double ratio = (pl + pq) / den;
                if (first) {
                    out.ratio = ratio;
                    first = false;
                } else {
                    out.ratio_spread = std::max(out.ratio_spread, std::abs(ratio - out.ratio));
                }
            }
        }
    }
    if (first) throw Error(ErrorCode::ZeroDenominator, "no basis pair with g(X, X') != 0");
    return out;
}

MuRecovery recover_mu(const PangForm& pi_l, double lambda, const ContactMetricStructure& s,
                      const DistributionBasis& l) {
    MuRecovery out;
    bool first = true;
    for (const Mat& m : pi_l.matrices) {
        for (int a = 0; a < l.size(); ++a) {
            double gxx = l[a].dot(s.g * l[a]);
            double ratio = m(a, a) / gxx;
            double mu = 2.0 * lambda + 2.0 - ratio;
            if (first) {
                out.mu_recovered = mu;
                out.paper_eq13_value = ratio / lambda;
                first = false;
            } else {
                out.spread = std::max(out.spread, std::abs(mu - out.mu_recovered));
            }
        }
    }
    return out;
}

FlatnessConditions flatness_conditions(double kappa, double mu, double tol) {
    if (!(kappa < 1.0 - tol)) {
        throw Error(ErrorCode::SasakianLimit, "flatness conditions need kappa < 1, got " + fmt(kappa));
    }
    const double lambda = std::sqrt(1.0 - kappa);
    FlatnessConditions out;
    out.f_lambda_value = kappa + mu * lambda - (lambda + 1.0) * (lambda + 1.0);
    out.f_minus_value = kappa - mu * lambda - (lambda - 1.0) * (lambda - 1.0);
    out.f_lambda_flat = std::abs(out.f_lambda_value) <= tol;
    out.f_minus_flat = std::abs(out.f_minus_value) <= tol;
    return out;
}

double pi_deformation_invariance(std::span<const PointContext> contexts, const ContactMetricStructure& s, double a,
                                 const DistributionBasis& l, double tol) {
    const ContactMetricStructure t = deform(s, a);
    DistributionBasis q{s.phi * l.vectors, "phiL"};
    double worst = 0.0;
    for (const DistributionBasis* b : {&l, static_cast<const DistributionBasis*>(&q)}) {
        PangForm before = pang_invariant(contexts, s, *b, tol);
        PangForm after = pang_invariant(contexts, t, *b, tol);
        for (std::size_t c = 0; c < before.matrices.size(); ++c) {
            worst = std::max(worst, max_abs(before.matrices[c] - after.matrices[c]));
        }
    }
    return worst;
}

}  // namespace kmu
