#include "kmu/curvature.hpp"

#include "kmu/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kmu {

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// 2 g(nabla_i e_j, e_k) = g([e_i,e_j], e_k) - g([e_j,e_k], e_i) + g([e_k,e_i], e_j),
// evaluated with `bracket(i, j)` supplying either the brackets or their derivatives.
template <class BracketFn>
std::vector<Mat> koszul(int n, const Eigen::LDLT<Mat>& g_solver, const Mat& g, BracketFn bracket) {
    std::vector<Mat> out(n, Mat(n, n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vec lowered(n);
            for (int k = 0; k < n; ++k) {
                lowered[k] = 0.5 * (g.row(k).dot(bracket(i, j)) - g.row(i).dot(bracket(j, k)) +
                                    g.row(j).dot(bracket(k, i)));
            }
            out[i].col(j) = g_solver.solve(lowered);
        }
    }
    return out;
}

}  // namespace

Mat Connection::along(const Vec& v) const {
    Mat out = Mat::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) {
        if (v[i] != 0.0) out += v[i] * coeffs[i];
    }
    return out;
}

Mat Connection::covariant_endo(int i, const Mat& a, const Mat& da) const {
    return da + coeffs[i] * a - a * coeffs[i];
}

Mat Connection::covariant_bilinear(int i, const Mat& b) const {
    return -(coeffs[i].transpose() * b + b * coeffs[i]);
}

Covec Connection::covariant_form(int i, const Covec& eta) const { return -(eta * coeffs[i]); }

Connection levi_civita(const PointContext& ctx, const Mat& g) {
    const int n = ctx.brackets.dim();
    Eigen::LDLT<Mat> solver(g);
    if (solver.info() != Eigen::Success || !solver.isPositive() ||
        solver.vectorD().cwiseAbs().minCoeff() <= 1e-14 * std::max(1.0, max_abs(g))) {
        throw Error(ErrorCode::SingularMetric, "metric matrix is singular");
    }
    Connection nabla;
    nabla.coeffs = koszul(n, solver, g, [&](int i, int j) -> const Vec& { return ctx.brackets(i, j); });
    nabla.derivatives.resize(n);
    for (int k = 0; k < n; ++k) {
        if (ctx.brackets.position_independent()) {
            nabla.derivatives[k].assign(n, Mat::Zero(n, n));
        } else {
            nabla.derivatives[k] =
                koszul(n, solver, g, [&](int i, int j) -> const Vec& { return ctx.brackets.derivative(k, i, j); });
        }
    }
    return nabla;
}

double torsion_free_residual(const PointContext& ctx, const Connection& nabla) {
    double worst = 0.0;
    const int n = nabla.dim();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vec t = nabla(i, j) - nabla(j, i) - ctx.brackets(i, j);
            worst = std::max(worst, t.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

double metric_residual(const Connection& nabla, const Mat& g) {
    double worst = 0.0;
    for (int i = 0; i < nabla.dim(); ++i) worst = std::max(worst, max_abs(nabla.covariant_bilinear(i, g)));
    return worst;
}

CurvatureField riemann(const PointContext& ctx, const Connection& nabla) {
    const int n = nabla.dim();
    const bool have_derivatives = !nabla.derivatives.empty();
    if (!have_derivatives && !ctx.brackets.position_independent()) {
        throw Error(ErrorCode::SpanResidualExceeded,
                    "curvature needs connection derivatives for position-dependent brackets");
    }
    CurvatureField r;
    r.dim = n;
    r.blocks.assign(static_cast<std::size_t>(n * n), Mat::Zero(n, n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            Mat& block = r.blocks[static_cast<std::size_t>(i * n + j)];
            block = nabla.coeffs[i] * nabla.coeffs[j] - nabla.coeffs[j] * nabla.coeffs[i] -
                    nabla.along(ctx.brackets(i, j));
            if (have_derivatives) block += nabla.derivatives[i][j] - nabla.derivatives[j][i];
        }
    }
    return r;
}

double curvature_antisymmetry_residual(const CurvatureField& r) {
    double worst = 0.0;
    for (int i = 0; i < r.dim; ++i) {
        for (int j = 0; j < r.dim; ++j) worst = std::max(worst, max_abs(r(i, j) + r(j, i)));
    }
    return worst;
}

double curvature_pair_symmetry_residual(const CurvatureField& r, const Mat& g) {
    const int n = r.dim;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                for (int l = 0; l < n; ++l) {
                    double lhs = g.row(l).dot(r(i, j, k));
                    double rhs = g.row(j).dot(r(k, l, i));
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
            }
        }
    }
    return worst;
}

double check_nabla_xi(const Connection& nabla, const ContactMetricStructure& s, const EndoField& h) {
    const int n = nabla.dim();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec lhs = nabla.coeffs[i] * s.xi;
        Vec rhs = -s.phi * h.col(i) - s.phi.col(i);
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

PointCurvature point_curvature(const PointContext& ctx, const ContactMetricStructure& s) {
    PointCurvature pc;
    pc.levi_civita = levi_civita(ctx, s.g);
    pc.riemann = riemann(ctx, pc.levi_civita);
    pc.h = compute_h(ctx, s);
    return pc;
}

double sasakian_curvature_residual(const CurvatureField& r, const ContactMetricStructure& s) {
    const int n = r.dim;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vec expected = s.eta[j] * Vec::Unit(n, i) - s.eta[i] * Vec::Unit(n, j);
            worst = std::max(worst, (r.apply(i, j, s.xi) - expected).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

KappaMuReport fit_kappa_mu(std::span<const CurvatureField> r, std::span<const EndoField> h,
                           const ContactMetricStructure& s, double tol) {
    KappaMuReport rep;
    rep.k_contact = is_k_contact(h, tol);
    const int n = s.dim();

    if (rep.k_contact) {
        rep.kappa = 1.0;
        rep.lambda = 0.0;
        for (const CurvatureField& rc : r) rep.residual = std::max(rep.residual, sasakian_curvature_residual(rc, s));
        rep.sasakian = rep.residual <= tol;
        return rep;
    }

    std::vector<double> kappas, mus, lambdas;
    for (std::size_t c = 0; c < r.size(); ++c) {
        HSpectrum spec = h_spectrum(h[c], s);
        const Eigen::Index last = spec.eigenvalues.size() - 1;
        Vec e = spec.eigenvectors.col(last);  // +lambda
        Vec f = spec.eigenvectors.col(0);     // -lambda
        double lambda = 0.5 * (spec.eigenvalues[last] - spec.eigenvalues[0]);
        // R(V, xi) xi is tensorial in V and xi.
        auto r_v_xi_xi = [&](const Vec& v) {
            Vec out = Vec::Zero(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    double w = v[i] * s.xi[j];
                    if (w != 0.0) out += w * r[c].apply(i, j, s.xi);
                }
            }
            return out;
        };
        double plus = e.dot(s.g * r_v_xi_xi(e));   // kappa + mu lambda
        double minus = f.dot(s.g * r_v_xi_xi(f));  // kappa - mu lambda
        kappas.push_back(0.5 * (plus + minus));
        mus.push_back((plus - minus) / (2.0 * lambda));
        lambdas.push_back(lambda);
    }
    rep.kappa = kappas.front();
    rep.mu = mus.front();
    rep.lambda = lambdas.front();
    for (std::size_t c = 1; c < kappas.size(); ++c) {
        rep.spread = std::max({rep.spread, std::abs(kappas[c] - rep.kappa), std::abs(mus[c] - *rep.mu)});
    }

    for (std::size_t c = 0; c < r.size(); ++c) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                Vec ei = Vec::Unit(n, i), ej = Vec::Unit(n, j);
                Vec expected = rep.kappa * (s.eta[j] * ei - s.eta[i] * ej) +
                               *rep.mu * (s.eta[j] * h[c].col(i) - s.eta[i] * h[c].col(j));
                rep.residual = std::max(rep.residual, (r[c].apply(i, j, s.xi) - expected).cwiseAbs().maxCoeff());
            }
        }
    }
    return rep;
}

KappaMuReport extract_kappa_mu(std::span<const CurvatureField> r, std::span<const EndoField> h,
                               const ContactMetricStructure& s, double tol) {
    KappaMuReport rep = fit_kappa_mu(r, h, s, tol);
    if (!(rep.residual <= tol)) {
        std::ostringstream os;
        os << (rep.k_contact ? "K-contact but not Sasakian" : "nullity condition fails") << ", residual "
           << rep.residual;
        throw Error(ErrorCode::NotNullity, os.str());
    }
    if (!(rep.spread <= tol)) {
        std::ostringstream os;
        os << "(kappa, mu) varies across sample points by " << rep.spread;
        throw Error(ErrorCode::NonConstantAcrossPoints, os.str());
    }
    return rep;
}

KappaMuReport extract_kappa_mu(std::span<const PointContext> contexts, const ContactMetricStructure& s, double tol) {
    std::vector<CurvatureField> r;
    std::vector<EndoField> h;
    for (const PointContext& ctx : contexts) {
        PointCurvature pc = point_curvature(ctx, s);
        r.push_back(std::move(pc.riemann));
        h.push_back(std::move(pc.h));
    }
    return extract_kappa_mu(r, h, s, tol);
}

double check_kmu_covariant_formulas(const PointContext& ctx, const Connection& nabla, const ContactMetricStructure& s,
                                    double kappa, double mu) {
    const int n = s.dim();
    const EndoField h = compute_h(ctx, s);
    const Mat zero = Mat::Zero(n, n);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const Mat dphi = nabla.covariant_endo(i, s.phi, zero);
        const Mat dh = nabla.covariant_endo(i, h, compute_h_derivative(ctx, s, i));
        const Vec ei = Vec::Unit(n, i);
        for (int j = 0; j < n; ++j) {
            const Vec ej = Vec::Unit(n, j);
            Vec r1 = dphi.col(j) - (ei.dot(s.g * (ej + h.col(j)))) * s.xi + s.eta[j] * (ei + h.col(i));
            double coeff = (1.0 - kappa) * ei.dot(s.g * s.phi.col(j)) - ei.dot(s.g * s.phi * h.col(j));
            Vec r2 = dh.col(j) - coeff * s.xi - s.eta[j] * (h * (s.phi.col(i) + s.phi * h.col(i))) +
                     mu * s.eta[i] * (s.phi * h.col(j));
            worst = std::max({worst, r1.cwiseAbs().maxCoeff(), r2.cwiseAbs().maxCoeff()});
        }
    }
    return worst;
}

double sasakian_residual(const Connection& nabla, const ContactMetricStructure& s) {
    const int n = s.dim();
    const Mat zero = Mat::Zero(n, n);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const Mat dphi = nabla.covariant_endo(i, s.phi, zero);
        for (int j = 0; j < n; ++j) {
            Vec expected = s.g(i, j) * s.xi - s.eta[j] * Vec::Unit(n, i);
            worst = std::max(worst, (dphi.col(j) - expected).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

bool sasakian_check(const Connection& nabla, const ContactMetricStructure& s, double tol) {
    return sasakian_residual(nabla, s) <= tol;
}

}  // namespace kmu
