#include "kmu/contact.hpp"

#include "kmu/error.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

namespace kmu {

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

void check_metric(const Mat& g, double tol) {
    if (max_abs(g - g.transpose()) > tol) {
        throw Error(ErrorCode::MetricNotPositiveDefinite, "g is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > tol)) {
        std::ostringstream os;
        os << "smallest eigenvalue of g is " << es.eigenvalues().minCoeff();
        throw Error(ErrorCode::MetricNotPositiveDefinite, os.str());
    }
}

}  // namespace

std::vector<std::string> validate_acm(const ContactMetricStructure& s, double tol) {
    const int n = s.dim();
    check_metric(s.g, tol);
    const Mat id = Mat::Identity(n, n);
    std::vector<std::string> bad;
    if (std::abs(s.eta.dot(s.xi) - 1.0) > tol) bad.emplace_back("eta(xi)=1");
    if (max_abs(s.phi * s.phi + id - s.xi * s.eta) > tol) bad.emplace_back("phi^2=-Id+xi(x)eta");
    if (max_abs(s.phi.transpose() * s.g * s.phi - s.g + s.eta.transpose() * s.eta) > tol) {
        bad.emplace_back("g(phiV,phiW)=g(V,W)-eta(V)eta(W)");
    }
    if ((s.phi * s.xi).cwiseAbs().maxCoeff() > tol) bad.emplace_back("phi(xi)=0");
    if ((s.eta * s.phi).cwiseAbs().maxCoeff() > tol) bad.emplace_back("eta(phi)=0");
    return bad;
}

TwoForm fundamental_form(const ContactMetricStructure& s) { return s.g * s.phi; }

TwoForm d_eta(const PointContext& ctx, const ContactMetricStructure& s) {
    const int n = s.dim();
    TwoForm out = TwoForm::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            out(i, j) = -0.5 * s.eta.dot(ctx.brackets(i, j));
            out(j, i) = -out(i, j);
        }
    }
    return out;
}

ContactCheck contact_check(std::span<const PointContext> contexts, const ContactMetricStructure& s, double tol) {
    ContactCheck out;
    const TwoForm phi_form = fundamental_form(s);
    const Mat basis = contact_basis(s);
    out.min_abs_det = std::numeric_limits<double>::infinity();
    for (const PointContext& ctx : contexts) {
        TwoForm deta = d_eta(ctx, s);
        out.deta_phi_residual = std::max(out.deta_phi_residual, max_abs(deta - phi_form));
        double det = std::abs((basis.transpose() * deta * basis).determinant());
        out.min_abs_det = std::min(out.min_abs_det, det);
    }
    if (contexts.empty()) out.min_abs_det = 0.0;
    bool equal = out.deta_phi_residual <= tol;
    bool nondegenerate = out.min_abs_det >= tol;
    if (!equal) {
        std::ostringstream os;
        os << "d eta != Phi (max deviation " << out.deta_phi_residual << ")";
        out.diagnostics.push_back(os.str());
    }
    if (!nondegenerate) {
        std::ostringstream os;
        os << "d eta degenerate on D (|det| = " << out.min_abs_det << ")";
        out.diagnostics.push_back(os.str());
    }
    out.contact = equal && nondegenerate;
    return out;
}

EndoField compute_h(const PointContext& ctx, const ContactMetricStructure& s) {
    const int n = s.dim();
    EndoField h(n, n);
    for (int i = 0; i < n; ++i) {
        Vec ei = Vec::Unit(n, i);
        h.col(i) = 0.5 * (ctx.brackets.of(s.xi, s.phi.col(i)) - s.phi * ctx.brackets.of(s.xi, ei));
    }
    return h;
}

EndoField compute_h_derivative(const PointContext& ctx, const ContactMetricStructure& s, int k) {
    const int n = s.dim();
    EndoField dh = EndoField::Zero(n, n);
    if (ctx.brackets.position_independent()) return dh;
    for (int i = 0; i < n; ++i) {
        Vec ei = Vec::Unit(n, i);
        dh.col(i) = 0.5 * (ctx.brackets.derivative_of(k, s.xi, s.phi.col(i)) -
                           s.phi * ctx.brackets.derivative_of(k, s.xi, ei));
    }
    return dh;
}

std::vector<std::string> h_identities_check(const ContactMetricStructure& s, const EndoField& h, double tol) {
    std::vector<std::string> bad;
    Mat gh = s.g * h;
    if (max_abs(gh - gh.transpose()) > tol) bad.emplace_back("g-symmetric");
    if (std::abs(h.trace()) > tol) bad.emplace_back("trace-free");
    if (max_abs(h * s.phi + s.phi * h) > tol) bad.emplace_back("h phi = -phi h");
    if ((h * s.xi).cwiseAbs().maxCoeff() > tol) bad.emplace_back("h xi = 0");
    return bad;
}

bool is_k_contact(std::span<const EndoField> hs, double tol) {
    return std::all_of(hs.begin(), hs.end(), [&](const EndoField& h) { return max_abs(h) < tol; });
}

ContactMetricStructure deform(const ContactMetricStructure& s, double a) {
    if (!(a > 0.0)) {
        throw Error(ErrorCode::NonPositiveConstant, "deformation constant must be positive, got " + std::to_string(a));
    }
    ContactMetricStructure t;
    t.phi = s.phi;
    t.eta = a * s.eta;
    t.xi = s.xi / a;
    t.g = a * s.g + a * (a - 1.0) * s.eta.transpose() * s.eta;
    return t;
}

ManifoldModel deform(const ManifoldModel& model, double a) {
    if (!model.structure) throw Error(ErrorCode::SchemaError, "model carries no contact metric structure");
    ManifoldModel out = model;
    out.structure = deform(*model.structure, a);
    return out;
}

Mat contact_basis(const ContactMetricStructure& s) {
    const int n = s.dim();
    std::vector<Vec> basis;
    for (int i = 0; i < n && static_cast<int>(basis.size()) < n - 1; ++i) {
        Vec v = Vec::Unit(n, i) - s.eta[i] * s.xi;
        for (const Vec& b : basis) v -= b.dot(s.g * v) * b;
        double norm = std::sqrt(std::max(0.0, v.dot(s.g * v)));
        if (norm > 1e-8) basis.push_back(v / norm);
    }
    Mat out(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = basis[k];
    return out;
}

HSpectrum h_spectrum(const EndoField& h, const ContactMetricStructure& s) {
    const Mat basis = contact_basis(s);
    Mat restricted = basis.transpose() * s.g * h * basis;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (restricted + restricted.transpose()));
    return {es.eigenvalues(), basis * es.eigenvectors()};
}

}  // namespace kmu
