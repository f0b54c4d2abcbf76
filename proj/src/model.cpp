#include "kmu/model.hpp"

#include "kmu/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace kmu {

BracketTable::BracketTable(int dim)
    : dim_(dim),
      c_(static_cast<std::size_t>(dim * dim), Vec::Zero(dim)),
      dc_(static_cast<std::size_t>(dim * dim * dim), Vec::Zero(dim)) {}

void BracketTable::set(int i, int j, const Vec& v) {
    c_[index(i, j)] = v;
    c_[index(j, i)] = -v;
    if (i == j) c_[index(i, i)].setZero();
}

void BracketTable::set_derivative(int k, int i, int j, const Vec& v) {
    dc_[k * dim_ * dim_ + index(i, j)] = v;
    dc_[k * dim_ * dim_ + index(j, i)] = -v;
    if (i == j) dc_[k * dim_ * dim_ + index(i, i)].setZero();
    if (!v.isZero(0.0)) constant_ = false;
}

Vec BracketTable::of(const Vec& v, const Vec& w) const {
    Vec out = Vec::Zero(dim_);
    for (int i = 0; i < dim_; ++i) {
        if (v[i] == 0.0) continue;
        for (int j = 0; j < dim_; ++j) {
            if (w[j] != 0.0) out += v[i] * w[j] * (*this)(i, j);
        }
    }
    return out;
}

Vec BracketTable::derivative_of(int k, const Vec& v, const Vec& w) const {
    Vec out = Vec::Zero(dim_);
    if (constant_) return out;
    for (int i = 0; i < dim_; ++i) {
        if (v[i] == 0.0) continue;
        for (int j = 0; j < dim_; ++j) {
            if (w[j] != 0.0) out += v[i] * w[j] * derivative(k, i, j);
        }
    }
    return out;
}

Vec BracketTable::derivative_of(const Vec& u, const Vec& v, const Vec& w) const {
    Vec out = Vec::Zero(dim_);
    if (constant_) return out;
    for (int k = 0; k < dim_; ++k) {
        if (u[k] != 0.0) out += u[k] * derivative_of(k, v, w);
    }
    return out;
}

std::string ManifoldModel::frame_name(int i) const {
    if (i >= 0 && i < static_cast<int>(frame_names.size())) return frame_names[i];
    return "e" + std::to_string(i + 1);
}

namespace {

std::string describe_point(const Vec& p) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (Eigen::Index k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
    os << ")";
    return os.str();
}

PointContext chart_context(const ManifoldModel& model, std::size_t sample, double tol) {
    const ChartData& chart = model.chart;
    const int m = chart.coords;
    const int n = model.dim;
    const Vec& p = chart.samples.at(sample);
    std::span<const double> pt(p.data(), static_cast<std::size_t>(p.size()));

    Mat E(m, n);
    std::vector<Mat> DE(n, Mat(m, m));                          // DE[a](q, l) = d_l E_a^q
    std::vector<std::vector<Mat>> H(n, std::vector<Mat>(m));   // H[a][q] = Hessian of E_a^q
    for (int a = 0; a < n; ++a) {
        for (int q = 0; q < m; ++q) {
            expr::Jet2 j = expr::eval_jet2(chart.frame[a][q], pt);
            E(q, a) = j.value;
            DE[a].row(q) = j.gradient.transpose();
            H[a][q] = j.hessian;
        }
    }

    Eigen::JacobiSVD<Mat> svd(E);
    const Vec& sv = svd.singularValues();
    if (sv.size() < n || sv[n - 1] <= tol * std::max(1.0, sv[0])) {
        throw Error(ErrorCode::FrameRankDeficient, "frame matrix rank < " + std::to_string(n) + " at sample " +
                                                       std::to_string(sample) + " " + describe_point(p));
    }
    Eigen::ColPivHouseholderQR<Mat> qr(E);

    PointContext ctx;
    ctx.sample = sample;
    ctx.point = p;
    ctx.frame = E;
    ctx.brackets = BracketTable(n);

    auto solve_in_frame = [&](const Vec& ambient, const std::string& what) {
        Vec c = qr.solve(ambient);
        double residual = (E * c - ambient).norm();
        if (!(residual <= tol)) {
            std::ostringstream os;
            os << what << " leaves the frame span by " << residual << " at sample " << sample << " "
               << describe_point(p);
            throw Error(ErrorCode::SpanResidualExceeded, os.str());
        }
        return c;
    };

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Vec ambient = DE[j] * E.col(i) - DE[i] * E.col(j);
            std::string label = "[" + model.frame_name(i) + ", " + model.frame_name(j) + "]";
            Vec c = solve_in_frame(ambient, label);
            ctx.brackets.set(i, j, c);

            for (int k = 0; k < n; ++k) {
                const Vec v = E.col(k);
                Vec dA = DE[j] * (DE[i] * v) - DE[i] * (DE[j] * v);
                for (int q = 0; q < m; ++q) {
                    dA[q] += E.col(i).dot(H[j][q] * v) - E.col(j).dot(H[i][q] * v);
                }
                Mat dE(m, n);
                for (int a = 0; a < n; ++a) dE.col(a) = DE[a] * v;
                Vec dc = solve_in_frame(dA - dE * c, model.frame_name(k) + "(" + label + ")");
                ctx.brackets.set_derivative(k, i, j, dc);
            }
        }
    }
    return ctx;
}

}  // namespace

PointContext make_context(const ManifoldModel& model, std::size_t sample, double tol) {
    if (model.backend == Backend::Lie) {
        PointContext ctx;
        ctx.sample = 0;
        ctx.brackets = model.constants;
        return ctx;
    }
    return chart_context(model, sample, tol);
}

std::vector<PointContext> make_contexts(const ManifoldModel& model, double tol) {
    std::vector<PointContext> out;
    if (model.backend == Backend::Lie) {
        out.push_back(make_context(model, 0, tol));
        return out;
    }
    out.reserve(model.chart.samples.size());
    for (std::size_t s = 0; s < model.chart.samples.size(); ++s) out.push_back(make_context(model, s, tol));
    return out;
}

double jacobi_check(const ManifoldModel& model) {
    if (model.backend != Backend::Lie) {
        throw Error(ErrorCode::WrongBackend, "jacobi_check requires the Lie backend");
    }
    const BracketTable& c = model.constants;
    const int n = model.dim;
    auto ad = [&](int i, const Vec& v) {
        Vec out = Vec::Zero(n);
        for (int l = 0; l < n; ++l) out += v[l] * c(i, l);
        return out;
    };
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                Vec cyc = ad(i, c(j, k)) + ad(j, c(k, i)) + ad(k, c(i, j));
                worst = std::max(worst, cyc.cwiseAbs().maxCoeff());
            }
        }
    }
    return worst;
}

ManifoldModel make_kmu_model(double kappa, double mu, double tol) {
    if (!(kappa < 1.0 - tol)) {
        throw Error(ErrorCode::SasakianLimit, "kappa = " + std::to_string(kappa) +
                                                  " leaves no eigendistribution splitting (need kappa < 1)");
    }
    const double lambda = std::sqrt(1.0 - kappa);
    const double beta = lambda + 1.0 - mu / 2.0;
    const double gamma = lambda - 1.0 + mu / 2.0;
    constexpr int e = 0, f = 1, xi = 2;

    ManifoldModel model;
    std::ostringstream name;
    name.precision(17);
    name << "kmu-generator(" << kappa << "," << mu << ")";
    model.name = name.str();
    model.dim = 3;
    model.backend = Backend::Lie;
    model.frame_names = {"e", "f", "xi"};
    model.constants = BracketTable(3);
    model.constants.set(e, f, Vec::Unit(3, xi) * 2.0);
    model.constants.set(xi, e, Vec::Unit(3, f) * beta);
    model.constants.set(xi, f, Vec::Unit(3, e) * gamma);

    ContactMetricStructure s;
    s.phi = Mat::Zero(3, 3);
    s.phi(f, e) = 1.0;
    s.phi(e, f) = -1.0;
    s.xi = Vec::Unit(3, xi);
    s.eta = Covec::Unit(3, xi);
    s.g = Mat::Identity(3, 3);
    model.structure = s;
    model.blocks = AdaptedBlocks{{e}, {f}, xi};
    return model;
}

ManifoldModel make_flat_model() {
    ManifoldModel m = make_kmu_model(0.0, 0.0);
    m.name = "flat-kappa0";
    return m;
}

ManifoldModel make_negative_control(double delta) {
    ManifoldModel m = perturb_structure_constant(make_kmu_model(0.0, 4.0), 0, 1, 0, delta);
    m.name = "perturbed-negative-control";
    return m;
}

ManifoldModel perturb_structure_constant(ManifoldModel model, int i, int j, int k, double delta) {
    if (model.backend != Backend::Lie) {
        throw Error(ErrorCode::WrongBackend, "structure constants exist only on the Lie backend");
    }
    Vec v = model.constants(i, j);
    v[k] += delta;
    model.constants.set(i, j, v);
    return model;
}

std::vector<double> normal_draws(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1p-53; };
    std::vector<double> out;
    out.reserve(count + 1);
    while (out.size() < count) {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        out.push_back(r * std::cos(2.0 * std::numbers::pi * u2));
        out.push_back(r * std::sin(2.0 * std::numbers::pi * u2));
    }
    out.resize(count);
    return out;
}

ManifoldModel make_s3_model(std::uint64_t seed, int samples) {
    constexpr int m = 4;
    auto parse = [](std::string_view s) { return expr::parse(s, m); };

    ManifoldModel model;
    model.name = "s3-sasakian";
    model.dim = 3;
    model.backend = Backend::Chart;
    model.frame_names = {"X", "Y", "xi"};
    model.chart.coords = m;
    model.chart.frame = {
        {parse("x2"), parse("-x1"), parse("-x4"), parse("x3")},
        {parse("x4"), parse("-x3"), parse("x2"), parse("-x1")},
        {parse("x3"), parse("x4"), parse("-x1"), parse("-x2")},
    };
    model.chart.constraints = {parse("x1^2 + x2^2 + x3^2 + x4^2 - 1")};

    std::vector<double> draws = normal_draws(seed, static_cast<std::size_t>(samples) * m);
    for (int s = 0; s < samples; ++s) {
        Vec p = Eigen::Map<const Vec>(draws.data() + static_cast<std::ptrdiff_t>(s) * m, m);
        model.chart.samples.push_back(p / p.norm());
    }

    ContactMetricStructure st;
    st.phi = Mat::Zero(3, 3);
    st.phi(1, 0) = 1.0;   // phi X = Y
    st.phi(0, 1) = -1.0;  // phi Y = -X
    st.xi = Vec::Unit(3, 2);
    st.eta = Covec::Unit(3, 2);
    st.g = Mat::Identity(3, 3);
    model.structure = st;
    model.blocks = AdaptedBlocks{{0}, {1}, 2};
    return model;
}

ManifoldModel change_frame(const ManifoldModel& model, const Mat& basis) {
    const int n = model.dim;
    Eigen::FullPivLU<Mat> lu(basis);
    if (basis.rows() != n || basis.cols() != n || !lu.isInvertible()) {
        throw Error(ErrorCode::NotComplementary, "frame change matrix is not invertible");
    }
    const Mat inv = lu.inverse();

    ManifoldModel out = model;
    out.blocks.reset();
    out.frame_names.clear();
    for (int a = 0; a < n; ++a) {
        std::string name;
        for (int i = 0; i < n; ++i) {
            if (basis(i, a) == 0.0) continue;
            if (!name.empty()) name += "+";
            if (basis(i, a) != 1.0) name += std::to_string(basis(i, a)) + "*";
            name += model.frame_name(i);
        }
        out.frame_names.push_back(name);
    }

    if (model.backend == Backend::Lie) {
        out.constants = BracketTable(n);
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                out.constants.set(a, b, inv * model.constants.of(basis.col(a), basis.col(b)));
            }
        }
    } else {
        const int m = model.chart.coords;
        for (int a = 0; a < n; ++a) {
            for (int q = 0; q < m; ++q) {
                expr::Expression sum;
                for (int i = 0; i < n; ++i) {
                    double w = basis(i, a);
                    if (w == 0.0) continue;
                    expr::Expression term = w == 1.0 ? model.chart.frame[i][q] : w * model.chart.frame[i][q];
                    sum = sum.empty() ? term : sum + term;
                }
                out.chart.frame[a][q] = sum;
            }
        }
    }

    if (model.structure) {
        const ContactMetricStructure& s = *model.structure;
        ContactMetricStructure t;
        t.phi = inv * s.phi * basis;
        t.xi = inv * s.xi;
        t.eta = s.eta * basis;
        t.g = basis.transpose() * s.g * basis;
        out.structure = t;
    }
    return out;
}

}  // namespace kmu
