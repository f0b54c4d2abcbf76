#include "kmu/model_io.hpp"

#include "kmu/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace kmu {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::SchemaError, path + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) schema_error(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(path + "." + key, "missing required field");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) schema_error(path, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) schema_error(path, "expected a finite number");
    return d;
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) schema_error(path, "expected an integer");
    return v.get<int>();
}

const json& array(const json& v, const std::string& path, std::size_t expected_size = 0) {
    if (!v.is_array()) schema_error(path, "expected an array");
    if (expected_size && v.size() != expected_size) {
        schema_error(path, "expected " + std::to_string(expected_size) + " entries, got " + std::to_string(v.size()));
    }
    return v;
}

Vec vector(const json& v, const std::string& path, int size) {
    array(v, path, static_cast<std::size_t>(size));
    Vec out(size);
    for (int i = 0; i < size; ++i) out[i] = number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

Mat matrix(const json& v, const std::string& path, int size) {
    array(v, path, static_cast<std::size_t>(size));
    Mat out(size, size);
    for (int i = 0; i < size; ++i) out.row(i) = vector(v[i], path + "[" + std::to_string(i) + "]", size).transpose();
    return out;
}

int frame_index(const json& v, const std::string& path, int dim) {
    int k = integer(v, path);
    if (k < 0 || k >= dim) schema_error(path, "frame index " + std::to_string(k) + " out of range");
    return k;
}

expr::Expression expression(const json& v, const std::string& path, int coords) {
    if (v.is_number()) return expr::Expression::constant(number(v, path), coords);
    if (!v.is_string()) schema_error(path, "expected an expression string");
    try {
        return expr::parse(v.get<std::string>(), coords);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

json vec_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i] + 0.0);
    return out;
}

json mat_json(const Mat& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec_json(m.row(i).transpose()));
    return out;
}

}  // namespace

void validate_samples(const ManifoldModel& model, double tol) {
    if (model.backend != Backend::Chart) return;
    const ChartData& chart = model.chart;
    for (std::size_t s = 0; s < chart.samples.size(); ++s) {
        const Vec& p = chart.samples[s];
        std::span<const double> pt(p.data(), static_cast<std::size_t>(p.size()));
        for (std::size_t c = 0; c < chart.constraints.size(); ++c) {
            double r = std::abs(expr::evaluate(chart.constraints[c], pt));
            if (!(r <= tol)) {
                std::ostringstream os;
                os.precision(17);
                os << "constraint " << c << " (" << expr::to_string(chart.constraints[c]) << ") = " << r
                   << " at sample_points[" << s << "]";
                throw Error(ErrorCode::ConstraintViolated, os.str());
            }
        }
        Mat E(chart.coords, model.dim);
        for (int a = 0; a < model.dim; ++a) {
            for (int q = 0; q < chart.coords; ++q) E(q, a) = expr::evaluate(chart.frame[a][q], pt);
        }
        Eigen::JacobiSVD<Mat> svd(E);
        const Vec& sv = svd.singularValues();
        if (sv.size() < model.dim || sv[model.dim - 1] <= tol * std::max(1.0, sv[0])) {
            throw Error(ErrorCode::FrameRankDeficient,
                        "frame matrix rank < " + std::to_string(model.dim) + " at sample_points[" +
                            std::to_string(s) + "]");
        }
    }
}

ManifoldModel model_from_json(const json& doc, double tol) {
    if (!doc.is_object()) schema_error("$", "expected an object");
    ManifoldModel model;
    const json& name = field(doc, "name", "$");
    if (!name.is_string()) schema_error("$.name", "expected a string");
    model.name = name.get<std::string>();

    model.dim = integer(field(doc, "dim", "$"), "$.dim");
    if (model.dim < 3 || model.dim % 2 == 0) schema_error("$.dim", "dimension must be odd and at least 3");
    const int n = model.dim;

    const json& backend = field(doc, "backend", "$");
    if (backend == "lie") {
        model.backend = Backend::Lie;
    } else if (backend == "chart") {
        model.backend = Backend::Chart;
    } else {
        schema_error("$.backend", "expected \"lie\" or \"chart\"");
    }

    if (auto it = doc.find("frame_names"); it != doc.end()) {
        array(*it, "$.frame_names", static_cast<std::size_t>(n));
        for (const auto& s : *it) {
            if (!s.is_string()) schema_error("$.frame_names", "expected strings");
            model.frame_names.push_back(s.get<std::string>());
        }
    }

    if (model.backend == Backend::Lie) {
        model.constants = BracketTable(n);
        const json& sc = array(field(doc, "structure_constants", "$"), "$.structure_constants");
        for (std::size_t k = 0; k < sc.size(); ++k) {
            std::string path = "$.structure_constants[" + std::to_string(k) + "]";
            const json& pair = array(field(sc[k], "pair", path), path + ".pair", 2);
            int i = frame_index(pair[0], path + ".pair[0]", n);
            int j = frame_index(pair[1], path + ".pair[1]", n);
            if (i == j) schema_error(path + ".pair", "bracket of a field with itself is zero");
            model.constants.set(i, j, vector(field(sc[k], "bracket", path), path + ".bracket", n));
        }
        double jac = jacobi_check(model);
        if (!(jac <= tol)) {
            std::ostringstream os;
            os << "Jacobi identity residual " << jac << " exceeds " << tol;
            schema_error("$.structure_constants", os.str());
        }
    } else {
        ChartData& chart = model.chart;
        chart.coords = integer(field(doc, "coordinates", "$"), "$.coordinates");
        if (chart.coords < n) schema_error("$.coordinates", "need at least dim coordinates");
        const json& frame = array(field(doc, "frame", "$"), "$.frame", static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            std::string path = "$.frame[" + std::to_string(a) + "]";
            const json& comps = array(frame[a], path, static_cast<std::size_t>(chart.coords));
            std::vector<expr::Expression> field_exprs;
            for (int q = 0; q < chart.coords; ++q) {
                field_exprs.push_back(expression(comps[q], path + "[" + std::to_string(q) + "]", chart.coords));
            }
            chart.frame.push_back(std::move(field_exprs));
        }
        if (auto it = doc.find("constraints"); it != doc.end()) {
            array(*it, "$.constraints");
            for (std::size_t c = 0; c < it->size(); ++c) {
                chart.constraints.push_back(
                    expression((*it)[c], "$.constraints[" + std::to_string(c) + "]", chart.coords));
            }
        }
        const json& samples = array(field(doc, "sample_points", "$"), "$.sample_points");
        if (samples.empty()) schema_error("$.sample_points", "at least one sample point is required");
        for (std::size_t s = 0; s < samples.size(); ++s) {
            chart.samples.push_back(vector(samples[s], "$.sample_points[" + std::to_string(s) + "]", chart.coords));
        }
        validate_samples(model, tol);
    }

    if (auto it = doc.find("tensors"); it != doc.end()) {
        ContactMetricStructure s;
        s.phi = matrix(field(*it, "phi", "$.tensors"), "$.tensors.phi", n);
        s.xi = vector(field(*it, "xi", "$.tensors"), "$.tensors.xi", n);
        s.eta = vector(field(*it, "eta", "$.tensors"), "$.tensors.eta", n).transpose();
        s.g = matrix(field(*it, "g", "$.tensors"), "$.tensors.g", n);
        model.structure = s;
    }

    if (auto it = doc.find("adapted_blocks"); it != doc.end()) {
        AdaptedBlocks b;
        for (const char* key : {"L", "Q"}) {
            std::string path = std::string("$.adapted_blocks.") + key;
            const json& idx = array(field(*it, key, "$.adapted_blocks"), path, static_cast<std::size_t>((n - 1) / 2));
            for (std::size_t k = 0; k < idx.size(); ++k) {
                (key[0] == 'L' ? b.L : b.Q).push_back(frame_index(idx[k], path + "[" + std::to_string(k) + "]", n));
            }
        }
        b.xi = frame_index(field(*it, "xi", "$.adapted_blocks"), "$.adapted_blocks.xi", n);
        model.blocks = b;
    }
    return model;
}

json model_to_json(const ManifoldModel& model) {
    json doc;
    doc["name"] = model.name;
    doc["dim"] = model.dim;
    doc["backend"] = model.backend == Backend::Lie ? "lie" : "chart";
    if (!model.frame_names.empty()) doc["frame_names"] = model.frame_names;

    if (model.backend == Backend::Lie) {
        json sc = json::array();
        for (int i = 0; i < model.dim; ++i) {
            for (int j = i + 1; j < model.dim; ++j) {
                const Vec& v = model.constants(i, j);
                if (v.isZero(0.0)) continue;
                sc.push_back({{"pair", {i, j}}, {"bracket", vec_json(v)}});
            }
        }
        doc["structure_constants"] = sc;
    } else {
        doc["coordinates"] = model.chart.coords;
        json frame = json::array();
        for (const auto& f : model.chart.frame) {
            json comps = json::array();
            for (const auto& e : f) comps.push_back(expr::to_string(e));
            frame.push_back(comps);
        }
        doc["frame"] = frame;
        json cons = json::array();
        for (const auto& c : model.chart.constraints) cons.push_back(expr::to_string(c));
        doc["constraints"] = cons;
        json pts = json::array();
        for (const auto& p : model.chart.samples) pts.push_back(vec_json(p));
        doc["sample_points"] = pts;
    }

    if (model.structure) {
        const ContactMetricStructure& s = *model.structure;
        doc["tensors"] = {{"phi", mat_json(s.phi)},
                          {"xi", vec_json(s.xi)},
                          {"eta", vec_json(s.eta.transpose())},
                          {"g", mat_json(s.g)}};
    }
    if (model.blocks) {
        doc["adapted_blocks"] = {{"L", model.blocks->L}, {"Q", model.blocks->Q}, {"xi", model.blocks->xi}};
    }
    return doc;
}

ManifoldModel load_model(const std::filesystem::path& path, double tol) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, path.string() + ": invalid JSON (" + e.what() + ")");
    }
    return model_from_json(doc, tol);
}

void save_model(const ManifoldModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << model_to_json(model).dump(2) << "\n";
}

}  // namespace kmu
