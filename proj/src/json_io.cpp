#include "torsor/json_io.hpp"

#include <fstream>
#include <sstream>

namespace torsor::io {

namespace {

void expect(bool cond, const std::string& what) {
    if (!cond) throw IoError("malformed document: " + what);
}

std::vector<Matrix> matrix_list(const json& j, const char* key) {
    expect(j.contains(key) && j.at(key).is_array(), std::string(key) + " must be an array of matrices");
    std::vector<Matrix> out;
    for (const auto& m : j.at(key)) out.push_back(matrix_from_json(m));
    return out;
}

}  // namespace

JsonKind detect_kind(const json& j) {
    if (!j.is_object()) return JsonKind::unknown;
    if (j.contains("C1") && j.contains("C2") && j.contains("r1")) return JsonKind::gluing;
    if (j.contains("A") && j.contains("C") && j.contains("B")) return JsonKind::ses;
    if (j.contains("vertices") && j.contains("simplices")) return JsonKind::triangulation;
    if (j.contains("dims") && j.contains("diffs")) return JsonKind::complex_data;
    return JsonKind::unknown;
}

Matrix matrix_from_json(const json& j) {
    expect(j.is_object() && j.contains("rows") && j.contains("cols"), "matrix needs rows/cols");
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    expect(rows >= 0 && cols >= 0, "matrix dimensions must be nonnegative");
    expect(j.contains("re") && j.at("re").is_array(), "matrix needs a re array");
    const auto& re = j.at("re");
    expect(static_cast<Eigen::Index>(re.size()) == rows * cols, "re length must equal rows*cols");
    const bool has_im = j.contains("im");
    if (has_im)
        expect(j.at("im").is_array() && static_cast<Eigen::Index>(j.at("im").size()) == rows * cols,
               "im length must equal rows*cols");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Eigen::Index idx = r * cols + c;  // row-major
            double a = re.at(idx).get<double>();
            double b = has_im ? j.at("im").at(idx).get<double>() : 0.0;
            m(r, c) = Complex(a, b);
        }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> re, im;
    re.reserve(m.size());
    bool any_im = false;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
            any_im = any_im || m(r, c).imag() != 0.0;
        }
    j["re"] = re;
    if (any_im) j["im"] = im;
    return j;
}

HilbertComplex complex_from_json(const json& j) {
    expect(j.is_object() && j.contains("dims") && j.contains("diffs"), "complex needs dims and diffs");
    std::vector<Eigen::Index> dims = j.at("dims").get<std::vector<Eigen::Index>>();
    std::vector<Matrix> diffs;
    for (const auto& d : j.at("diffs")) diffs.push_back(matrix_from_json(d));
    std::vector<Matrix> grams;
    if (j.contains("grams"))
        for (const auto& g : j.at("grams")) grams.push_back(matrix_from_json(g));
    return HilbertComplex(std::move(dims), std::move(diffs), std::move(grams));
}

json complex_to_json(const HilbertComplex& c) {
    json j;
    j["dims"] = c.dims();
    json diffs = json::array();
    for (Eigen::Index i = 0; i + 1 < c.degrees(); ++i) diffs.push_back(matrix_to_json(c.diff(i)));
    j["diffs"] = std::move(diffs);
    if (!c.identity_grams()) {
        json grams = json::array();
        for (Eigen::Index i = 0; i < c.degrees(); ++i) grams.push_back(matrix_to_json(c.gram(i)));
        j["grams"] = std::move(grams);
    }
    return j;
}

ShortExactSequence ses_from_json(const json& j) {
    expect(j.is_object() && j.contains("A") && j.contains("C") && j.contains("B"),
           "short exact sequence needs A, C, B");
    ShortExactSequence s;
    s.A = complex_from_json(j.at("A"));
    s.C = complex_from_json(j.at("C"));
    s.B = complex_from_json(j.at("B"));
    s.alpha = matrix_list(j, "alpha");
    s.beta = matrix_list(j, "beta");
    return s;
}

json ses_to_json(const ShortExactSequence& s) {
    json j;
    j["A"] = complex_to_json(s.A);
    j["C"] = complex_to_json(s.C);
    j["B"] = complex_to_json(s.B);
    json alpha = json::array(), beta = json::array();
    for (const auto& m : s.alpha) alpha.push_back(matrix_to_json(m));
    for (const auto& m : s.beta) beta.push_back(matrix_to_json(m));
    j["alpha"] = std::move(alpha);
    j["beta"] = std::move(beta);
    return j;
}

GluingData gluing_from_json(const json& j) {
    expect(j.is_object() && j.contains("C1") && j.contains("C2") && j.contains("B"),
           "gluing data needs C1, C2, B");
    GluingData g;
    g.C1 = complex_from_json(j.at("C1"));
    g.C2 = complex_from_json(j.at("C2"));
    g.B = complex_from_json(j.at("B"));
    g.r1 = matrix_list(j, "r1");
    g.r2 = matrix_list(j, "r2");
    bool iso = j.value("partial_isometry", false);
    g.r1_partial_isometry = j.value("r1_partial_isometry", iso);
    g.r2_partial_isometry = j.value("r2_partial_isometry", iso);
    return g;
}

json gluing_to_json(const GluingData& g) {
    json j;
    j["C1"] = complex_to_json(g.C1);
    j["C2"] = complex_to_json(g.C2);
    j["B"] = complex_to_json(g.B);
    json r1 = json::array(), r2 = json::array();
    for (const auto& m : g.r1) r1.push_back(matrix_to_json(m));
    for (const auto& m : g.r2) r2.push_back(matrix_to_json(m));
    j["r1"] = std::move(r1);
    j["r2"] = std::move(r2);
    j["partial_isometry"] = g.r1_partial_isometry && g.r2_partial_isometry;
    if (g.r1_partial_isometry != g.r2_partial_isometry) {
        j["r1_partial_isometry"] = g.r1_partial_isometry;
        j["r2_partial_isometry"] = g.r2_partial_isometry;
    }
    return j;
}

std::pair<SimplicialComplex, LocalSystem> triangulation_from_json(const json& j) {
    expect(j.is_object() && j.contains("vertices") && j.contains("simplices"),
           "triangulation needs vertices and simplices");
    auto simplices = j.at("simplices").get<std::vector<std::vector<int>>>();
    SimplicialComplex k = make_simplicial(j.at("vertices").get<int>(), std::move(simplices));
    LocalSystem l;
    if (j.contains("local_system")) {
        const auto& ls = j.at("local_system");
        l.fiber = ls.value("fiber", 1);
        if (ls.contains("edges")) {
            expect(ls.at("edges").is_object(), "local_system.edges must be an object");
            for (const auto& [key, val] : ls.at("edges").items()) {
                std::istringstream is(key);
                int u = 0, v = 0;
                char dash = 0;
                is >> u >> dash >> v;
                expect(!is.fail() && dash == '-', "edge key must look like \"i-j\"");
                expect(u < v, "edge key must have i < j");
                l.edges[{u, v}] = matrix_from_json(val);
            }
        }
    }
    return {std::move(k), std::move(l)};
}

json triangulation_to_json(const SimplicialComplex& k, const LocalSystem& l) {
    json j;
    j["vertices"] = k.vertex_count;
    json simplices = json::array();
    for (const auto& level : k.simplices)
        for (const auto& s : level) simplices.push_back(s);
    j["simplices"] = std::move(simplices);
    if (l.fiber != 1 || !l.edges.empty()) {
        json ls;
        ls["fiber"] = l.fiber;
        json edges = json::object();
        for (const auto& [key, m] : l.edges) {
            std::ostringstream os;
            os << key.first << "-" << key.second;
            edges[os.str()] = matrix_to_json(m);
        }
        ls["edges"] = std::move(edges);
        j["local_system"] = std::move(ls);
    }
    return j;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("JSON parse failure: ") + e.what());
    }
}

json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse(os.str());
}

void save_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << contents;
    if (!out) throw IoError("write failure: " + path);
}

}  // namespace torsor::io
