#include "kcascade/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include "kcascade/error.hpp"

namespace kcascade {

namespace {

[[noreturn]] void bad_format(const std::string& what) {
    throw Error(ErrorCode::InvalidFormat, what);
}

const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad_format(std::string("missing key \"") + key + "\"");
    return j.at(key);
}

// JSON has no infinity; unbounded margins are written as null.
Json finite_or_null(double v) {
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

std::string pair_key(std::size_t i, std::size_t j) {
    return std::to_string(i) + "," + std::to_string(j);
}

std::size_t parse_layer_index(const std::string& s) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(s, &pos);
    } catch (const std::exception&) {
        bad_format("coupling key \"" + s + "\" is not a layer index");
    }
    if (pos != s.size() || v == 0) bad_format("coupling key \"" + s + "\" is not a layer index");
    return static_cast<std::size_t>(v);
}

}  // namespace

Json complex_to_json(Complex z) {
    return Json::array({z.real(), z.imag()});
}

Complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        bad_format("complex numbers are [re, im] pairs");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Json matrix_to_json(const CMatrix& m) {
    Json data = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(complex_to_json(m(r, c)));
    }
    return {{"rows", static_cast<std::size_t>(m.rows())}, {"cols", static_cast<std::size_t>(m.cols())}, {"data", std::move(data)}};
}

CMatrix matrix_from_json(const Json& j) {
    const Json& rows = require(j, "rows");
    const Json& cols = require(j, "cols");
    const Json& data = require(j, "data");
    if (!rows.is_number_unsigned() || !cols.is_number_unsigned() || !data.is_array()) {
        bad_format("matrix needs unsigned rows/cols and a data array");
    }
    const auto r = rows.get<Eigen::Index>();
    const auto c = cols.get<Eigen::Index>();
    if (static_cast<Eigen::Index>(data.size()) != r * c) bad_format("matrix data length does not equal rows*cols");
    CMatrix m(r, c);
    for (Eigen::Index k = 0; k < r * c; ++k) m(k / c, k % c) = complex_from_json(data[static_cast<std::size_t>(k)]);
    if (!m.allFinite()) bad_format("matrix entries must be finite");
    return m;
}

Json state_to_json(const StateVector& x) {
    Json layers = Json::array();
    for (const CVector& v : x.layers()) {
        Json layer = Json::array();
        for (Eigen::Index k = 0; k < v.size(); ++k) layer.push_back(complex_to_json(v(k)));
        layers.push_back(std::move(layer));
    }
    return {{"layers", std::move(layers)}};
}

StateVector state_from_json(const Json& j) {
    const Json& layers = require(j, "layers");
    if (!layers.is_array()) bad_format("state layers must be an array");
    std::vector<CVector> out;
    for (const Json& layer : layers) {
        if (!layer.is_array()) bad_format("state layer must be an array of [re, im]");
        CVector v(static_cast<Eigen::Index>(layer.size()));
        for (std::size_t k = 0; k < layer.size(); ++k) v(static_cast<Eigen::Index>(k)) = complex_from_json(layer[k]);
        out.push_back(std::move(v));
    }
    return StateVector(std::move(out));
}

Json cascade_to_json(const CascadeSystem& sys) {
    Json layers = Json::array();
    for (std::size_t i = 1; i <= sys.size(); ++i) {
        Json layer = {{"dim", sys.dim(i)}, {"L", matrix_to_json(sys.layer(i))}};
        if (sys.is_chained()) {
            if (const CMatrix* c = sys.coupling(i, i - 1); i > 1 && c) layer["C_prev"] = matrix_to_json(*c);
        } else {
            Json couplings = Json::object();
            for (std::size_t j = 1; j < i; ++j) {
                if (const CMatrix* c = sys.coupling(i, j)) couplings[std::to_string(j)] = matrix_to_json(*c);
            }
            if (!couplings.empty()) layer["C"] = std::move(couplings);
        }
        layers.push_back(std::move(layer));
    }
    return {{"layers", std::move(layers)}};
}

LoadedCascade cascade_from_json(const Json& j) {
    const Json& layers = require(j, "layers");
    if (!layers.is_array() || layers.empty()) bad_format("cascade needs a non-empty layers array");
    std::vector<CMatrix> ls;
    std::map<LayerPair, CMatrix> couplings;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const std::size_t i = k + 1;
        const Json& layer = layers[k];
        const Json& dim = require(layer, "dim");
        if (!dim.is_number_unsigned() || dim.get<std::size_t>() == 0) bad_format("layer dim must be a positive integer");
        const auto d = dim.get<Eigen::Index>();
        CMatrix l = matrix_from_json(require(layer, "L"));
        if (l.rows() != d || l.cols() != d) bad_format("layer " + std::to_string(i) + " L is not dim x dim");
        ls.push_back(std::move(l));

        if (layer.contains("C_prev") && layer.contains("C")) {
            bad_format("layer " + std::to_string(i) + " has both C_prev and C");
        }
        if (layer.contains("C_prev")) {
            if (i == 1) bad_format("layer 1 cannot have an upstream coupling");
            couplings.emplace(LayerPair{i, i - 1}, matrix_from_json(layer.at("C_prev")));
        }
        if (layer.contains("C")) {
            const Json& cs = layer.at("C");
            if (!cs.is_object()) bad_format("\"C\" must map upstream layer indices to matrices");
            for (const auto& [key, value] : cs.items()) {
                const std::size_t src = parse_layer_index(key);
                if (src >= i) bad_format("coupling into layer " + std::to_string(i) + " from non-upstream layer " + key);
                couplings.emplace(LayerPair{i, src}, matrix_from_json(value));
            }
        }
    }
    for (const auto& [key, c] : couplings) {
        if (c.rows() != ls[key.first - 1].rows() || c.cols() != ls[key.second - 1].rows()) {
            bad_format("coupling " + pair_key(key.first, key.second) + " has the wrong shape");
        }
    }
    CascadeSystem sys(std::move(ls), std::move(couplings));
    ConditionReport report = validate_conditions(sys);
    return {std::move(sys), std::move(report)};
}

Json condition_report_to_json(const ConditionReport& r) {
    Json layers = Json::array();
    for (std::size_t k = 0; k < r.layers.size(); ++k) {
        layers.push_back({{"layer", k + 1},
                          {"condition_number", finite_or_null(r.layers[k].condition_number)},
                          {"min_abs_eigenvalue", r.layers[k].min_abs_eigenvalue},
                          {"pass", r.layers[k].pass}});
    }
    return {
        {"invertible_diagonalizable", {{"pass", r.invertible_diagonalizable}, {"layers", std::move(layers)}}},
        {"disjoint_spectra", {{"pass", r.disjoint_pass}, {"min_gap", finite_or_null(r.disjoint_spectra)}}},
        {"norm_hierarchy",
         {{"pass", r.norm_hierarchy}, {"norms", r.norms}, {"marginal_top_norm", r.marginal_top_norm}}},
        {"resonance", {{"pass", r.resonance_pass}, {"margin", finite_or_null(r.resonance_margin)}}},
        {"tolerances",
         {{"gap", tol::kGap}, {"condition_cap", tol::kConditionCap}, {"singular", tol::kSingular}}},
        {"overall", r.overall},
        {"notes", r.notes},
    };
}

Json perturbation_to_json(const PerturbationData& pd) {
    Json d = Json::object();
    for (const auto& [key, m] : pd.d) d[pair_key(key.first, key.second)] = matrix_to_json(m);
    Json ct = Json::object();
    for (const auto& [key, m] : pd.ctilde) ct[pair_key(key.first, key.second)] = matrix_to_json(m);
    Json rows = Json::array();
    for (const CMatrix& row : pd.pert_rows) rows.push_back(matrix_to_json(row));
    return {{"D", std::move(d)}, {"Ctilde", std::move(ct)}, {"pert", std::move(rows)}};
}

Json eigenfunction_to_json(const PrincipalEigenfunction& pe, bool composed_with_pert) {
    return {{"layer", pe.layer},
            {"index", pe.index},
            {"eigenvalue", complex_to_json(pe.eigenvalue)},
            {"coeff_row", matrix_to_json(CMatrix(pe.coeff_row))},
            {"composed_with_pert", composed_with_pert}};
}

Json conjugacy_to_json(const Conjugacy& c) {
    switch (c.kind()) {
        case Conjugacy::Kind::Identity: return {{"kind", "identity"}};
        case Conjugacy::Kind::PolynomialDiagonal: return {{"kind", "polynomialDiagonal"}, {"a", c.coefficients()}};
        case Conjugacy::Kind::UserSupplied: break;
    }
    bad_format("user-supplied conjugacies are not serializable");
}

Conjugacy conjugacy_from_json(const Json& j, const CascadeSystem& sys) {
    const Json& kind = require(j, "kind");
    if (!kind.is_string()) bad_format("conjugacy kind must be a string");
    const std::string k = kind.get<std::string>();
    if (k == "identity") return Conjugacy::identity();
    if (k == "polynomialDiagonal") {
        const Json& a = require(j, "a");
        if (!a.is_array()) bad_format("\"a\" must be an array of per-layer coefficients");
        std::vector<double> coeffs;
        for (const Json& v : a) {
            if (!v.is_number()) bad_format("cubic coefficients must be numbers");
            coeffs.push_back(v.get<double>());
        }
        return make_polynomial_conjugacy(sys, std::move(coeffs));
    }
    bad_format("unknown conjugacy kind \"" + k + "\"");
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_error_series_csv(std::ostream& out, const ErrorSeries& es) {
    out << "t,layer,abs_err,rel_err,bound_a,bound_b_times_norm_pow,log_abs_err,log_rel_err\n";
    for (std::size_t t = 0; t <= es.horizon(); ++t) {
        for (std::size_t k = 0; k < es.layers(); ++k) {
            const double abs_err = es.abs_err[k][t];
            const double rel_err = es.rel_err[k][t];
            out << t << ',' << (k + 1) << ',' << format_double(abs_err) << ',' << format_double(rel_err) << ','
                << format_double(es.bound_a[k][t]) << ',' << format_double(es.bound_b_scaled(k, t)) << ','
                << format_double(std::log(std::max(abs_err, kLogFloor))) << ','
                << format_double(std::log(std::max(rel_err, kLogFloor))) << '\n';
        }
    }
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad_format("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        bad_format(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidFormat, "cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace kcascade
