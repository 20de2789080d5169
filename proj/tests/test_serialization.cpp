#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "kcascade/error.hpp"
#include "kcascade/observables.hpp"
#include "kcascade/serialization.hpp"

using namespace testing;

namespace {

ErrorCode load_error(const Json& j) {
    try {
        (void)cascade_from_json(j);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected the loader to throw");
    return ErrorCode::PreconditionViolation;
}

Json scalar_layer(double l) {
    return {{"dim", 1}, {"L", matrix_to_json(scalar(l))}};
}

}  // namespace

TEST_CASE("matrices and states round-trip exactly") {
    Rng rng(4);
    CMatrix m = random_uniform_matrix(3, 2, rng);
    m(1, 1) = Complex(0.1, -1.0 / 3.0);
    CHECK(matrix_from_json(Json::parse(matrix_to_json(m).dump())) == m);
    const StateVector x = random_unit_state({2, 1, 3}, rng);
    const StateVector back = state_from_json(Json::parse(state_to_json(x).dump()));
    CHECK(back.flatten() == x.flatten());
    CHECK(back.dims() == x.dims());
    CHECK(complex_from_json(complex_to_json({1.5, -2.0})) == Complex(1.5, -2.0));
}

TEST_CASE("cascade specs round-trip") {
    const CascadeSystem sys = replica(31);
    const LoadedCascade loaded = cascade_from_json(Json::parse(cascade_to_json(sys).dump()));
    CHECK(loaded.system.assembled() == sys.assembled());
    CHECK(loaded.system.is_chained());
    CHECK(loaded.report.overall);

    std::map<LayerPair, CMatrix> skip{{{3, 1}, scalar(1.0)}, {{3, 2}, scalar(2.0)}};
    const CascadeSystem general({scalar(0.3), scalar(0.5), scalar(0.9)}, skip);
    const Json gj = cascade_to_json(general);
    CHECK(gj["layers"][2]["C"].contains("1"));
    const LoadedCascade g = cascade_from_json(gj);
    CHECK_FALSE(g.system.is_chained());
    CHECK(g.system.assembled() == general.assembled());
}

TEST_CASE("loader rejects malformed specs") {
    CHECK(load_error(Json::object()) == ErrorCode::InvalidFormat);
    CHECK(load_error({{"layers", Json::array()}}) == ErrorCode::InvalidFormat);
    CHECK(load_error({{"layers", {{{"dim", 2}, {"L", matrix_to_json(scalar(0.5))}}}}}) == ErrorCode::InvalidFormat);
    CHECK(load_error({{"layers", {{{"dim", 1}, {"L", {{"rows", 1}, {"cols", 1}, {"data", {{1.0}}}}}}}}}) ==
          ErrorCode::InvalidFormat);
    CHECK(load_error({{"layers", {{{"dim", 1}, {"L", {{"rows", 1}, {"cols", 2}, {"data", {{1.0, 0.0}}}}}}}}}) ==
          ErrorCode::InvalidFormat);

    Json first_with_coupling = {{"layers", {scalar_layer(0.5)}}};
    first_with_coupling["layers"][0]["C_prev"] = matrix_to_json(scalar(1.0));
    CHECK(load_error(first_with_coupling) == ErrorCode::InvalidFormat);

    Json wrong_shape = {{"layers", {scalar_layer(0.5), scalar_layer(0.9)}}};
    wrong_shape["layers"][1]["C_prev"] = matrix_to_json(CMatrix::Ones(2, 1));
    CHECK(load_error(wrong_shape) == ErrorCode::InvalidFormat);

    Json downstream = {{"layers", {scalar_layer(0.5), scalar_layer(0.9)}}};
    downstream["layers"][1]["C"] = {{"2", matrix_to_json(scalar(1.0))}};
    CHECK(load_error(downstream) == ErrorCode::InvalidFormat);

    Json bad_key = {{"layers", {scalar_layer(0.5), scalar_layer(0.9)}}};
    bad_key["layers"][1]["C"] = {{"one", matrix_to_json(scalar(1.0))}};
    CHECK(load_error(bad_key) == ErrorCode::InvalidFormat);

    CHECK_THROWS_AS((void)read_json_file("/nonexistent/spec.json"), Error);
}

TEST_CASE("condition reports and perturbation exports") {
    const Json single = condition_report_to_json(validate_conditions(CascadeSystem::chained({scalar(0.5)}, {})));
    CHECK(single["disjoint_spectra"]["min_gap"].is_null());
    CHECK(single["overall"] == true);

    const PerturbationData pd = compute_perturbation(scalar_two_layer());
    const Json pj = perturbation_to_json(pd);
    CHECK(matrix_from_json(pj["D"]["2,1"])(0, 0).real() == doctest::Approx(2.5));
    CHECK(matrix_from_json(pj["Ctilde"]["2,1"])(0, 0).real() == doctest::Approx(2.25));
    CHECK(pj["pert"].size() == 2);

    const Json ej = eigenfunction_to_json(principal_eigenfunction(scalar_two_layer(), 2, 1), true);
    for (const char* key : {"layer", "index", "eigenvalue", "coeff_row", "composed_with_pert"}) CHECK(ej.contains(key));
    CHECK(ej["composed_with_pert"] == true);
}

TEST_CASE("conjugacy specs") {
    const CascadeSystem sys = scalar_two_layer();
    const Conjugacy c = conjugacy_from_json({{"kind", "polynomialDiagonal"}, {"a", {0.1, 0.2}}}, sys);
    CHECK(c.coefficients() == std::vector<double>{0.1, 0.2});
    CHECK(conjugacy_to_json(c)["kind"] == "polynomialDiagonal");
    CHECK(conjugacy_from_json({{"kind", "identity"}}, sys).kind() == Conjugacy::Kind::Identity);
    CHECK_THROWS_AS((void)conjugacy_from_json({{"kind", "spline"}}, sys), Error);
    CHECK_THROWS_AS((void)conjugacy_from_json({{"kind", "polynomialDiagonal"}, {"a", {0.1}}}, sys), Error);
    const Conjugacy user = Conjugacy::user_supplied([](const StateVector& x) { return x; },
                                                    [](const StateVector& x) { return x; });
    CHECK_THROWS_AS((void)conjugacy_to_json(user), Error);
}

TEST_CASE("error series CSV layout") {
    const CascadeSystem sys = scalar_two_layer();
    const PerturbationData pd = compute_perturbation(sys);
    const ErrorSeries es = compute_error_series(sys, pd, scalar_state({1.0, 1.0}), 3);
    std::ostringstream out;
    write_error_series_csv(out, es);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,layer,abs_err,rel_err,bound_a,bound_b_times_norm_pow,log_abs_err,log_rel_err");
    std::getline(in, line);
    CHECK(line.rfind("0,1,0,0,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("0,2,2.5,", 0) == 0);
    std::size_t rows = 2;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4 * 2);

    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}
