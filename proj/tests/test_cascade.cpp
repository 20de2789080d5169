#include <doctest.h>

#include "helpers.hpp"
#include "kcascade/error.hpp"

using namespace testing;

TEST_CASE("state vector layering and flattening") {
    const StateVector x = StateVector::unflatten(cvec({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}), {1, 3, 2});
    CHECK(x.layer_count() == 3);
    CHECK(x.dims() == std::vector<std::size_t>{1, 3, 2});
    CHECK(slice(x, 2)(2) == Complex(4.0));
    CHECK(x.slice_range(2, 3).size() == 2);
    CHECK(x.flatten() == cvec({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}));
    CHECK_THROWS_AS((void)x.layer(0), Error);
    CHECK_THROWS_AS((void)x.layer(4), Error);
    CHECK_THROWS_AS((void)StateVector::unflatten(cvec({1.0}), {2}), Error);

    const StateVector y = x + Complex(2.0) * x;
    CHECK(y.layer(3)(1) == Complex(18.0));
    CHECK(composite_norm(scalar_state({3.0, -4.0})) == doctest::Approx(7.0));
    CHECK_THROWS_AS(x + scalar_state({1.0}), Error);

    Rng rng(1);
    const StateVector u = random_unit_state({2, 5, 1}, rng);
    for (const CVector& v : u.layers()) CHECK(v.norm() == doctest::Approx(1.0));
}

TEST_CASE("cascade construction validates structure") {
    CHECK_THROWS_AS(CascadeSystem({}, {}), Error);
    CHECK_THROWS_AS(CascadeSystem({real_matrix(2, 3, {1, 2, 3, 4, 5, 6})}, {}), Error);
    try {
        std::map<LayerPair, CMatrix> c{{{1, 2}, scalar(1.0)}};
        CascadeSystem bad({scalar(0.5), scalar(0.9)}, c);
        FAIL("expected IndexOutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IndexOutOfRange);
    }
    try {
        CascadeSystem::chained({scalar(0.5), scalar(0.9)}, {CMatrix::Ones(2, 1)});
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }

    const CascadeSystem sys = scalar_two_layer();
    CHECK(sys.is_chained());
    CHECK(sys.total_dim() == 2);
    CHECK(sys.coupling(2, 1) != nullptr);
    CHECK(sys.coupling(1, 1) == nullptr);
    CHECK(sys.nominal().coupling(2, 1) == nullptr);
    CHECK((sys.assembled() - real_matrix(2, 2, {0.5, 0, 1, 0.9})).norm() == 0.0);

    std::map<LayerPair, CMatrix> skip{{{3, 1}, scalar(1.0)}};
    const CascadeSystem general({scalar(0.3), scalar(0.5), scalar(0.9)}, skip);
    CHECK_FALSE(general.is_chained());
}

TEST_CASE("condition report on the scalar example") {
    const ConditionReport r = validate_conditions(scalar_two_layer());
    CHECK(r.overall);
    CHECK(r.invertible_diagonalizable);
    CHECK(r.disjoint_spectra == doctest::Approx(0.4));
    CHECK(r.norm_hierarchy);
    CHECK_FALSE(r.marginal_top_norm);
    CHECK(r.resonance_pass);

    const ConditionReport single = validate_conditions(CascadeSystem::chained({scalar(0.5)}, {}));
    CHECK(single.overall);
}

TEST_CASE("each failed condition is reported") {
    // Duplicate eigenvalue across layers.
    const ConditionReport resonant = validate_conditions(
        CascadeSystem::chained({real_matrix(2, 2, {0.5, 0, 0, 0.2}), real_matrix(2, 2, {0.9, 0, 0, 0.5})},
                               {CMatrix::Ones(2, 2)}));
    CHECK_FALSE(resonant.disjoint_pass);
    CHECK_FALSE(resonant.overall);

    // Swapped norms.
    const ConditionReport swapped = validate_conditions(CascadeSystem::chained({scalar(0.9), scalar(0.5)}, {scalar(1.0)}));
    CHECK_FALSE(swapped.norm_hierarchy);
    CHECK_FALSE(swapped.overall);

    // Defective layer.
    const ConditionReport defective = validate_conditions(
        CascadeSystem::chained({scalar(0.1), real_matrix(2, 2, {0.5, 1, 0, 0.5})}, {CMatrix::Ones(2, 1)}));
    CHECK_FALSE(defective.invertible_diagonalizable);
    CHECK_FALSE(defective.overall);

    // Top norm above one.
    const ConditionReport expanding = validate_conditions(CascadeSystem::chained({scalar(0.5), scalar(1.2)}, {scalar(1.0)}));
    CHECK_FALSE(expanding.norm_hierarchy);

    // Top norm exactly one is flagged but allowed.
    const ConditionReport marginal = validate_conditions(CascadeSystem::chained({scalar(0.5), scalar(1.0)}, {scalar(1.0)}));
    CHECK(marginal.marginal_top_norm);
    CHECK(marginal.overall);
}

TEST_CASE("random chained cascades follow the schedule") {
    Rng rng(42);
    const std::vector<double> schedule = geometric_norm_schedule(7, 0.9);
    for (std::size_t k = 0; k < 7; ++k) CHECK(schedule[k] == doctest::Approx(std::pow(0.9, 8.0 - (k + 1.0))));
    const CascadeSystem sys = random_chained_cascade({3, 2, 4, 1, 5, 2, 6}, schedule, rng);
    CHECK(validate_conditions(sys).overall);
    for (std::size_t i = 1; i <= 7; ++i) CHECK(sys.norm(i) == doctest::Approx(schedule[i - 1]).epsilon(1e-12));

    CHECK_THROWS_AS((void)random_chained_cascade({2, 2}, {0.9, 0.5}, rng), Error);
    CHECK_THROWS_AS((void)random_chained_cascade({2, 2}, {0.5, 1.5}, rng), Error);
    CHECK_THROWS_AS((void)random_chained_cascade({2}, {0.5, 0.7}, rng), Error);
}

TEST_CASE("cascade generation is deterministic per seed") {
    const CascadeSystem a = replica(42);
    const CascadeSystem b = replica(42);
    const CascadeSystem c = replica(43);
    CHECK(a.assembled() == b.assembled());
    CHECK(a.dims() == b.dims());
    CHECK((a.dims() != c.dims() || a.assembled() != c.assembled()));
    CHECK(validate_conditions(a).overall);
}

TEST_CASE("composite norm and slicing examples") {
    CHECK(composite_norm(StateVector::zeros({2, 3})) == 0.0);
    const StateVector a(std::vector<CVector>{cvec({3.0, 4.0}), cvec({0.0})});
    CHECK(composite_norm(a) == doctest::Approx(5.0));
    const StateVector b(std::vector<CVector>{cvec({1.0, 0.0}), cvec({0.0, 1.0})});
    CHECK(composite_norm(b) == doctest::Approx(2.0));

    const StateVector x = scalar_state({1.0, 2.0, 3.0});
    CHECK(slice(x, 2)(0) == Complex(2.0));
    CHECK(slice_range(x, 1, 3).size() == 3);
    const std::vector<CVector> mid = slice_range(x, 2, 2);
    REQUIRE(mid.size() == 1);
    CHECK(mid[0](0) == Complex(2.0));
}

TEST_CASE("condition report examples") {
    const ConditionReport r = validate_conditions(scalar_two_layer());
    CHECK(r.resonance_margin == doctest::Approx(4.0 / 9.0));

    const ConditionReport equal = validate_conditions(CascadeSystem::chained({scalar(0.5), scalar(0.5)}, {scalar(1.0)}));
    CHECK(equal.disjoint_spectra == 0.0);
    CHECK_FALSE(equal.overall);

    Rng rng(8);
    CHECK(validate_conditions(random_chained_cascade({2, 3}, {0.81, 0.9}, rng)).overall);
}
