#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "kcascade/cascade.hpp"
#include "kcascade/conjugacy.hpp"
#include "kcascade/observables.hpp"
#include "kcascade/orbit.hpp"
#include "kcascade/perturbation.hpp"
#include "kcascade/state.hpp"

namespace kcascade {

using Json = nlohmann::json;

// Complex numbers are always [re, im]; matrices are
// {"rows": r, "cols": c, "data": [[re, im], ...]} in row-major order.
[[nodiscard]] Json complex_to_json(Complex z);
[[nodiscard]] Complex complex_from_json(const Json& j);
[[nodiscard]] Json matrix_to_json(const CMatrix& m);
[[nodiscard]] CMatrix matrix_from_json(const Json& j);

/// {"layers": [[[re, im], ...], ...]}
[[nodiscard]] Json state_to_json(const StateVector& x);
[[nodiscard]] StateVector state_from_json(const Json& j);

/// {"layers": [{"dim": d, "L": M}, {"dim": d, "L": M, "C_prev": M}, ...]} for
/// chained cascades; general cascades carry "C": {"j": M, ...} per layer.
[[nodiscard]] Json cascade_to_json(const CascadeSystem& sys);

struct LoadedCascade {
    CascadeSystem system;
    ConditionReport report;
};

/// Parses and shape-checks a cascade spec, then validates it.
[[nodiscard]] LoadedCascade cascade_from_json(const Json& j);

[[nodiscard]] Json condition_report_to_json(const ConditionReport& r);

/// {"D": {"i,j": M}, "Ctilde": {"i,j": M}, "pert": [row-block M per layer]}
[[nodiscard]] Json perturbation_to_json(const PerturbationData& pd);

/// {"layer": i, "index": s, "eigenvalue": [re, im], "coeff_row": M, "composed_with_pert": b}
[[nodiscard]] Json eigenfunction_to_json(const PrincipalEigenfunction& pe, bool composed_with_pert);

/// {"kind": "polynomialDiagonal", "a": [...]} or {"kind": "identity"}.
/// User-supplied conjugacies cannot be serialized (InvalidFormat).
[[nodiscard]] Json conjugacy_to_json(const Conjugacy& c);
[[nodiscard]] Conjugacy conjugacy_from_json(const Json& j, const CascadeSystem& sys);

/// Header and one row per (t, layer):
/// t,layer,abs_err,rel_err,bound_a,bound_b_times_norm_pow,log_abs_err,log_rel_err
void write_error_series_csv(std::ostream& out, const ErrorSeries& es);

/// Round-trippable decimal ("%.17g"), with "inf"/"-inf"/"nan" spelled out.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace kcascade
