#pragma once

#include <nlohmann/json.hpp>

#include "ddreach/setrep.hpp"

namespace ddreach {

using json = nlohmann::json;

/// Dense matrices serialize as {"rows", "cols", "data"} with row-major data.
/// Sparse ones (density below 1/4) use {"rows", "cols", "coo": [[i, j, v], ...]}
/// instead; both are accepted on input.
json matrix_to_json(const Matrix& m, bool allow_sparse = true);
Matrix matrix_from_json(const json& j);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

json to_json(const Zonotope& z);
json to_json(const ConstrainedZonotope& z);
json to_json(const MatrixZonotope& m);
json to_json(const ConstrainedMatrixZonotope& m);

Zonotope zonotope_from_json(const json& j);
/// Accepts both zonotope and constrained_zonotope objects.
ConstrainedZonotope cz_from_json(const json& j);
MatrixZonotope mz_from_json(const json& j);
ConstrainedMatrixZonotope cmz_from_json(const json& j);

}  // namespace ddreach
