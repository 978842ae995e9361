#include "ddreach/serialize.hpp"

namespace ddreach {

json matrix_to_json(const Matrix& m, bool allow_sparse) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  const Index nnz = (m.array() != 0.0).count();
  if (allow_sparse && m.size() > 64 && 4 * nnz < m.size()) {
    json coo = json::array();
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c)
        if (m(r, c) != 0.0) coo.push_back({r, c, m(r, c)});
    j["coo"] = std::move(coo);
    return j;
  }
  std::vector<double> data;
  data.reserve(m.size());
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from_json(const json& j) {
  if (j.is_array()) {
    // Nested row arrays, convenient for hand-written configs.
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      if (static_cast<Index>(j[r].size()) != cols) throw DimensionError("matrix: ragged rows");
      for (Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
  }
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  if (rows < 0 || cols < 0) throw DimensionError("matrix: negative shape");
  Matrix m = Matrix::Zero(rows, cols);
  if (j.contains("coo")) {
    for (const auto& e : j["coo"]) {
      const Index r = e.at(0).get<Index>(), c = e.at(1).get<Index>();
      if (r < 0 || r >= rows || c < 0 || c >= cols) throw DimensionError("matrix: coo index out of range");
      m(r, c) = e.at(2).get<double>();
    }
    return m;
  }
  const auto& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows * cols) {
    throw DimensionError("matrix: data length differs from rows * cols");
  }
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = data[r * cols + c].get<double>();
  return m;
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

json to_json(const Zonotope& z) {
  return {{"type", "zonotope"}, {"center", vector_to_json(z.c)}, {"generators", matrix_to_json(z.G)}};
}

json to_json(const ConstrainedZonotope& z) {
  json j = {{"type", "constrained_zonotope"},
            {"center", vector_to_json(z.c)},
            {"generators", matrix_to_json(z.G)}};
  j["constraints"] = {{"A", matrix_to_json(z.A)}, {"b", vector_to_json(z.b)}};
  return j;
}

json to_json(const MatrixZonotope& m) {
  json gens = json::array();
  for (const Matrix& g : m.G) gens.push_back(matrix_to_json(g));
  return {{"type", "matrix_zonotope"}, {"center", matrix_to_json(m.C)}, {"generators", gens}};
}

json to_json(const ConstrainedMatrixZonotope& m) {
  json j = to_json(m.unconstrained());
  j["type"] = "constrained_matrix_zonotope";
  j["constraints"] = {{"A", matrix_to_json(m.A)}, {"b", vector_to_json(m.b)}};
  return j;
}

namespace {

void expect_type(const json& j, std::initializer_list<const char*> allowed) {
  if (!j.contains("type")) return;
  const std::string t = j["type"].get<std::string>();
  for (const char* a : allowed)
    if (t == a) return;
  throw std::invalid_argument("unexpected set type '" + t + "'");
}

Matrix generators_or_empty(const json& j, Index rows) {
  if (!j.contains("generators")) return Matrix(rows, 0);
  Matrix g = matrix_from_json(j["generators"]);
  if (g.size() == 0) g.resize(rows, 0);
  return g;
}

}  // namespace

Zonotope zonotope_from_json(const json& j) {
  expect_type(j, {"zonotope"});
  Vector c = vector_from_json(j.at("center"));
  Matrix g = generators_or_empty(j, c.size());
  return Zonotope(std::move(c), std::move(g));
}

ConstrainedZonotope cz_from_json(const json& j) {
  expect_type(j, {"zonotope", "constrained_zonotope"});
  Vector c = vector_from_json(j.at("center"));
  Matrix g = generators_or_empty(j, c.size());
  Matrix A(0, g.cols());
  Vector b(0);
  if (j.contains("constraints")) {
    A = matrix_from_json(j["constraints"].at("A"));
    b = vector_from_json(j["constraints"].at("b"));
  }
  return ConstrainedZonotope(std::move(c), std::move(g), std::move(A), std::move(b));
}

MatrixZonotope mz_from_json(const json& j) {
  expect_type(j, {"matrix_zonotope"});
  std::vector<Matrix> gens;
  for (const auto& g : j.at("generators")) gens.push_back(matrix_from_json(g));
  return MatrixZonotope(matrix_from_json(j.at("center")), std::move(gens));
}

ConstrainedMatrixZonotope cmz_from_json(const json& j) {
  expect_type(j, {"matrix_zonotope", "constrained_matrix_zonotope"});
  json plain = j;
  plain["type"] = "matrix_zonotope";
  MatrixZonotope m = mz_from_json(plain);
  Matrix A(0, m.num_generators());
  Vector b(0);
  if (j.contains("constraints")) {
    A = matrix_from_json(j["constraints"].at("A"));
    b = vector_from_json(j["constraints"].at("b"));
  }
  return ConstrainedMatrixZonotope(std::move(m.C), std::move(m.G), std::move(A), std::move(b));
}

}  // namespace ddreach
