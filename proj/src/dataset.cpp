#include "un/dataset.hpp"

#include <cmath>
#include <string>

#include "un/csv.hpp"
#include "un/errors.hpp"

namespace un {

void Dataset::validate() const {
  const std::size_t rows = X.rows();
  if (rows < 2) throw SchemaError("dataset: need at least 2 units");
  if (X.cols() < 1) throw SchemaError("dataset: design matrix has no columns");
  if (z.size() != rows || y.size() != rows || ids.size() != rows)
    throw SchemaError("dataset: ids/z/y lengths do not match the design matrix");
  bool any_treated = false, any_control = false;
  for (std::size_t i = 0; i < rows; ++i) {
    if (z[i] == 1.0)
      any_treated = true;
    else if (z[i] == 0.0)
      any_control = true;
    else
      throw SchemaError("dataset: z must be 0 or 1 (row " + std::to_string(i) + ")");
    if (X(i, 0) != 1.0)
      throw SchemaError("dataset: first design column must be all ones (row " +
                        std::to_string(i) + ")");
    for (std::size_t j = 0; j < X.cols(); ++j)
      if (!std::isfinite(X(i, j)))
        throw SchemaError("dataset: non-finite covariate at row " +
                          std::to_string(i) + ", column " + std::to_string(j));
    if (!std::isfinite(y[i]))
      throw SchemaError("dataset: non-finite y (row " + std::to_string(i) + ")");
    if (outcome_type == OutcomeType::binary && y[i] != 0.0 && y[i] != 1.0)
      throw SchemaError("dataset: binary y must be 0 or 1 (row " +
                        std::to_string(i) + ")");
  }
  if (!any_treated) throw SchemaError("dataset: no treated units (z column is all 0)");
  if (!any_control) throw SchemaError("dataset: no control units (z column is all 1)");
}

std::vector<std::size_t> Dataset::treated_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] == 1.0) out.push_back(i);
  return out;
}

std::vector<std::size_t> Dataset::control_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] == 0.0) out.push_back(i);
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.outcome_type = outcome_type;
  out.X = Matrix(rows.size(), X.cols());
  out.ids.reserve(rows.size());
  out.z.reserve(rows.size());
  out.y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    out.ids.push_back(ids[i]);
    out.z.push_back(z[i]);
    out.y.push_back(y[i]);
    for (std::size_t j = 0; j < X.cols(); ++j) out.X(r, j) = X(i, j);
  }
  return out;
}

namespace {

double parse_number(const std::string& cell, const std::string& column,
                    std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("csv: column \"" + column + "\" row " + std::to_string(row) +
                      ": cannot parse \"" + cell + "\" as a number");
  }
}

}  // namespace

Dataset load_dataset_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 4 || t.header[0] != "id" || t.header[1] != "z" ||
      t.header[2] != "y")
    throw SchemaError(
        "csv: header must start with id,z,y followed by at least one covariate "
        "column");
  for (std::size_t j = 3; j < t.header.size(); ++j) {
    const std::string want = "x" + std::to_string(j - 2);
    if (t.header[j] != want)
      throw SchemaError("csv: covariate column " + std::to_string(j + 1) +
                        " must be named \"" + want + "\", got \"" + t.header[j] +
                        "\"");
  }
  const std::size_t n = t.rows.size();
  const std::size_t n_cov = t.header.size() - 3;
  Dataset d;
  d.X = Matrix(n, n_cov + 1);  // intercept prepended
  d.ids.reserve(n);
  d.z.reserve(n);
  d.y.reserve(n);
  bool y_binary = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = t.rows[i];
    d.ids.push_back(row[0]);
    const double zi = parse_number(row[1], "z", i + 1);
    if (zi != 0.0 && zi != 1.0)
      throw SchemaError("csv: column \"z\" row " + std::to_string(i + 1) +
                        ": must be 0 or 1, got \"" + row[1] + "\"");
    d.z.push_back(zi);
    const double yi = parse_number(row[2], "y", i + 1);
    d.y.push_back(yi);
    if (yi != 0.0 && yi != 1.0) y_binary = false;
    d.X(i, 0) = 1.0;
    for (std::size_t j = 0; j < n_cov; ++j)
      d.X(i, j + 1) = parse_number(row[3 + j], t.header[3 + j], i + 1);
  }
  d.outcome_type = y_binary ? OutcomeType::binary : OutcomeType::continuous;
  d.validate();
  return d;
}

}  // namespace un
