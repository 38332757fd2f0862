#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dsparse/norms.hpp"

namespace dsparse {

/// Comma-separated numeric table, rows = samples. A single leading header row
/// is skipped when any of its fields is not a number.
Matrix parse_csv_matrix(std::istream& in, const std::string& source = "<stream>");
Matrix read_csv_matrix(const std::string& path);

/// A CSV holding one column or one row.
Vector read_csv_vector(const std::string& path);

nlohmann::json read_json_file(const std::string& path);

/// CSV as above, or JSON (array of rows / flat array) when the name ends in ".json".
Matrix read_matrix_file(const std::string& path);
Vector read_vector_file(const std::string& path);

void write_csv_matrix(std::ostream& os, MatrixCRef m);

nlohmann::json vector_to_json(VectorCRef v);

} // namespace dsparse
