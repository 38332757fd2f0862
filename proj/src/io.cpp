#include "dsparse/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "dsparse/errors.hpp"

namespace dsparse {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
        out.push_back(trim(field));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::optional<double> parse_number(const std::string& field)
{
    if (field.empty())
        return std::nullopt;
    double value = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        return std::nullopt;
    return value;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open \"" + path + "\"");
    return in;
}

bool is_json_path(const std::string& path)
{
    return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

double json_entry(const nlohmann::json& v, const std::string& path)
{
    if (!v.is_number())
        throw InputError(path + ": expected a number, found " + v.dump());
    const double d = v.get<double>();
    if (!std::isfinite(d))
        throw InputError(path + ": value is not finite");
    return d;
}

} // namespace

Matrix parse_csv_matrix(std::istream& in, const std::string& source)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto fields = split_fields(line);
        std::vector<double> row;
        row.reserve(fields.size());
        std::optional<std::size_t> bad;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto v = parse_number(fields[c]);
            if (!v) {
                bad = c;
                break;
            }
            row.push_back(*v);
        }
        const bool header = first_content && bad.has_value();
        first_content = false;
        if (header)
            continue;
        if (bad)
            throw InputError(source + ":" + std::to_string(line_no) + ": column " + std::to_string(*bad + 1)
                             + ": \"" + fields[*bad] + "\" is not a number");
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(source + ":" + std::to_string(line_no) + ": expected "
                             + std::to_string(rows.front().size()) + " columns, found "
                             + std::to_string(row.size()));
        for (std::size_t c = 0; c < row.size(); ++c)
            if (!std::isfinite(row[c]))
                throw InputError(source + ":" + std::to_string(line_no) + ": column " + std::to_string(c + 1)
                                 + ": value is not finite");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw InputError(source + ": no numeric rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

Matrix read_csv_matrix(const std::string& path)
{
    auto in = open_input(path);
    return parse_csv_matrix(in, path);
}

Vector read_csv_vector(const std::string& path)
{
    const Matrix m = read_csv_matrix(path);
    if (m.cols() == 1)
        return m.col(0);
    if (m.rows() == 1)
        return m.row(0).transpose();
    throw InputError(path + ": expected a single row or column, found " + std::to_string(m.rows()) + "x"
                     + std::to_string(m.cols()));
}

nlohmann::json read_json_file(const std::string& path)
{
    auto in = open_input(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

Matrix read_matrix_file(const std::string& path)
{
    if (!is_json_path(path))
        return read_csv_matrix(path);
    const auto j = read_json_file(path);
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw InputError(path + ": expected a nonempty array of rows");
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j.front().size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != j.front().size())
            throw InputError(path + ": row " + std::to_string(r + 1) + " has the wrong length");
        for (std::size_t c = 0; c < j[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = json_entry(j[r][c], path);
    }
    return m;
}

Vector read_vector_file(const std::string& path)
{
    if (!is_json_path(path))
        return read_csv_vector(path);
    const auto j = read_json_file(path);
    if (!j.is_array() || j.empty())
        throw InputError(path + ": expected a nonempty array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = json_entry(j[i], path);
    return v;
}

void write_csv_matrix(std::ostream& os, MatrixCRef m)
{
    const auto old = os.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            os << (c ? "," : "") << m(r, c);
        os << '\n';
    }
    os.precision(old);
}

nlohmann::json vector_to_json(VectorCRef v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

} // namespace dsparse
