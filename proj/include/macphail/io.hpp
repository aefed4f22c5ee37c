#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "macphail/config.hpp"
#include "macphail/functional.hpp"

namespace macphail {

// Report tables shared by every CLI subcommand. One schema, two encodings:
// CSV with a version header comment and 17-significant-digit numerics, and
// JSON mirroring the same columns/rows (which is what `export` re-reads).
// Complex values are always split into _re/_im column pairs, so cells are
// scalars: empty, integer, double, or text (big integers ship as decimal
// text to keep them exact).

inline constexpr const char* kSchemaTag = "macphail-lab v1";

using Cell = std::variant<std::monostate, int64_t, double, std::string>;

struct Table {
  std::string command;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

inline std::string cell_to_text(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "";
  if (std::holds_alternative<int64_t>(cell)) return std::to_string(std::get<int64_t>(cell));
  if (std::holds_alternative<double>(cell)) return format_double(std::get<double>(cell));
  return std::get<std::string>(cell);
}

}  // namespace detail

inline void write_csv(const Table& table, std::ostream& os) {
  os << "# " << kSchemaTag << "\n";
  os << "# command=" << table.command << "\n";
  for (const auto& [key, value] : table.meta) os << "# " << key << "=" << value << "\n";
  for (size_t c = 0; c < table.columns.size(); ++c)
    os << (c ? "," : "") << detail::csv_escape(table.columns[c]);
  os << "\n";
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c)
      os << (c ? "," : "") << detail::csv_escape(detail::cell_to_text(row[c]));
    os << "\n";
  }
}

inline void write_json(const Table& table, std::ostream& os) {
  nlohmann::json j;
  j["schema"] = kSchemaTag;
  j["command"] = table.command;
  nlohmann::json meta = nlohmann::json::object();
  for (const auto& [key, value] : table.meta) meta[key] = value;
  j["meta"] = meta;
  j["columns"] = table.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json jrow = nlohmann::json::array();
    for (const Cell& cell : row) {
      if (std::holds_alternative<std::monostate>(cell)) {
        jrow.push_back(nullptr);
      } else if (std::holds_alternative<int64_t>(cell)) {
        jrow.push_back(std::get<int64_t>(cell));
      } else if (std::holds_alternative<double>(cell)) {
        double v = std::get<double>(cell);
        // JSON has no inf/nan literals; ship them as the CSV spelling
        if (std::isfinite(v))
          jrow.push_back(v);
        else
          jrow.push_back(format_double(v));
      } else {
        jrow.push_back(std::get<std::string>(cell));
      }
    }
    rows.push_back(std::move(jrow));
  }
  j["rows"] = rows;
  os << j.dump(2) << "\n";
}

inline Table read_json_table(std::istream& is) {
  nlohmann::json j = nlohmann::json::parse(is);
  if (!j.contains("schema") || j["schema"] != kSchemaTag)
    throw std::invalid_argument("not a macphail-lab report (schema mismatch)");
  Table table;
  table.command = j.value("command", "");
  if (j.contains("meta"))
    for (auto it = j["meta"].begin(); it != j["meta"].end(); ++it)
      table.meta.emplace_back(it.key(), it.value().get<std::string>());
  table.columns = j["columns"].get<std::vector<std::string>>();
  for (const auto& jrow : j["rows"]) {
    std::vector<Cell> row;
    for (const auto& cell : jrow) {
      if (cell.is_null())
        row.emplace_back(std::monostate{});
      else if (cell.is_number_integer())
        row.emplace_back(cell.get<int64_t>());
      else if (cell.is_number_float())
        row.emplace_back(cell.get<double>());
      else
        row.emplace_back(cell.get<std::string>());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// User-supplied finite sequences
// ---------------------------------------------------------------------------

// JSON shape:
//   { "field": "complex"|"real", "p": 1.5,
//     "vectors": [ [ [coord, scalar], ... ], ... ] }
// where scalar is a number, a decimal string, or a [re, im] pair.
struct ImportedSequence {
  Field field = Field::real_walsh;
  FiniteSequence<std::complex<double>> complex_seq;
  FiniteSequence<double> real_seq;
};

namespace detail {

inline double scalar_part(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    size_t used = 0;
    std::string s = j.get<std::string>();
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad decimal scalar '" + s + "'");
    return v;
  }
  throw std::invalid_argument("scalar must be a number or decimal string");
}

inline std::complex<double> parse_scalar(const nlohmann::json& j) {
  if (j.is_array()) {
    if (j.size() != 2) throw std::invalid_argument("complex scalar must be [re, im]");
    return {scalar_part(j[0]), scalar_part(j[1])};
  }
  return {scalar_part(j), 0.0};
}

}  // namespace detail

inline ImportedSequence parse_finite_sequence(std::istream& is) {
  nlohmann::json j = nlohmann::json::parse(is);
  ImportedSequence out;
  std::string field = j.value("field", "real");
  if (field == "complex")
    out.field = Field::complex_dft;
  else if (field == "real")
    out.field = Field::real_walsh;
  else
    throw std::invalid_argument("field must be 'complex' or 'real'");
  double p = j.value("p", 2.0);
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("p must lie in [1,2]");
  if (!j.contains("vectors") || !j["vectors"].is_array())
    throw std::invalid_argument("missing 'vectors' array");
  out.complex_seq.p = p;
  out.real_seq.p = p;
  for (const auto& jvec : j["vectors"]) {
    SparseVector<std::complex<double>> cvec;
    SparseVector<double> rvec;
    for (const auto& jentry : jvec) {
      if (!jentry.is_array() || jentry.size() != 2)
        throw std::invalid_argument("vector entries must be [coordinate, scalar] pairs");
      uint64_t coord = jentry[0].get<uint64_t>();
      if (coord == 0) throw std::invalid_argument("coordinates are 1-based");
      std::complex<double> value = detail::parse_scalar(jentry[1]);
      if (out.field == Field::real_walsh) {
        if (value.imag() != 0.0)
          throw std::invalid_argument("real sequences cannot carry imaginary parts");
        rvec.entries.emplace_back(coord, value.real());
      } else {
        cvec.entries.emplace_back(coord, value);
      }
    }
    if (out.field == Field::real_walsh)
      out.real_seq.vectors.push_back(std::move(rvec));
    else
      out.complex_seq.vectors.push_back(std::move(cvec));
  }
  return out;
}

}  // namespace macphail
