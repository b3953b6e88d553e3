#include "ajc/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ajc/errors.hpp"

namespace ajc::io {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, std::string_view what) {
  throw ConfigError(fmt::format("{}:{}: {}", source, line, what));
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{:.17g}", v);
}

MatrixMarketData read_matrix_market(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) fail(source, 0, "empty MatrixMarket file");
  ++lineno;
  {
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
      fail(source, lineno, "expected '%%MatrixMarket matrix coordinate' banner");
    if (lower(field) != "real" && lower(field) != "double" && lower(field) != "integer")
      fail(source, lineno, "unsupported field '" + field + "'");
    if (lower(symmetry) != "general") fail(source, lineno, "only general symmetry is supported");
  }
  MatrixMarketData data;
  std::size_t declared = 0;
  bool have_size = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    std::istringstream fields(line);
    if (!have_size) {
      if (!(fields >> data.rows >> data.cols >> declared)) fail(source, lineno, "bad size line");
      have_size = true;
      data.entries.reserve(declared);
      continue;
    }
    long long r = 0, c = 0;
    double v = 0.0;
    if (!(fields >> r >> c >> v)) fail(source, lineno, "bad entry line");
    if (r < 1 || c < 1 || static_cast<std::size_t>(r) > data.rows || static_cast<std::size_t>(c) > data.cols)
      fail(source, lineno, "entry index out of range");
    data.entries.push_back({static_cast<std::size_t>(r - 1), static_cast<std::size_t>(c - 1), v});
  }
  if (!have_size) fail(source, lineno, "missing size line");
  if (data.entries.size() != declared)
    fail(source, lineno, fmt::format("declared {} entries, found {}", declared, data.entries.size()));
  return data;
}

MatrixMarketData read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_matrix_market(in, path.string());
}

void write_matrix_market(std::ostream& out, const CsrMatrix& m, std::string_view comment) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) out << "% " << comment << '\n';
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto cols = m.row_cols(r);
    auto vals = m.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p)
      out << r + 1 << ' ' << cols[p] + 1 << ' ' << format_number(vals[p]) << '\n';
  }
}

void write_matrix_market(std::ostream& out, const SparseRateMatrix& q, std::string_view comment) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < q.size(); ++i) {
    t.push_back({i, i, -q.outbound(i)});
    auto cols = q.row_cols(i);
    auto rates = q.row_rates(i);
    for (std::size_t p = 0; p < cols.size(); ++p) t.push_back({i, cols[p], rates[p]});
  }
  write_matrix_market(out, CsrMatrix::from_triplets(q.size(), q.size(), std::move(t)), comment);
}

SparseRateMatrix read_generator(const std::filesystem::path& path) {
  const auto data = read_matrix_market(path);
  if (data.rows != data.cols) throw ConfigError(path.string() + ": generator must be square");
  if (data.rows == 0) throw ConfigError(path.string() + ": generator has no states");
  std::vector<RateEntry> entries;
  entries.reserve(data.entries.size());
  bool has_diagonal = false;
  for (const auto& t : data.entries) {
    entries.push_back({t.row, t.col, t.value});
    has_diagonal = has_diagonal || t.row == t.col;
  }
  const auto q = has_diagonal ? SparseRateMatrix::from_entries(data.rows, std::move(entries))
                              : SparseRateMatrix::from_off_diagonal(data.rows, std::move(entries));
  const auto violations = validate_generator(q);
  if (!violations.empty()) throw ConfigError(path.string() + ": " + describe(violations.front()));
  return q.normalized();
}

void write_jump_matrix(const JumpMatrix& j, const std::filesystem::path& stem) {
  auto mtx = stem;
  mtx += ".mtx";
  auto side = stem;
  side += ".json";
  {
    auto out = open_output(mtx);
    write_matrix_market(out, j.rows(), fmt::format("jump matrix: N={} M={} flat(i,k)=k*N+i", j.states(), j.blocks()));
  }
  nlohmann::ordered_json h;
  h["N"] = j.states();
  h["M"] = j.blocks();
  h["nnz"] = j.nnz();
  h["indexing"] = "flat(i,k) = k*N + i, 0-based; MatrixMarket indices are 1-based";
  h["edges"] = j.grid().edges();
  std::vector<double> survival(j.indexer().size());
  for (std::size_t a = 0; a < survival.size(); ++a) survival[a] = j.closed_form_survival(a);
  h["survival"] = survival;
  auto out = open_output(side);
  out << h.dump(2) << '\n';
}

void write_csv(std::ostream& out, const SpaceTimeVector& v, std::string_view value_name) {
  out << "state,block," << value_name << '\n';
  for (std::size_t k = 0; k < v.indexer.blocks(); ++k)
    for (std::size_t i = 0; i < v.indexer.states(); ++i) out << i << ',' << k << ',' << format_number(v.at(i, k)) << '\n';
}

void write_csv(std::ostream& out, const SpatialVector& v, std::string_view value_name) {
  out << "state," << value_name << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) out << i << ',' << format_number(v[i]) << '\n';
}

void write_trajectories_csv(std::ostream& out, const std::vector<TrajectorySample>& paths) {
  out << "trajectory,state_index,jump_time\n";
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (const auto& pt : paths[p].points) out << p << ',' << pt.state << ',' << format_number(pt.time) << '\n';
}

void write_convergence_csv(std::ostream& out, const ConvergenceStudy& study) {
  out << "dt,epsilon_2norm,epsilon_frobenius\n";
  for (const auto& r : study.rows)
    out << format_number(r.dt) << ',' << format_number(r.error.spectral) << ',' << format_number(r.error.frobenius)
        << '\n';
  if (study.slope) out << "# slope " << format_number(*study.slope) << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.exceptions(std::ios::badbit);
  return out;
}

}  // namespace ajc::io
