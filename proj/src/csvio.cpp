#include "pseudoproc/csvio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pseudoproc/errors.hpp"
#include "pseudoproc/numeric.hpp"

namespace pseudoproc {

namespace {

bool parse_cell(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) {
    --end;
  }
  if (begin == end) return false;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool blank(const std::string& line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  }
  return true;
}

}  // namespace

Sample ingest_csv(const std::string& path, int dim) {
  require(dim >= 1, Errc::invalid_argument, "ingest: dimension must be >= 1");
  std::ifstream in(path);
  require(in.good(), Errc::io, "ingest: cannot open '" + path + "'");

  std::vector<double> data;
  std::string line;
  std::int64_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (!header_seen) {
      header_seen = true;  // first non-blank line is the header
      continue;
    }
    const auto cells = split_commas(line);
    if (static_cast<int>(cells.size()) != dim) {
      std::ostringstream os;
      os << "ingest: line " << line_no << ": expected " << dim
         << " columns, found " << cells.size();
      fail(Errc::parse, os.str());
    }
    for (int j = 0; j < dim; ++j) {
      double v = 0.0;
      if (!parse_cell(cells[static_cast<std::size_t>(j)], v)) {
        std::ostringstream os;
        os << "ingest: line " << line_no << ": non-numeric cell '"
           << cells[static_cast<std::size_t>(j)] << "'";
        fail(Errc::parse, os.str());
      }
      data.push_back(v);
    }
  }
  require(header_seen, Errc::io, "ingest: empty file '" + path + "'");
  require(!data.empty(), Errc::io,
          "ingest: no data rows in '" + path + "' (header only)");
  return Sample(std::move(data), dim, path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Errc::io, "cannot open '" + path + "' for writing");
  out << content;
  require(out.good(), Errc::io, "write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string paths_to_csv(const std::vector<ProcessPath>& paths) {
  require(!paths.empty(), Errc::invalid_argument, "paths_to_csv: no paths");
  const std::size_t width = paths.front().index.empty()
                                ? 0
                                : paths.front().index.front().size();
  std::ostringstream os;
  os << "rep,grid_id";
  for (std::size_t j = 0; j < width; ++j) os << ",index_" << j;
  os << ",value\n";
  for (std::size_t r = 0; r < paths.size(); ++r) {
    const ProcessPath& p = paths[r];
    for (std::size_t g = 0; g < p.values.size(); ++g) {
      os << r << ',' << g;
      for (std::size_t j = 0; j < width; ++j) {
        os << ',' << format_double(p.index[g][j]);
      }
      os << ',' << format_double(p.values[g]) << '\n';
    }
  }
  return os.str();
}

std::string covariance_to_csv(const CovarianceEstimate& est) {
  std::ostringstream os;
  os << "row,col,row_label,col_label,value,se\n";
  for (Eigen::Index i = 0; i < est.cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < est.cov.cols(); ++j) {
      os << i << ',' << j << ',' << est.labels[static_cast<std::size_t>(i)]
         << ',' << est.labels[static_cast<std::size_t>(j)] << ','
         << format_double(est.cov(i, j)) << ',' << format_double(est.se(i, j))
         << '\n';
    }
  }
  return os.str();
}

}  // namespace pseudoproc
