#include "netfm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace netfm {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace and any trailing carriage return.
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

int parse_id(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": bad node id '" + s + "'");
  }
}

double parse_real(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": bad numeric field '" + s + "'");
  }
}

}  // namespace

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::pair<int, int>> read_edge_list(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_csv(line);
  if (header.size() != 2 || header[0] != "src" || header[1] != "dst")
    throw std::runtime_error(path + ": expected header 'src,dst'");
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 2) throw std::runtime_error(path + ": malformed edge row '" + line + "'");
    edges.emplace_back(parse_id(f[0], path), parse_id(f[1], path));
  }
  return edges;
}

void write_edge_list(const std::string& path, const Network& net) {
  std::ofstream out = open_out(path);
  out << "src,dst\n";
  for (int i = 0; i < net.n(); ++i)
    for (int j = 0; j < net.n(); ++j)
      if (i != j && net.edge(i, j)) out << i << ',' << j << '\n';
}

DyadTable read_dyad_table(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "i" || header[1] != "j")
    throw std::runtime_error(path + ": expected header 'i,j,<name>,...'");
  DyadTable t;
  t.names.assign(header.begin() + 2, header.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != header.size()) throw std::runtime_error(path + ": malformed row '" + line + "'");
    const int i = parse_id(f[0], path), j = parse_id(f[1], path);
    VectorXd v(static_cast<Eigen::Index>(t.names.size()));
    for (std::size_t k = 0; k < t.names.size(); ++k) v(static_cast<Eigen::Index>(k)) = parse_real(f[k + 2], path);
    t.rows.emplace_back(i, j, std::move(v));
    t.n = std::max(t.n, std::max(i, j) + 1);
  }
  return t;
}

Covariates combine_covariates(const DyadTable* x_table, const DyadTable* z_table) {
  if (!x_table && !z_table) throw std::runtime_error("no covariate tables given");
  const int n = std::max(x_table ? x_table->n : 0, z_table ? z_table->n : 0);
  if (n < 2) throw std::runtime_error("covariate tables imply fewer than 2 nodes");
  Covariates cov(n, x_table ? static_cast<int>(x_table->names.size()) : 0,
                 z_table ? static_cast<int>(z_table->names.size()) : 0);
  if (x_table) {
    cov.x_names = x_table->names;
    std::set<std::pair<int, int>> seen;
    for (const auto& [i, j, v] : x_table->rows) {
      if (i == j || i >= n || j >= n) throw std::runtime_error("X table: invalid pair");
      if (!seen.insert({i, j}).second) throw std::runtime_error("X table: duplicate ordered pair");
      cov.set_x(i, j, v);
    }
    if (static_cast<int>(seen.size()) != n * (n - 1))
      throw std::runtime_error("X table: must list every ordered pair");
  }
  if (z_table) {
    cov.z_names = z_table->names;
    std::set<std::pair<int, int>> seen;
    for (const auto& [i, j, v] : z_table->rows) {
      if (i >= j || j >= n) throw std::runtime_error("Z table: rows must have i < j");
      if (!seen.insert({i, j}).second) throw std::runtime_error("Z table: duplicate pair");
      cov.set_z(i, j, v);
    }
    if (static_cast<int>(seen.size()) != n * (n - 1) / 2)
      throw std::runtime_error("Z table: must list every unordered pair");
  }
  return cov;
}

namespace {

void write_table(std::ofstream& out, const std::vector<std::string>& names) {
  out << "i,j";
  for (const auto& nm : names) out << ',' << nm;
  out << '\n';
}

}  // namespace

void write_x_table(const std::string& path, const Covariates& cov) {
  std::ofstream out = open_out(path);
  write_table(out, cov.x_names.value_or(std::vector<std::string>(cov.dim_x(), "x")));
  for (int i = 0; i < cov.n(); ++i)
    for (int j = 0; j < cov.n(); ++j) {
      if (i == j) continue;
      out << i << ',' << j;
      for (int k = 0; k < cov.dim_x(); ++k) out << ',' << fmt9(cov.x(i, j)(k));
      out << '\n';
    }
}

void write_z_table(const std::string& path, const Covariates& cov) {
  std::ofstream out = open_out(path);
  write_table(out, cov.z_names.value_or(std::vector<std::string>(cov.dim_z(), "z")));
  for (int i = 0; i < cov.n(); ++i)
    for (int j = i + 1; j < cov.n(); ++j) {
      out << i << ',' << j;
      for (int k = 0; k < cov.dim_z(); ++k) out << ',' << fmt9(cov.z(i, j)(k));
      out << '\n';
    }
}

std::vector<std::string> read_labels(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_csv(line);
  if (header.size() != 2 || header[0] != "id" || header[1] != "label")
    throw std::runtime_error(path + ": expected header 'id,label'");
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 2) throw std::runtime_error(path + ": malformed label row");
    const int id = parse_id(f[0], path);
    if (id >= static_cast<int>(labels.size())) labels.resize(id + 1);
    labels[id] = f[1];
  }
  return labels;
}

void write_labels(const std::string& path, const std::vector<std::string>& labels) {
  std::ofstream out = open_out(path);
  out << "id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

}  // namespace netfm
