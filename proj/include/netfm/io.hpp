#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "netfm/network.hpp"

namespace netfm {

// %.9g formatting used for every emitted numeric table.
std::string fmt9(double v);

std::vector<std::pair<int, int>> read_edge_list(const std::string& path);
void write_edge_list(const std::string& path, const Network& net);

/// Parsed dyadic covariate table: header `i,j,<name>...`, one row per
/// ordered pair (X) or per unordered pair i<j (Z).
struct DyadTable {
  int n = 0;  // max index + 1
  std::vector<std::string> names;
  std::vector<std::tuple<int, int, VectorXd>> rows;
};

DyadTable read_dyad_table(const std::string& path);

// Assembles covariates from the optional tables (pass nullptr to omit one),
// checking that every required pair is present exactly once.
Covariates combine_covariates(const DyadTable* x_table, const DyadTable* z_table);

void write_x_table(const std::string& path, const Covariates& cov);
void write_z_table(const std::string& path, const Covariates& cov);

std::vector<std::string> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<std::string>& labels);

}  // namespace netfm
