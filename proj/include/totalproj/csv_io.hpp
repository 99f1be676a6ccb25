#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "totalproj/linear_model.hpp"
#include "totalproj/mdp_sim.hpp"
#include "totalproj/total_projections.hpp"

namespace totalproj {

// Doubles are written with round-trip precision so identical runs produce
// byte-identical files.
std::string format_double(double x);

// System CSV: header phi_0..phi_{n-1},v,d with one row per equation.
void write_system_csv(const OverdeterminedSystem& sys, const std::filesystem::path& path);
OverdeterminedSystem read_system_csv(const std::filesystem::path& path);

// Trace CSV: k,err,g,theta,alpha,skipped.
void write_trace_csv(const SolveTrace& trace, const std::filesystem::path& path);

// MRP serialization: P/R/Phi CSV triplet plus a JSON metadata file carrying
// {m, n, gamma, seed}.
void write_mrp(const MarkovRewardProcess& mrp, const FeatureMap& features,
               std::uint64_t seed, const std::filesystem::path& dir,
               const std::string& stem);
struct LoadedMrp {
  MarkovRewardProcess mrp;
  FeatureMap features;
  std::uint64_t seed;
};
LoadedMrp read_mrp(const std::filesystem::path& dir, const std::string& stem);

// Generic column table with a schema tag and a config echo, written as
// comment lines ahead of the header. Column/row shape is validated on write.
struct CsvTable {
  std::string schema;
  std::string config_echo;  // single-line JSON
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_table_csv(const CsvTable& table, const std::filesystem::path& path);

}  // namespace totalproj
