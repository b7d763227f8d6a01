#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "vmpladmm/problems.hpp"
#include "vmpladmm/trace.hpp"

namespace vmpladmm::app {

/// Formats with 17 significant digits (round-trips a double).
std::string format_real(double v);

void write_matrix_csv(const std::filesystem::path& path, const Matrix<double>& m);
Matrix<double> read_matrix_csv(const std::filesystem::path& path);

std::vector<std::string> trace_columns();
void write_trace_csv(std::ostream& os, const std::vector<TraceRecord<double>>& trace);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord<double>>& trace);

/// instance.json (generator, seed, parameters) plus one CSV per stored matrix.
void save_instance(const std::filesystem::path& dir, const BenchmarkInstance<double>& inst);
BenchmarkInstance<double> load_instance(const std::filesystem::path& dir);

}  // namespace vmpladmm::app
