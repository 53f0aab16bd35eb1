#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tsl/metrics.hpp"
#include "tsl/tensor.hpp"
#include "tsl/tracker.hpp"

namespace tsl {

// CTEN layout: "CTEN", version byte 1, dtype byte (0 float32 pairs, 1 float64
// pairs), ndim byte, ndim little-endian u32 extents, row-major real/imag payload.
enum class CtenPrecision : unsigned char { Single = 0, Double = 1 };

void write_cten(std::filesystem::path const &path, DenseTensor const &tensor,
                CtenPrecision precision = CtenPrecision::Double);
DenseTensor read_cten(std::filesystem::path const &path);

std::string encode_cten(DenseTensor const &tensor, CtenPrecision precision = CtenPrecision::Double);
DenseTensor decode_cten(std::string const &bytes);

struct MaskRow {
  std::size_t t = 0;
  MultiIndex index;
};

struct BudgetRow {
  std::size_t t = 0;
  std::size_t k = 0;
  std::size_t omega_size = 0;
  double expected = 0.0;
};

// Shortest round-trip decimal form, '.' separator.
std::string format_double(double v);

std::string metrics_csv(std::vector<MetricRow> const &rows);
std::string masks_csv(std::vector<MaskRow> const &rows);
std::string trace_csv(std::vector<RunTraceRow> const &rows);
std::string budget_csv(std::vector<BudgetRow> const &rows);

void write_text(std::filesystem::path const &path, std::string const &text);
std::string read_text(std::filesystem::path const &path);

} // namespace tsl
