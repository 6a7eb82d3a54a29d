#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgclstm/matrix.hpp"

namespace tgclstm {

inline constexpr std::int64_t kDefaultStepSeconds = 300;

struct NormalizationRecord {
  std::string method = "train-max";
  double scale = 1.0;  // mph per normalised unit
};

/// Speeds in mph (or normalised units once `normalization` is set), one row
/// per timestamp, columns in graph node order.
struct SpeedDataset {
  std::vector<std::string> node_ids;
  std::vector<std::int64_t> timestamps;  // seconds since 1970-01-01T00:00:00Z
  Matrix speeds;                         // steps × nodes, NaN = missing
  std::int64_t step_seconds = kDefaultStepSeconds;
  std::optional<NormalizationRecord> normalization;

  std::size_t steps() const noexcept { return speeds.rows(); }
  std::size_t nodes() const noexcept { return speeds.cols(); }
  std::size_t missing_cells() const noexcept;
};

/// "YYYY-MM-DDTHH:MM[:SS][Z]" (a space may replace the T), UTC.
std::int64_t parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t seconds);

/// Reads `timestamp,<id1>,<id2>,...` and reorders columns into `node_ids`
/// order. Empty cells become NaN. Throws ValidationError for unknown or missing
/// node columns and for timestamp gaps (listing the missing ranges), and
/// FormatError for ragged rows or non-numeric cells.
SpeedDataset load_speed_csv(const std::filesystem::path& path,
                            std::span<const std::string> node_ids,
                            std::int64_t step_seconds = kDefaultStepSeconds);
SpeedDataset load_speed_csv(const std::filesystem::path& path,
                            const std::filesystem::path& node_id_file,
                            std::int64_t step_seconds = kDefaultStepSeconds);
void save_speed_csv(const std::filesystem::path& path, const SpeedDataset& dataset);

enum class ImputePolicy { kForwardFillThenBackfill, kNodeMean };
ImputePolicy parse_impute_policy(std::string_view name);

struct ImputeResult {
  SpeedDataset dataset;
  std::size_t imputed_cells = 0;
};

/// Fills every NaN. Throws ValidationError naming the node if a column has no
/// observation at all.
ImputeResult impute_missing(const SpeedDataset& dataset,
                            ImputePolicy policy = ImputePolicy::kForwardFillThenBackfill);

/// Chronological train/validation/test fractions.
struct SplitFractions {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;

  void validate() const;
};
/// Parses "0.7,0.1,0.2".
SplitFractions parse_split(std::string_view text);

struct SplitRows {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};
/// train = ⌊f_train·rows⌋, validation = ⌊f_val·rows⌋, test gets the rest.
SplitRows split_rows(std::size_t rows, const SplitFractions& fractions);

/// Divides by the maximum speed of the training rows only. Throws
/// ValidationError if that maximum is not positive.
SpeedDataset normalize(const SpeedDataset& dataset, const SplitFractions& fractions);
Vector denormalize(std::span<const double> values, const NormalizationRecord& record);

/// T consecutive rows and the row right after them.
struct WindowedSample {
  Matrix input;   // T × N
  Vector target;  // N
  std::size_t start_row = 0;
};

struct WindowSplits {
  std::vector<WindowedSample> train;
  std::vector<WindowedSample> validation;
  std::vector<WindowedSample> test;
};

/// rows_in_split − T windows per split; none straddles a boundary. Throws
/// ValidationError if a split has fewer than T + 1 rows.
WindowSplits make_windows(const SpeedDataset& dataset, std::size_t window,
                          const SplitFractions& fractions);

/// Windows over all rows of `dataset` as a single split.
std::vector<WindowedSample> make_windows(const SpeedDataset& dataset, std::size_t window);

}  // namespace tgclstm
