#include "tgclstm/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "tgclstm/csv.hpp"
#include "tgclstm/errors.hpp"
#include "tgclstm/graph.hpp"

namespace tgclstm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::size_t SpeedDataset::missing_cells() const noexcept {
  return static_cast<std::size_t>(std::count_if(speeds.values().begin(), speeds.values().end(),
                                                [](double v) { return std::isnan(v); }));
}

std::int64_t parse_timestamp(std::string_view text) {
  const std::string s(csv::trim(text));
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0;
  int consumed = 0;
  const int fields =
      std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
  if (fields < 6 || (sep != 'T' && sep != ' ')) {
    throw FormatError("bad timestamp '" + s + "' (expected YYYY-MM-DDTHH:MM[:SS])");
  }
  std::string_view rest(s.c_str() + consumed);
  if (!rest.empty() && rest.front() == ':') {
    int extra = 0;
    if (std::sscanf(rest.data(), ":%2d%n", &sec, &extra) != 1) {
      throw FormatError("bad timestamp seconds in '" + s + "'");
    }
    rest.remove_prefix(static_cast<std::size_t>(extra));
  }
  if (!rest.empty() && rest != "Z") throw FormatError("bad timestamp suffix in '" + s + "'");

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) {
    throw FormatError("timestamp out of range: '" + s + "'");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_timestamp(std::int64_t seconds) {
  using namespace std::chrono;
  auto days = seconds / 86400;
  auto rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60),
                static_cast<int>(rem % 60));
  return buf;
}

SpeedDataset load_speed_csv(const std::filesystem::path& path,
                            std::span<const std::string> node_ids, std::int64_t step_seconds) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty speed file");
  const auto header = csv::split(lines.front());
  if (header.size() < 2) throw FormatError(path.string() + ": header needs timestamp + node ids");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);

  // column_to_node[c] for header column c (c ≥ 1)
  std::vector<std::size_t> column_to_node(header.size(), 0);
  std::vector<bool> covered(node_ids.size(), false);
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto it = index.find(header[c]);
    if (it == index.end()) {
      throw ValidationError(path.string() + ": column '" + header[c] +
                            "' is not in the node-id list");
    }
    if (covered[it->second]) {
      throw ValidationError(path.string() + ": duplicate column '" + header[c] + "'");
    }
    covered[it->second] = true;
    column_to_node[c] = it->second;
  }
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    if (!covered[i]) {
      throw ValidationError(path.string() + ": no column for node '" + node_ids[i] + "'");
    }
  }

  SpeedDataset ds;
  ds.node_ids.assign(node_ids.begin(), node_ids.end());
  ds.step_seconds = step_seconds;
  const std::size_t rows = lines.size() - 1;
  ds.speeds = Matrix(rows, node_ids.size(), kNaN);
  ds.timestamps.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string context = path.string() + ":" + std::to_string(r + 2);
    const auto fields = csv::split(lines[r + 1]);
    if (fields.size() != header.size()) {
      throw FormatError(context + ": ragged row (" + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(header.size()) + ")");
    }
    ds.timestamps.push_back(parse_timestamp(fields[0]));
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c].empty() || fields[c] == "NaN" || fields[c] == "nan") continue;
      const double v = csv::parse_double(fields[c], context);
      if (!std::isfinite(v)) throw FormatError(context + ": non-finite speed");
      ds.speeds(r, column_to_node[c]) = v;
    }
  }

  std::ostringstream gaps;
  std::size_t gap_count = 0;
  for (std::size_t r = 1; r < rows; ++r) {
    const auto prev = ds.timestamps[r - 1];
    const auto cur = ds.timestamps[r];
    if (cur <= prev) {
      throw ValidationError(path.string() + ": timestamps not strictly increasing at " +
                            format_timestamp(cur));
    }
    if (cur - prev != step_seconds) {
      if ((cur - prev) % step_seconds != 0) {
        throw ValidationError(path.string() + ": timestamp " + format_timestamp(cur) +
                              " is off the " + std::to_string(step_seconds) + "s grid");
      }
      gaps << (gap_count++ ? "; " : "") << format_timestamp(prev + step_seconds) << " .. "
           << format_timestamp(cur - step_seconds);
    }
  }
  if (gap_count > 0) {
    throw ValidationError(path.string() + ": missing timestamps " + gaps.str());
  }
  return ds;
}

SpeedDataset load_speed_csv(const std::filesystem::path& path,
                            const std::filesystem::path& node_id_file, std::int64_t step_seconds) {
  const auto ids = load_node_ids(node_id_file);
  return load_speed_csv(path, ids, step_seconds);
}

void save_speed_csv(const std::filesystem::path& path, const SpeedDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "timestamp";
  for (const auto& id : dataset.node_ids) out << ',' << id;
  out << '\n';
  for (std::size_t r = 0; r < dataset.steps(); ++r) {
    out << format_timestamp(dataset.timestamps[r]);
    for (double v : dataset.speeds.row(r)) {
      out << ',';
      if (!std::isnan(v)) out << csv::format_double(v);
    }
    out << '\n';
  }
}

ImputePolicy parse_impute_policy(std::string_view name) {
  if (name == "ffill" || name == "forward-fill-then-backfill") {
    return ImputePolicy::kForwardFillThenBackfill;
  }
  if (name == "node-mean") return ImputePolicy::kNodeMean;
  throw std::invalid_argument("unknown impute policy '" + std::string(name) + "'");
}

ImputeResult impute_missing(const SpeedDataset& dataset, ImputePolicy policy) {
  ImputeResult result{dataset, 0};
  Matrix& s = result.dataset.speeds;
  for (std::size_t c = 0; c < s.cols(); ++c) {
    std::size_t first_observed = s.rows();
    double sum = 0.0;
    std::size_t observed = 0;
    for (std::size_t r = 0; r < s.rows(); ++r) {
      if (std::isnan(s(r, c))) continue;
      first_observed = std::min(first_observed, r);
      sum += s(r, c);
      ++observed;
    }
    if (observed == 0) {
      const std::string id = c < dataset.node_ids.size() ? dataset.node_ids[c] : std::to_string(c);
      throw ValidationError("impute_missing: node '" + id + "' has no observations");
    }
    const double mean = sum / static_cast<double>(observed);
    double last = s(first_observed, c);
    for (std::size_t r = 0; r < s.rows(); ++r) {
      double& v = s(r, c);
      if (!std::isnan(v)) {
        last = v;
        continue;
      }
      // Before the first observation `last` holds that observation: a backfill.
      v = policy == ImputePolicy::kNodeMean ? mean : last;
      ++result.imputed_cells;
    }
  }
  return result;
}

void SplitFractions::validate() const {
  if (!(train > 0.0 && validation > 0.0 && test > 0.0)) {
    throw ValidationError("split fractions must all be positive");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw ValidationError("split fractions must sum to 1");
  }
}

SplitFractions parse_split(std::string_view text) {
  const auto fields = csv::split(text);
  if (fields.size() != 3) throw ValidationError("split must be three comma-separated fractions");
  SplitFractions f{csv::parse_double(fields[0], "split"), csv::parse_double(fields[1], "split"),
                   csv::parse_double(fields[2], "split")};
  f.validate();
  return f;
}

SplitRows split_rows(std::size_t rows, const SplitFractions& fractions) {
  fractions.validate();
  SplitRows out;
  out.train = static_cast<std::size_t>(std::floor(fractions.train * static_cast<double>(rows)));
  out.validation =
      static_cast<std::size_t>(std::floor(fractions.validation * static_cast<double>(rows)));
  out.test = rows - out.train - out.validation;
  return out;
}

SpeedDataset normalize(const SpeedDataset& dataset, const SplitFractions& fractions) {
  if (dataset.normalization) throw ValidationError("normalize: dataset is already normalised");
  const SplitRows rows = split_rows(dataset.steps(), fractions);
  double max_speed = 0.0;
  for (std::size_t r = 0; r < rows.train; ++r)
    for (double v : dataset.speeds.row(r))
      if (!std::isnan(v)) max_speed = std::max(max_speed, v);
  if (!(max_speed > 0.0)) throw ValidationError("normalize: training split maximum speed is zero");
  SpeedDataset out = dataset;
  for (double& v : out.speeds.values()) v /= max_speed;
  out.normalization = NormalizationRecord{"train-max", max_speed};
  return out;
}

Vector denormalize(std::span<const double> values, const NormalizationRecord& record) {
  Vector out(values.begin(), values.end());
  for (double& v : out) v *= record.scale;
  return out;
}

namespace {

void append_windows(const SpeedDataset& ds, std::size_t begin, std::size_t end, std::size_t window,
                    const char* split, std::vector<WindowedSample>& out) {
  const std::size_t rows = end - begin;
  if (rows < window + 1) {
    throw ValidationError(std::string(split) + " split has " + std::to_string(rows) +
                          " rows; need at least T + 1 = " + std::to_string(window + 1));
  }
  const std::size_t n = ds.nodes();
  out.reserve(out.size() + rows - window);
  for (std::size_t start = begin; start + window < end; ++start) {
    WindowedSample s;
    s.start_row = start;
    s.input = Matrix(window, n);
    for (std::size_t t = 0; t < window; ++t) {
      auto src = ds.speeds.row(start + t);
      std::copy(src.begin(), src.end(), s.input.row(t).begin());
    }
    auto target = ds.speeds.row(start + window);
    s.target.assign(target.begin(), target.end());
    out.push_back(std::move(s));
  }
}

}  // namespace

WindowSplits make_windows(const SpeedDataset& dataset, std::size_t window,
                          const SplitFractions& fractions) {
  if (window == 0) throw ValidationError("window length T must be >= 1");
  const SplitRows rows = split_rows(dataset.steps(), fractions);
  WindowSplits out;
  append_windows(dataset, 0, rows.train, window, "train", out.train);
  append_windows(dataset, rows.train, rows.train + rows.validation, window, "validation",
                 out.validation);
  append_windows(dataset, rows.train + rows.validation, dataset.steps(), window, "test", out.test);
  return out;
}

std::vector<WindowedSample> make_windows(const SpeedDataset& dataset, std::size_t window) {
  if (window == 0) throw ValidationError("window length T must be >= 1");
  std::vector<WindowedSample> out;
  append_windows(dataset, 0, dataset.steps(), window, "dataset", out);
  return out;
}

}  // namespace tgclstm
