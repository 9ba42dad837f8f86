#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qtherm::cli {

using json = nlohmann::json;

// Config violation at a JSON path such as "$.chain.L".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Typed view of one JSON object.  Every key read is recorded; finish() rejects
// the rest.
class Fields {
 public:
  Fields(const json& j, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;

  double number(const std::string& key, std::optional<double> fallback = std::nullopt);
  long integer(const std::string& key, std::optional<long> fallback = std::nullopt);
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt);
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
  std::vector<long> integers(const std::string& key, std::optional<std::vector<long>> fallback = std::nullopt);
  // Nested object; an absent key yields an empty object.
  Fields object(const std::string& key);

  // Range guards that report the field path.
  double positive(const std::string& key, std::optional<double> fallback = std::nullopt);
  double non_negative(const std::string& key, std::optional<double> fallback = std::nullopt);
  long at_least(const std::string& key, long lo, std::optional<long> fallback = std::nullopt);
  std::string choice(const std::string& key, const std::vector<std::string>& options,
                     std::optional<std::string> fallback = std::nullopt);

  void finish() const;

 private:
  const json* find(const std::string& key);
  std::string at(const std::string& key) const { return path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
  static const json kEmpty;
};

// Rows of preformatted cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  int column(const std::string& name) const;  // -1 when absent
  std::string to_csv() const;
};

Table parse_csv(const std::string& text);

// Shortest round-trip-stable rendering used for every numeric cell.
std::string num(double v);
std::string num(long v);
inline std::string num(int v) { return num(static_cast<long>(v)); }

struct PlotSpec {
  std::string title;
  std::string x;
  std::vector<std::string> y;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  bool points = false;  // markers instead of polylines
};

// Static SVG of the named columns.  Throws std::invalid_argument naming a
// missing column.  Empty tables render axes only.
std::string render_plot(const Table& table, const PlotSpec& spec);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex(std::uint64_t v);

// Outputs are buffered and written only once the whole run has succeeded.
struct Artifact {
  std::string name;
  std::string content;
};

struct RunRecord {
  std::string subcommand;
  json config;  // normalized, with defaults filled in
  std::uint64_t seed = 0;
  int jobs = 1;
  json results = json::object();
  double wall_seconds = 0;
};

std::string manifest_json(const RunRecord& run, const std::vector<Artifact>& artifacts);

// Writes artifacts plus manifest.json into `dir`, creating it.
void write_outputs(const std::filesystem::path& dir, const RunRecord& run,
                   const std::vector<Artifact>& artifacts);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qtherm::cli
