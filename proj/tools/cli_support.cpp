#include "cli_support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Core>

namespace qtherm::cli {

const json Fields::kEmpty = json::object();

Fields::Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw SchemaError(path_, "expected an object");
}

bool Fields::has(const std::string& key) const { return j_.contains(key); }

const json* Fields::find(const std::string& key) {
  used_.insert(key);
  auto it = j_.find(key);
  return it == j_.end() ? nullptr : &*it;
}

double Fields::number(const std::string& key, std::optional<double> fallback) {
  const json* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw SchemaError(at(key), "required number is missing");
  }
  if (!v->is_number()) throw SchemaError(at(key), "expected a number");
  return v->get<double>();
}

long Fields::integer(const std::string& key, std::optional<long> fallback) {
  const json* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw SchemaError(at(key), "required integer is missing");
  }
  if (!v->is_number_integer()) throw SchemaError(at(key), "expected an integer");
  return v->get<long>();
}

bool Fields::boolean(const std::string& key, std::optional<bool> fallback) {
  const json* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw SchemaError(at(key), "required boolean is missing");
  }
  if (!v->is_boolean()) throw SchemaError(at(key), "expected true or false");
  return v->get<bool>();
}

std::string Fields::text(const std::string& key, std::optional<std::string> fallback) {
  const json* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw SchemaError(at(key), "required string is missing");
  }
  if (!v->is_string()) throw SchemaError(at(key), "expected a string");
  return v->get<std::string>();
}

std::vector<double> Fields::numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
  const json* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw SchemaError(at(key), "required array is missing");
  }
  if (!v->is_array()) throw SchemaError(at(key), "expected an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_number()) throw SchemaError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back((*v)[i].get<double>());
  }
  return out;
}

std::vector<long> Fields::integers(const std::string& key, std::optional<std::vector<long>> fallback) {
  const json* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw SchemaError(at(key), "required array is missing");
  }
  if (!v->is_array()) throw SchemaError(at(key), "expected an array of integers");
  std::vector<long> out;
  for (size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_number_integer())
      throw SchemaError(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
    out.push_back((*v)[i].get<long>());
  }
  return out;
}

Fields Fields::object(const std::string& key) {
  const json* v = find(key);
  return v ? Fields(*v, at(key)) : Fields(kEmpty, at(key));
}

double Fields::positive(const std::string& key, std::optional<double> fallback) {
  const double v = number(key, fallback);
  if (!(v > 0) || !std::isfinite(v)) throw SchemaError(at(key), "must be positive and finite");
  return v;
}

double Fields::non_negative(const std::string& key, std::optional<double> fallback) {
  const double v = number(key, fallback);
  if (!(v >= 0) || !std::isfinite(v)) throw SchemaError(at(key), "must be non-negative and finite");
  return v;
}

long Fields::at_least(const std::string& key, long lo, std::optional<long> fallback) {
  const long v = integer(key, fallback);
  if (v < lo) throw SchemaError(at(key), "must be at least " + std::to_string(lo));
  return v;
}

std::string Fields::choice(const std::string& key, const std::vector<std::string>& options,
                           std::optional<std::string> fallback) {
  const std::string v = text(key, fallback);
  if (std::find(options.begin(), options.end(), v) == options.end()) {
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
    throw SchemaError(at(key), "unknown value '" + v + "' (expected one of " + list + ")");
  }
  return v;
}

void Fields::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!used_.count(it.key())) throw SchemaError(at(it.key()), "unknown key");
}

// ---------------------------------------------------------------------------

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match header");
  rows.push_back(std::move(row));
}

int Table::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (header) {
      t.columns = cells;
      header = false;
    } else {
      cells.resize(t.columns.size());
      t.rows.push_back(cells);
    }
  }
  return t;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(long v) { return std::to_string(v); }

// ---------------------------------------------------------------------------

namespace {

constexpr double kW = 640, kH = 400, kLeft = 72, kRight = 150, kTop = 40, kBottom = 52;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - lo) / (hi - lo); }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }

  void fit(const std::vector<double>& vals) {
    double a = std::numeric_limits<double>::infinity(), b = -a;
    for (double v : vals)
      if (usable(v)) {
        a = std::min(a, map(v));
        b = std::max(b, map(v));
      }
    if (!std::isfinite(a)) {
      lo = 0;
      hi = 1;
      return;
    }
    if (b - a < 1e-12 * std::max(1.0, std::abs(a))) {
      a -= 0.5;
      b += 0.5;
    }
    const double pad = 0.04 * (b - a);
    lo = a - pad;
    hi = b + pad;
  }

  // Tick positions in data units.
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo); e <= std::floor(hi) + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
      if (out.size() < 2) {
        const double mid = 0.5 * (lo + hi);
        out = {std::pow(10.0, lo + 0.1 * (hi - lo)), std::pow(10.0, mid), std::pow(10.0, hi - 0.1 * (hi - lo))};
      }
      return out;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
      out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
  }
};

std::vector<double> numeric_column(const Table& t, int c) {
  std::vector<double> out;
  for (const auto& r : t.rows) {
    const std::string& s = r[c];
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    out.push_back(end != s.c_str() && *end == '\0' ? v : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace

std::string render_plot(const Table& table, const PlotSpec& spec) {
  const int xc = table.column(spec.x);
  if (xc < 0) throw std::invalid_argument("missing column '" + spec.x + "'");
  std::vector<int> ycs;
  for (const auto& y : spec.y) {
    const int c = table.column(y);
    if (c < 0) throw std::invalid_argument("missing column '" + y + "'");
    ycs.push_back(c);
  }
  const std::vector<double> xs = numeric_column(table, xc);
  std::vector<std::vector<double>> ys;
  std::vector<double> all_y;
  for (int c : ycs) {
    ys.push_back(numeric_column(table, c));
    all_y.insert(all_y.end(), ys.back().begin(), ys.back().end());
  }
  Axis ax, ay;
  ax.log = spec.log_x;
  ay.log = spec.log_y;
  ax.fit(xs);
  ay.fit(all_y);

  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.frac(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.frac(v)) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(kW) + "\" height=\"" + f2(kH) +
       "\" viewBox=\"0 0 " + f2(kW) + " " + f2(kH) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + f2(kW) + "\" height=\"" + f2(kH) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + f2(kLeft + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(spec.title) + "</text>\n";
  s += "<rect x=\"" + f2(kLeft) + "\" y=\"" + f2(kTop) + "\" width=\"" + f2(pw) + "\" height=\"" + f2(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = px(t);
    s += "<line x1=\"" + f2(x) + "\" y1=\"" + f2(kTop + ph) + "\" x2=\"" + f2(x) + "\" y2=\"" +
         f2(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + f2(x) + "\" y=\"" + f2(kTop + ph + 18) + "\" text-anchor=\"middle\">" + tick_label(t) +
         "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = py(t);
    s += "<line x1=\"" + f2(kLeft - 5) + "\" y1=\"" + f2(y) + "\" x2=\"" + f2(kLeft) + "\" y2=\"" + f2(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + f2(kLeft - 8) + "\" y=\"" + f2(y + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
         "</text>\n";
  }
  const std::string xl = spec.x_label.empty() ? spec.x : spec.x_label;
  s += "<text x=\"" + f2(kLeft + pw / 2) + "\" y=\"" + f2(kH - 12) + "\" text-anchor=\"middle\">" +
       escape(xl + (spec.log_x ? " (log)" : "")) + "</text>\n";
  const std::string yl = spec.y_label + (spec.log_y ? " (log)" : "");
  s += "<text x=\"16\" y=\"" + f2(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       f2(kTop + ph / 2) + ")\">" + escape(yl) + "</text>\n";

  for (size_t k = 0; k < ys.size(); ++k) {
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    std::string pts;
    for (size_t i = 0; i < xs.size(); ++i) {
      if (!ax.usable(xs[i]) || !ay.usable(ys[k][i])) continue;
      if (spec.points) {
        s += "<circle cx=\"" + f2(px(xs[i])) + "\" cy=\"" + f2(py(ys[k][i])) + "\" r=\"2.5\" fill=\"" + color +
             "\"/>\n";
      } else {
        pts += (pts.empty() ? "" : " ") + f2(px(xs[i])) + "," + f2(py(ys[k][i]));
      }
    }
    if (!pts.empty())
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    const double ly = kTop + 12 + 16 * static_cast<double>(k);
    s += "<line x1=\"" + f2(kW - kRight + 12) + "\" y1=\"" + f2(ly) + "\" x2=\"" + f2(kW - kRight + 32) +
         "\" y2=\"" + f2(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + f2(kW - kRight + 38) + "\" y=\"" + f2(ly + 4) + "\">" + escape(spec.y[k]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string manifest_json(const RunRecord& run, const std::vector<Artifact>& artifacts) {
  json m;
  m["subcommand"] = run.subcommand;
  m["config"] = run.config;
  m["config_hash"] = hex(fnv1a(run.config.dump()));
  m["seed"] = run.seed;
  m["jobs"] = run.jobs;
  m["versions"] = {{"qtherm", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                 "." + std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"compiler", __VERSION__}};
  m["wall_seconds"] = run.wall_seconds;
  m["results"] = run.results;
  json list = json::array();
  for (const auto& a : artifacts)
    list.push_back({{"name", a.name}, {"bytes", a.content.size()}, {"fnv1a", hex(fnv1a(a.content))}});
  m["artifacts"] = list;
  return m.dump(2) + "\n";
}

void write_outputs(const std::filesystem::path& dir, const RunRecord& run,
                   const std::vector<Artifact>& artifacts) {
  std::filesystem::create_directories(dir);
  auto put = [&dir](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  };
  for (const auto& a : artifacts) put(a.name, a.content);
  put("manifest.json", manifest_json(run, artifacts));
}

}  // namespace qtherm::cli
