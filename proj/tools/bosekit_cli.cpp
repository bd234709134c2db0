#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bosekit/suites.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using namespace bosekit;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void apply_output_override(RunConfig& cfg) {
  if (const char* dir = std::getenv("BOSEKIT_OUTPUT_DIR"); dir && *dir) cfg.output_directory = dir;
}

std::vector<const SuiteEntry*> resolve_checks(const RunConfig& cfg) {
  std::vector<const SuiteEntry*> out;
  if (cfg.checks.empty()) {
    for (const auto& e : suite_registry()) out.push_back(&e);
    return out;
  }
  for (const auto& name : cfg.checks) {
    const SuiteEntry* e = find_suite(name);
    if (!e) throw ConfigError("unknown check name '" + name + "'; see list-checks");
    out.push_back(e);
  }
  return out;
}

ordered_json check_to_json(const CheckReport& c) {
  ordered_json j;
  j["name"] = c.name;
  j["claim"] = c.claim;
  ordered_json params = ordered_json::object();
  for (const auto& kv : c.parameters) params[kv.first] = kv.second;
  j["parameters"] = params;
  j["value"] = c.value;
  j["bound"] = c.bound;
  j["tolerance"] = c.tolerance;
  j["pass"] = c.pass;
  j["runtime_ms"] = c.runtime_ms;
  return j;
}

ordered_json suite_to_json(const SuiteResult& s) {
  ordered_json j;
  j["name"] = s.name;
  j["claim"] = s.claim;
  j["pass"] = s.pass();
  j["skipped"] = s.skipped;
  j["skip_reason"] = s.skip_reason;
  j["runtime_ms"] = s.runtime_ms;
  ordered_json checks = ordered_json::array();
  for (const auto& c : s.reports) checks.push_back(check_to_json(c));
  j["checks"] = checks;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_series_csv(const fs::path& dir, const SeriesTable& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_number(row[i]);
    out << "\n";
  }
  write_text(dir / (table.name + ".csv"), out.str());
}

void print_suite_line(const SuiteResult& s) {
  if (s.skipped)
    std::printf("[skip] %-24s %s\n", s.name.c_str(), s.skip_reason.c_str());
  else
    std::printf("[%s] %-24s %.0f ms\n", s.pass() ? "pass" : "FAIL", s.name.c_str(), s.runtime_ms);
}

int cmd_run(const std::string& config_path) {
  RunConfig cfg = parse_config(slurp(config_path));
  apply_output_override(cfg);
  const auto entries = resolve_checks(cfg);

  std::vector<SuiteResult> results;
  bool all_pass = true;
  for (const SuiteEntry* e : entries) {
    SuiteResult r = run_suite(*e, cfg);
    print_suite_line(r);
    all_pass = all_pass && r.pass();
    results.push_back(std::move(r));
  }

  const fs::path out_dir(cfg.output_directory);
  const bool want_json = std::find(cfg.formats.begin(), cfg.formats.end(), "json") != cfg.formats.end();
  const bool want_csv = std::find(cfg.formats.begin(), cfg.formats.end(), "csv") != cfg.formats.end();
  fs::create_directories(out_dir);

  if (want_json) {
    ordered_json report;
    report["schema"] = 1;
    report["command"] = "run";
    report["pass"] = all_pass;
    report["config"] = config_to_json(cfg);
    ordered_json suites = ordered_json::array();
    for (const auto& r : results) suites.push_back(suite_to_json(r));
    report["suites"] = suites;
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    std::printf("report: %s\n", (out_dir / "report.json").string().c_str());
  }
  if (want_csv) {
    const fs::path series_dir = out_dir / "series";
    fs::create_directories(series_dir);
    for (const auto& r : results)
      for (const auto& table : r.series) write_series_csv(series_dir, table);
  }
  return all_pass ? 0 : 1;
}

std::string classify_steps(const std::vector<double>& xs) {
  bool all_down = true, all_up = true, all_flat = true;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double step = xs[i + 1] - xs[i];
    all_down = all_down && step < 0.0;
    all_up = all_up && step > 0.0;
    all_flat = all_flat && step == 0.0;
  }
  if (xs.size() < 2) return "constant";
  if (all_flat) return "constant";
  if (all_down) return "decreasing";
  if (all_up) return "increasing";
  return "mixed";
}

std::string axis_slug(const std::string& axis) {
  std::string slug = axis;
  for (char& c : slug)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return slug;
}

std::vector<double> parse_sweep_values(const std::vector<std::string>& tokens) {
  std::vector<double> values;
  for (const auto& tok : tokens) {
    if (tok.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw ConfigError("sweep value '" + tok + "' is not numeric");
    }
    if (pos != tok.size()) throw ConfigError("sweep value '" + tok + "' is not numeric");
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError("sweep needs a non-empty value list");
  return values;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<std::string>& value_tokens) {
  const std::vector<double> values = parse_sweep_values(value_tokens);
  RunConfig base = parse_config(slurp(config_path));
  apply_output_override(base);
  {
    RunConfig probe = base;
    set_config_axis(probe, axis, values.front());  // fail fast on a bad axis name
  }
  const auto entries = resolve_checks(base);

  struct SweepRow {
    double value;
    std::vector<SuiteResult> results;
  };
  std::vector<SweepRow> rows;
  bool all_pass = true;
  for (double v : values) {
    RunConfig cfg = base;
    set_config_axis(cfg, axis, v);
    std::printf("-- %s = %s\n", axis.c_str(), csv_number(v).c_str());
    SweepRow row{v, {}};
    for (const SuiteEntry* e : entries) {
      SuiteResult r = run_suite(*e, cfg);
      print_suite_line(r);
      all_pass = all_pass && r.pass();
      row.results.push_back(std::move(r));
    }
    rows.push_back(std::move(row));
  }

  // columns: one per check observed anywhere in the sweep, in suite order
  std::vector<std::string> columns;
  auto note_column = [&](const std::string& name) {
    if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
  };
  for (const auto& row : rows)
    for (const auto& r : row.results)
      for (const auto& c : r.reports) note_column(r.name + "." + c.name);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> matrix(rows.size(), std::vector<double>(columns.size(), nan));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& r : rows[i].results)
      for (const auto& c : r.reports) {
        const auto it = std::find(columns.begin(), columns.end(), r.name + "." + c.name);
        matrix[i][it - columns.begin()] = c.value;
      }

  std::vector<std::pair<std::string, std::string>> verdicts;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    std::vector<double> col;
    bool complete = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      complete = complete && !std::isnan(matrix[i][j]);
      col.push_back(matrix[i][j]);
    }
    verdicts.emplace_back(columns[j], complete ? classify_steps(col) : "incomplete");
  }

  const fs::path out_dir(base.output_directory);
  const bool want_json =
      std::find(base.formats.begin(), base.formats.end(), "json") != base.formats.end();
  const bool want_csv =
      std::find(base.formats.begin(), base.formats.end(), "csv") != base.formats.end();
  fs::create_directories(out_dir);

  if (want_csv) {
    const fs::path series_dir = out_dir / "series";
    fs::create_directories(series_dir);
    std::ostringstream csv;
    csv << axis;
    for (const auto& col : columns) csv << "," << col;
    csv << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      csv << csv_number(rows[i].value);
      for (std::size_t j = 0; j < columns.size(); ++j) csv << "," << csv_number(matrix[i][j]);
      csv << "\n";
    }
    for (const auto& [col, verdict] : verdicts) csv << "# verdict," << col << "," << verdict << "\n";
    write_text(series_dir / ("sweep_" + axis_slug(axis) + ".csv"), csv.str());
  }

  if (want_json) {
    ordered_json report;
    report["schema"] = 1;
    report["command"] = "sweep";
    report["axis"] = axis;
    report["values"] = values;
    report["pass"] = all_pass;
    report["config"] = config_to_json(base);
    ordered_json verdict_obj = ordered_json::object();
    for (const auto& [col, verdict] : verdicts) verdict_obj[col] = verdict;
    report["verdicts"] = verdict_obj;
    ordered_json runs = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json entry;
      entry["value"] = row.value;
      ordered_json suites = ordered_json::array();
      for (const auto& r : row.results) suites.push_back(suite_to_json(r));
      entry["suites"] = suites;
      runs.push_back(std::move(entry));
    }
    report["runs"] = runs;
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    std::printf("report: %s\n", (out_dir / "report.json").string().c_str());
  }

  for (const auto& [col, verdict] : verdicts)
    std::printf("verdict: %s %s\n", col.c_str(), verdict.c_str());
  return all_pass ? 0 : 1;
}

int cmd_list() {
  for (const auto& e : suite_registry()) std::printf("%s → %s\n", e.name.c_str(), e.claim.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"truncated Fock-space checks for a lattice Bose field and its resolvent algebra"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "execute the configured check suites");
  run_cmd->add_option("config", run_config, "JSON configuration file")->required();

  std::string sweep_config, axis;
  std::vector<std::string> value_tokens;
  auto* sweep_cmd = app.add_subcommand("sweep", "repeat the checks along one numeric config axis");
  sweep_cmd->add_option("config", sweep_config, "JSON configuration file")->required();
  sweep_cmd->add_option("--axis", axis, "numeric configuration key, e.g. trap.L")->required();
  sweep_cmd->add_option("--values", value_tokens, "axis values (comma separated)")
      ->required()
      ->delimiter(',');

  auto* list_cmd = app.add_subcommand("list-checks", "list the registered check suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_config);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_config, axis, value_tokens);
    if (list_cmd->parsed()) return cmd_list();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
