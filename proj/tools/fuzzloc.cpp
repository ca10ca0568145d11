// fuzzloc: fuzzy-logic workbench for subscriber-data management.
// Subcommands: load, fuzzify, query, infer, dedup, simulate.
// Exit codes: 0 success, 2 parse error, 3 semantic/validation error, 4 I/O.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fuzzloc/dedup.hpp"
#include "fuzzloc/io.hpp"
#include "fuzzloc/query.hpp"
#include "fuzzloc/rules.hpp"
#include "fuzzloc/sim.hpp"
#include "fuzzloc/store.hpp"

namespace {

using nlohmann::json;

struct Workspace {
  std::string store;
  std::string catalog;
  std::string kb;
  std::string network;
  std::string scenario;
  std::string tables_dir;
  double alpha = 0.5;
  double dedup_threshold = 0.85;
};

// FUZZLOC_WORKSPACE points at a JSON config supplying default paths; any
// explicit flag wins.
Workspace load_workspace() {
  Workspace ws;
  const char* path = std::getenv("FUZZLOC_WORKSPACE");
  if (path == nullptr || *path == '\0') return ws;
  json j = json::parse(fuzzloc::io::read_file(path));
  auto resolve = [&](const char* key, std::string& dest) {
    if (j.contains(key))
      dest = fuzzloc::io::sibling_path(path, j[key].get<std::string>());
  };
  resolve("store", ws.store);
  resolve("catalog", ws.catalog);
  resolve("kb", ws.kb);
  resolve("network", ws.network);
  resolve("scenario", ws.scenario);
  resolve("tables_dir", ws.tables_dir);
  if (j.contains("alpha")) ws.alpha = j["alpha"].get<double>();
  if (j.contains("dedup_threshold"))
    ws.dedup_threshold = j["dedup_threshold"].get<double>();
  return ws;
}

std::string default_tables_dir(const char* argv0) {
  // data/tables relative to the binary's parent directories, then cwd
  namespace fs = std::filesystem;
  std::vector<fs::path> candidates;
  fs::path exe(argv0);
  for (fs::path base = exe.parent_path(); !base.empty();
       base = base.parent_path()) {
    candidates.push_back(base / "data" / "tables");
    if (base == base.parent_path()) break;
  }
  candidates.push_back(fs::path("data") / "tables");
  for (const auto& c : candidates)
    if (fs::exists(c / "nicknames.txt")) return c.string();
  return (fs::path("data") / "tables").string();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw fuzzloc::SemanticError(message);
}

void print_rows(const fuzzloc::query::ExecuteResult& result) {
  std::printf("%-6s %-8s", "row", "degree");
  for (const auto& col : result.columns) std::printf(" %-18s", col.c_str());
  std::printf("\n");
  for (const auto& row : result.rows) {
    std::printf("%-6ld %-8.4f", row.row_id, row.degree);
    for (const auto& v : row.values) std::printf(" %-18s", v.c_str());
    std::printf("\n");
  }
  std::printf("(%zu rows)\n", result.rows.size());
}

int cmd_load(const std::string& store_path) {
  const auto table = fuzzloc::store::CsvTable::load(store_path);
  std::printf("%zu rows, %zu columns\n", table.row_count(),
              table.column_count());
  for (std::size_t i = 0; i < table.column_count(); ++i)
    std::printf("  %-20s %s\n", table.header()[i].c_str(),
                table.is_numeric_column(i) ? "numeric" : "text");
  return 0;
}

int cmd_fuzzify(const Workspace& ws, const std::string& table_name,
                const std::string& column, const std::string& variable_path,
                bool materialize) {
  require(!ws.store.empty(), "no store configured (use --store)");
  require(!ws.catalog.empty(), "no catalog configured (use --catalog)");
  const auto table = fuzzloc::store::CsvTable::load(ws.store);
  fuzzloc::query::Catalog catalog;
  if (std::filesystem::exists(ws.catalog))
    catalog = fuzzloc::query::Catalog::load(ws.catalog);
  auto variable = fuzzloc::fuzzy::variable_from_json(
      json::parse(fuzzloc::io::read_file(variable_path)));
  const auto& entry = catalog.fuzzify_column(table, table_name, column,
                                             std::move(variable), materialize);
  catalog.save(ws.catalog);
  std::printf("fuzzified %s.%s with %zu terms%s\n", entry.table.c_str(),
              entry.column.c_str(), entry.variable.terms().size(),
              materialize ? " (materialized)" : "");
  return 0;
}

int cmd_query(const Workspace& ws, const std::string& sql, double alpha,
              bool as_json, bool show_plan) {
  require(!ws.store.empty(), "no store configured (use --store)");
  const auto table = fuzzloc::store::CsvTable::load(ws.store);
  fuzzloc::query::Catalog catalog;
  if (!ws.catalog.empty() && std::filesystem::exists(ws.catalog))
    catalog = fuzzloc::query::Catalog::load(ws.catalog);
  const auto ast = fuzzloc::query::parse_query(sql);
  if (show_plan) {
    std::fputs(fuzzloc::query::explain(ast, catalog).c_str(), stdout);
    return 0;
  }
  const auto result = fuzzloc::query::execute(ast, table, catalog, alpha);
  if (as_json) {
    json rows = json::array();
    for (const auto& row : result.rows) {
      json values = json::object();
      for (std::size_t i = 0; i < result.columns.size(); ++i)
        values[result.columns[i]] = row.values[i];
      rows.push_back(
          {{"row_id", row.row_id}, {"degree", row.degree}, {"values", values}});
    }
    std::cout << json{{"columns", result.columns}, {"rows", rows}}.dump(2)
              << "\n";
  } else {
    print_rows(result);
  }
  return 0;
}

int cmd_infer(const std::string& kb_path,
              const std::vector<std::string>& assignments, bool as_json) {
  const auto kb = fuzzloc::kb::load_kb_manifest(kb_path);
  std::map<std::string, double> inputs;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    require(eq != std::string::npos,
            "input must be name=value, got: " + a);
    const auto value =
        fuzzloc::store::CsvTable::parse_number(a.substr(eq + 1));
    require(value.has_value(), "input value is not numeric: " + a);
    inputs[a.substr(0, eq)] = *value;
  }
  std::string missing;
  for (const auto& var : kb.inputs)
    if (!inputs.count(var.name())) missing += " " + var.name();
  require(missing.empty(), "missing input variables:" + missing);

  const auto assessment = kb.infer(inputs);
  if (as_json) {
    std::cout << fuzzloc::kb::to_json(assessment).dump(2) << "\n";
    return 0;
  }
  std::printf("score: %.4f\nlevel: %s\n", assessment.score,
              fuzzloc::kb::to_string(assessment.level));
  if (assessment.no_fire) std::printf("no rule fired\n");
  std::printf("fired rules:");
  for (const auto& id : assessment.fired_rules) std::printf(" %s", id.c_str());
  std::printf("\nactivations:\n");
  for (const auto& [var, terms] : assessment.activations)
    for (const auto& [term, degree] : terms)
      std::printf("  %s.%s = %.4f\n", var.c_str(), term.c_str(), degree);
  return 0;
}

int cmd_dedup(const Workspace& ws, double threshold,
              const std::string& groups_path, const std::string& merge_path,
              const std::string& history_path) {
  require(!ws.store.empty(), "no store configured (use --store)");
  const auto table = fuzzloc::store::CsvTable::load(ws.store);
  const auto tables = fuzzloc::dedup::MatchTables::load(ws.tables_dir);
  const auto records = fuzzloc::dedup::records_from_table(table);
  const auto groups =
      fuzzloc::dedup::find_duplicate_groups(records, threshold, tables);
  fuzzloc::io::write_file_atomic(
      groups_path, fuzzloc::dedup::groups_to_json(groups).dump(2) + "\n");
  std::printf("%zu duplicate groups -> %s\n", groups.size(),
              groups_path.c_str());

  if (!merge_path.empty()) {
    std::vector<fuzzloc::dedup::MergeResult> merges;
    std::vector<bool> drop(table.row_count(), false);
    for (const auto& g : groups) {
      merges.push_back(fuzzloc::dedup::merge_group(g, records));
      for (long member : g.members)
        if (member != g.primary) drop[static_cast<std::size_t>(member)] = true;
    }
    // merged store: survivors keep their original row content, with merged
    // field values written back onto the primary rows
    auto rows = table.rows();
    for (const auto& m : merges) {
      auto& row = rows[static_cast<std::size_t>(m.merged.row_id)];
      auto put = [&](const char* col, const std::string& value) {
        if (auto idx = table.column_index(col); idx && !value.empty())
          row[*idx] = value;
      };
      put("subscriber_name", m.merged.name);
      put("email", m.merged.email);
      put("phone", m.merged.phone);
      put("company", m.merged.company);
      put("street", m.merged.street);
    }
    std::vector<std::vector<std::string>> kept;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (!drop[r]) kept.push_back(rows[r]);
    fuzzloc::store::CsvTable(table.header(), kept).save(merge_path);
    std::printf("merged store (%zu rows) -> %s\n", kept.size(),
                merge_path.c_str());
    if (!history_path.empty()) {
      fuzzloc::io::write_file_atomic(
          history_path,
          fuzzloc::dedup::merge_report_to_json(merges).dump(2) + "\n");
      std::printf("merge history -> %s\n", history_path.c_str());
    }
  }
  return 0;
}

int cmd_simulate(const Workspace& ws, std::optional<std::uint64_t> seed,
                 const std::string& trace_path, bool as_json) {
  require(!ws.network.empty(), "no network config (use --network)");
  require(!ws.scenario.empty(), "no scenario (use --scenario)");
  const auto network = fuzzloc::sim::Network::load(ws.network);
  const auto scenario = fuzzloc::sim::Scenario::load(ws.scenario);
  const auto result = fuzzloc::sim::run(scenario, network, seed);
  if (!trace_path.empty()) {
    fuzzloc::io::write_file_atomic(trace_path, result.trace_csv);
    std::printf("trace (%ld ticks) -> %s\n", result.ticks, trace_path.c_str());
  }

  json summary{{"ticks", result.ticks},
               {"location_updates", result.totals.location_updates},
               {"hlr_vlr_transfers", result.totals.hlr_vlr_transfers},
               {"paging_requests", result.totals.paging_requests},
               {"cells_paged", result.totals.cells_paged},
               {"failed_pages", result.totals.failed_pages},
               {"dropped_signals", result.totals.dropped_signals}};
  if (!ws.kb.empty()) {
    const auto kb = fuzzloc::kb::load_kb_manifest(ws.kb);
    const auto assessment =
        fuzzloc::sim::assess_network_risk(fuzzloc::sim::window_from(result), kb);
    summary["risk"] = fuzzloc::kb::to_json(assessment);
    if (!as_json)
      std::printf("risk: score %.4f level %s\n", assessment.score,
                  fuzzloc::kb::to_string(assessment.level));
  }
  if (as_json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    std::printf(
        "updates %ld, transfers %ld, paging %ld, cells paged %ld, "
        "failed pages %ld, drops %ld\n",
        result.totals.location_updates, result.totals.hlr_vlr_transfers,
        result.totals.paging_requests, result.totals.cells_paged,
        result.totals.failed_pages, result.totals.dropped_signals);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fuzzy-logic workbench for subscriber data management"};
  app.require_subcommand(1);

  Workspace ws;
  try {
    ws = load_workspace();
  } catch (const std::exception& e) {
    std::cerr << "error: workspace config: " << e.what() << "\n";
    return 4;
  }
  if (ws.tables_dir.empty()) ws.tables_dir = default_tables_dir(argv[0]);

  std::string sql, table_name = "SUBSCRIBER_PROFILE", column, variable_path;
  std::string kb_path = ws.kb, groups_path = "groups.json", merge_path,
              history_path, trace_path;
  std::vector<std::string> inputs;
  double alpha = ws.alpha, threshold = ws.dedup_threshold;
  bool as_json = false, materialize = false, show_plan = false;
  std::optional<std::uint64_t> seed;
  std::uint64_t seed_value = 0;

  auto* load = app.add_subcommand("load", "ingest a subscriber CSV store");
  load->add_option("--store", ws.store, "store CSV path")->required();

  auto* fuzz = app.add_subcommand("fuzzify", "attach a linguistic variable to a column");
  fuzz->add_option("--store", ws.store, "store CSV path");
  fuzz->add_option("--catalog", ws.catalog, "catalog JSON path");
  fuzz->add_option("--table", table_name, "logical table name");
  fuzz->add_option("--column", column, "numeric column")->required();
  fuzz->add_option("--variable", variable_path, "variable JSON file")->required();
  fuzz->add_flag("--materialize", materialize, "precompute per-row degrees");

  auto* query = app.add_subcommand("query", "run a fuzzy-SQL query");
  query->add_option("sql", sql, "query text")->required();
  query->add_option("--store", ws.store, "store CSV path");
  query->add_option("--catalog", ws.catalog, "catalog JSON path");
  query->add_option("--alpha", alpha, "degree cut threshold");
  query->add_flag("--json", as_json, "emit JSON");
  query->add_flag("--explain", show_plan, "print the evaluation plan instead");

  auto* infer = app.add_subcommand("infer", "run Mamdani inference");
  infer->add_option("--kb", kb_path, "kb manifest JSON")->required();
  infer->add_option("--input", inputs, "name=value crisp input (repeatable)");
  infer->add_flag("--json", as_json, "emit JSON");

  auto* dedup = app.add_subcommand("dedup", "find and merge fuzzy duplicates");
  dedup->add_option("--store", ws.store, "store CSV path");
  dedup->add_option("--threshold", threshold, "similarity threshold");
  dedup->add_option("--tables", ws.tables_dir, "match-table directory");
  dedup->add_option("--groups", groups_path, "groups JSON output");
  dedup->add_option("--merge", merge_path, "write merged store CSV here");
  dedup->add_option("--history", history_path, "merge history JSON output");

  auto* simulate = app.add_subcommand("simulate", "run the location-management simulator");
  simulate->add_option("--network", ws.network, "network config JSON");
  simulate->add_option("--scenario", ws.scenario, "scenario JSON");
  auto* seed_opt = simulate->add_option("--seed", seed_value, "random-walk seed override");
  simulate->add_option("--kb", ws.kb, "network-risk kb manifest");
  simulate->add_option("--trace", trace_path, "metrics trace CSV output");
  simulate->add_flag("--json", as_json, "emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (seed_opt->count() > 0) seed = seed_value;

  try {
    if (load->parsed()) return cmd_load(ws.store);
    if (fuzz->parsed())
      return cmd_fuzzify(ws, table_name, column, variable_path, materialize);
    if (query->parsed()) return cmd_query(ws, sql, alpha, as_json, show_plan);
    if (infer->parsed()) return cmd_infer(kb_path, inputs, as_json);
    if (dedup->parsed())
      return cmd_dedup(ws, threshold, groups_path, merge_path, history_path);
    if (simulate->parsed()) return cmd_simulate(ws, seed, trace_path, as_json);
  } catch (const fuzzloc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fuzzloc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
