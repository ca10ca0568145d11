#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fuzzloc/rules.hpp"
#include "json.hpp"

namespace fuzzloc::sim {

struct CellId {
  int mnc = 0;
  int lac = 0;
  int cid = 0;

  auto operator<=>(const CellId&) const = default;
};

struct Cell {
  CellId id;
  double x = 0.0;
  double y = 0.0;
  double tx_power_dbm = 30.0;
};

struct PathLossModel {
  double pl0_db = 40.0;
  double exponent = 3.0;
  double d0_km = 0.01;
};

class Network {
 public:
  Network(std::vector<Cell> cells, double drop_threshold_dbm,
          PathLossModel path_loss);

  static Network from_json(const nlohmann::json& j);
  static Network load(const std::string& path);

  const std::vector<Cell>& cells() const { return cells_; }
  const std::set<int>& lacs() const { return lacs_; }
  double drop_threshold_dbm() const { return drop_threshold_dbm_; }
  const PathLossModel& path_loss() const { return path_loss_; }
  std::vector<const Cell*> cells_in_lac(int lac) const;

 private:
  std::vector<Cell> cells_;
  std::set<int> lacs_;
  double drop_threshold_dbm_;
  PathLossModel path_loss_;
};

// Log-distance path loss: rx = tx - pl0 - 10*n*log10(max(d, d0)/d0).
double signal_strength(const Cell& cell, double x, double y,
                       const PathLossModel& model);

struct CellSelection {
  CellId cell;
  double rx_dbm;
};

// Best received power; ties break by (lac, cid) ascending.
CellSelection select_cell(double x, double y, const Network& network);

struct Event {
  enum class Type { Move, Call } type;
  std::string subscriber;
  double x = 0.0;  // Move only
  double y = 0.0;
};

struct RandomWalk {
  std::uint64_t seed = 0;
  long ticks = 0;
  double step_km = 0.5;
};

struct Scenario {
  std::vector<std::string> subscribers;
  std::vector<Event> events;
  std::optional<RandomWalk> walk;

  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::string& path);
};

struct SimMetrics {
  long location_updates = 0;
  long hlr_vlr_transfers = 0;
  long paging_requests = 0;
  long cells_paged = 0;
  long failed_pages = 0;
  long dropped_signals = 0;
  double rx_sum_dbm = 0.0;
  long rx_samples = 0;

  double mean_rx_dbm(double detached_floor_dbm) const {
    if (rx_samples == 0) return detached_floor_dbm;
    return rx_sum_dbm / rx_samples;
  }
};

struct SubscriberState {
  double x = 0.0;
  double y = 0.0;
  bool attached = false;
  CellId serving{};
};

struct HlrEntry {
  std::optional<int> vlr_lac;
  long transitions = 0;
};

struct Vlr {
  int lac = 0;
  std::set<std::string> cache;  // subscriber ids with a cached profile copy
};

class World {
 public:
  World(Network network, const std::vector<std::string>& subscribers);

  // Applies one event atomically. Unknown subscriber throws, world unchanged.
  void step(const Event& event);

  const Network& network() const { return network_; }
  const SimMetrics& metrics() const { return metrics_; }
  const std::map<std::string, SubscriberState>& subscribers() const {
    return subscribers_;
  }
  const std::map<std::string, HlrEntry>& hlr() const { return hlr_; }
  const std::map<int, Vlr>& vlrs() const { return vlrs_; }

  // Registration uniqueness: each attached subscriber cached in exactly the
  // VLR its HLR pointer names; detached subscribers cached nowhere.
  // Returns a diagnostic or nullopt when consistent.
  std::optional<std::string> check_registration_invariant() const;

 private:
  Network network_;
  std::map<std::string, SubscriberState> subscribers_;
  std::map<std::string, HlrEntry> hlr_;
  std::map<int, Vlr> vlrs_;
  SimMetrics metrics_;
};

struct RunResult {
  SimMetrics totals;
  long ticks = 0;
  std::string trace_csv;  // one row per tick, stable byte formatting
};

// Deterministic event loop; `seed_override` replaces the walk seed when set.
RunResult run(const Scenario& scenario, const Network& network,
              std::optional<std::uint64_t> seed_override = std::nullopt);

struct MetricsWindow {
  long ticks = 0;
  long location_updates = 0;
  long dropped_signals = 0;
  double mean_rx_dbm = -120.0;
};

MetricsWindow window_from(const RunResult& result,
                          double detached_floor_dbm = -120.0);

// Feeds {update_rate, drop_rate, mean_rx_dbm} into the knowledge base.
kb::RiskAssessment assess_network_risk(const MetricsWindow& window,
                                       const kb::KnowledgeBase& knowledge);

}  // namespace fuzzloc::sim
