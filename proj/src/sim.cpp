#include "fuzzloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "fuzzloc/io.hpp"

namespace fuzzloc::sim {

Network::Network(std::vector<Cell> cells, double drop_threshold_dbm,
                 PathLossModel path_loss)
    : cells_(std::move(cells)),
      drop_threshold_dbm_(drop_threshold_dbm),
      path_loss_(path_loss) {
  if (cells_.empty()) throw SemanticError("network has no cells");
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    if (!(std::isfinite(c.x) && std::isfinite(c.y)))
      throw SemanticError("cell position must be finite");
    for (std::size_t j = i + 1; j < cells_.size(); ++j)
      if (cells_[j].id == c.id)
        throw SemanticError("duplicate cell id (mnc=" +
                            std::to_string(c.id.mnc) +
                            ", lac=" + std::to_string(c.id.lac) +
                            ", cid=" + std::to_string(c.id.cid) + ")");
    lacs_.insert(c.id.lac);
  }
  if (path_loss_.d0_km <= 0.0)
    throw SemanticError("path loss reference distance must be positive");
}

Network Network::from_json(const nlohmann::json& j) {
  std::vector<Cell> cells;
  for (const auto& jc : j.at("cells")) {
    Cell c;
    c.id.mnc = jc.at("mnc").get<int>();
    c.id.lac = jc.at("lac").get<int>();
    c.id.cid = jc.at("cid").get<int>();
    c.x = jc.at("x").get<double>();
    c.y = jc.at("y").get<double>();
    c.tx_power_dbm = jc.value("tx_power", 30.0);
    cells.push_back(c);
  }
  PathLossModel model;
  if (j.contains("pathloss")) {
    const auto& pl = j["pathloss"];
    model.pl0_db = pl.value("pl0", model.pl0_db);
    model.exponent = pl.value("n", model.exponent);
    model.d0_km = pl.value("d0", model.d0_km);
  }
  return Network(std::move(cells), j.value("drop_threshold_dbm", -110.0),
                 model);
}

Network Network::load(const std::string& path) {
  try {
    return from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("network config " + path + ": " + e.what());
  }
}

std::vector<const Cell*> Network::cells_in_lac(int lac) const {
  std::vector<const Cell*> out;
  for (const Cell& c : cells_)
    if (c.id.lac == lac) out.push_back(&c);
  return out;
}

double signal_strength(const Cell& cell, double x, double y,
                       const PathLossModel& model) {
  const double dx = x - cell.x, dy = y - cell.y;
  const double d = std::max(std::sqrt(dx * dx + dy * dy), model.d0_km);
  return cell.tx_power_dbm - model.pl0_db -
         10.0 * model.exponent * std::log10(d / model.d0_km);
}

CellSelection select_cell(double x, double y, const Network& network) {
  const Cell* best = nullptr;
  double best_rx = 0.0;
  for (const Cell& c : network.cells()) {
    const double rx = signal_strength(c, x, y, network.path_loss());
    if (best == nullptr || rx > best_rx ||
        (rx == best_rx &&
         std::pair(c.id.lac, c.id.cid) < std::pair(best->id.lac, best->id.cid))) {
      best = &c;
      best_rx = rx;
    }
  }
  return {best->id, best_rx};
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  for (const auto& sub : j.at("subscribers")) {
    if (sub.is_string())
      s.subscribers.push_back(sub.get<std::string>());
    else
      s.subscribers.push_back(std::to_string(sub.get<long>()));
  }
  if (j.contains("events")) {
    for (const auto& je : j["events"]) {
      Event e;
      const std::string type = je.at("type").get<std::string>();
      if (type == "move") {
        e.type = Event::Type::Move;
        e.x = je.at("x").get<double>();
        e.y = je.at("y").get<double>();
      } else if (type == "call") {
        e.type = Event::Type::Call;
      } else {
        throw SemanticError("unknown event type: " + type);
      }
      const auto& sub = je.at("subscriber");
      e.subscriber = sub.is_string() ? sub.get<std::string>()
                                     : std::to_string(sub.get<long>());
      s.events.push_back(std::move(e));
    }
  }
  if (j.contains("random_walk")) {
    const auto& w = j["random_walk"];
    RandomWalk walk;
    walk.seed = w.at("seed").get<std::uint64_t>();
    walk.ticks = w.at("ticks").get<long>();
    walk.step_km = w.value("step", 0.5);
    s.walk = walk;
  }
  if (s.subscribers.empty()) throw SemanticError("scenario has no subscribers");
  return s;
}

Scenario Scenario::load(const std::string& path) {
  try {
    return from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("scenario " + path + ": " + e.what());
  }
}

World::World(Network network, const std::vector<std::string>& subscribers)
    : network_(std::move(network)) {
  for (int lac : network_.lacs()) vlrs_[lac] = Vlr{lac, {}};
  for (const auto& id : subscribers) {
    subscribers_[id] = SubscriberState{};
    hlr_[id] = HlrEntry{};
  }
}

void World::step(const Event& event) {
  auto sub_it = subscribers_.find(event.subscriber);
  if (sub_it == subscribers_.end())
    throw SemanticError("unknown subscriber: " + event.subscriber);
  SubscriberState& sub = sub_it->second;
  HlrEntry& hlr = hlr_.at(event.subscriber);

  if (event.type == Event::Type::Move) {
    sub.x = event.x;
    sub.y = event.y;
    const CellSelection sel = select_cell(event.x, event.y, network_);
    metrics_.rx_sum_dbm += sel.rx_dbm;
    metrics_.rx_samples += 1;

    if (sel.rx_dbm < network_.drop_threshold_dbm()) {
      metrics_.dropped_signals += 1;
      if (sub.attached) {
        vlrs_.at(*hlr.vlr_lac).cache.erase(event.subscriber);
        hlr.vlr_lac.reset();
        sub.attached = false;
      }
      return;
    }

    const bool lac_changed = !sub.attached || sub.serving.lac != sel.cell.lac;
    sub.serving = sel.cell;
    if (!lac_changed) {
      sub.attached = true;
      return;
    }
    if (hlr.vlr_lac) vlrs_.at(*hlr.vlr_lac).cache.erase(event.subscriber);
    vlrs_.at(sel.cell.lac).cache.insert(event.subscriber);
    hlr.vlr_lac = sel.cell.lac;
    hlr.transitions += 1;
    metrics_.location_updates += 1;
    metrics_.hlr_vlr_transfers += 1;  // v1 transfers the profile every update
    sub.attached = true;
    return;
  }

  // Call: page the location area the HLR points at.
  metrics_.paging_requests += 1;
  if (!hlr.vlr_lac) {
    metrics_.failed_pages += 1;
    return;
  }
  metrics_.cells_paged +=
      static_cast<long>(network_.cells_in_lac(*hlr.vlr_lac).size());
}

std::optional<std::string> World::check_registration_invariant() const {
  for (const auto& [id, sub] : subscribers_) {
    const HlrEntry& entry = hlr_.at(id);
    int cached_in = 0;
    for (const auto& [lac, vlr] : vlrs_)
      if (vlr.cache.count(id)) {
        ++cached_in;
        if (!entry.vlr_lac || *entry.vlr_lac != lac)
          return "subscriber " + id + " cached in VLR " + std::to_string(lac) +
                 " but HLR points elsewhere";
      }
    if (sub.attached) {
      if (!entry.vlr_lac)
        return "attached subscriber " + id + " has no HLR pointer";
      if (cached_in != 1)
        return "attached subscriber " + id + " cached in " +
               std::to_string(cached_in) + " VLRs";
    } else if (cached_in != 0) {
      return "detached subscriber " + id + " still cached in a VLR";
    }
  }
  return std::nullopt;
}

namespace {

// Implementation-pinned uniform double in [0,1); avoids distribution
// variability across standard libraries.
double next_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void append_trace_row(std::ostringstream& out, long tick, const Event& event,
                      const World& world, double rx) {
  const SimMetrics& m = world.metrics();
  const auto& sub = world.subscribers().at(event.subscriber);
  char buf[64];
  out << tick << ','
      << (event.type == Event::Type::Move ? "move" : "call") << ','
      << event.subscriber << ',';
  if (sub.attached)
    out << sub.serving.lac << ',' << sub.serving.cid << ',';
  else
    out << "-,-,";
  if (event.type == Event::Type::Move) {
    std::snprintf(buf, sizeof(buf), "%.4f", rx);
    out << buf;
  } else {
    out << '-';
  }
  out << ',' << m.location_updates << ',' << m.hlr_vlr_transfers << ','
      << m.paging_requests << ',' << m.cells_paged << ',' << m.failed_pages
      << ',' << m.dropped_signals << '\n';
}

}  // namespace

RunResult run(const Scenario& scenario, const Network& network,
              std::optional<std::uint64_t> seed_override) {
  World world(network, scenario.subscribers);

  std::vector<Event> events = scenario.events;
  if (scenario.walk) {
    RandomWalk walk = *scenario.walk;
    if (seed_override) walk.seed = *seed_override;
    std::mt19937_64 rng(walk.seed);

    // bounding box of the network, with a half-km margin
    double min_x = network.cells().front().x, max_x = min_x;
    double min_y = network.cells().front().y, max_y = min_y;
    for (const Cell& c : network.cells()) {
      min_x = std::min(min_x, c.x);
      max_x = std::max(max_x, c.x);
      min_y = std::min(min_y, c.y);
      max_y = std::max(max_y, c.y);
    }
    min_x -= 0.5;
    max_x += 0.5;
    min_y -= 0.5;
    max_y += 0.5;

    // subscribers start spread across the cells
    std::map<std::string, std::pair<double, double>> pos;
    for (std::size_t i = 0; i < scenario.subscribers.size(); ++i) {
      const Cell& c = network.cells()[i % network.cells().size()];
      pos[scenario.subscribers[i]] = {c.x, c.y};
    }
    for (long t = 0; t < walk.ticks; ++t) {
      const std::size_t who =
          static_cast<std::size_t>(rng() % scenario.subscribers.size());
      const std::string& id = scenario.subscribers[who];
      const double angle = next_uniform(rng) * 2.0 * 3.14159265358979323846;
      auto& p = pos[id];
      p.first = std::clamp(p.first + walk.step_km * std::cos(angle), min_x,
                           max_x);
      p.second = std::clamp(p.second + walk.step_km * std::sin(angle), min_y,
                            max_y);
      events.push_back({Event::Type::Move, id, p.first, p.second});
    }
  }

  RunResult result;
  std::ostringstream trace;
  trace << "tick,event,subscriber,lac,cid,rx_dbm,location_updates,"
           "hlr_vlr_transfers,paging_requests,cells_paged,failed_pages,"
           "dropped_signals\n";
  long tick = 0;
  for (const Event& event : events) {
    ++tick;
    double rx = -999.0;
    if (event.type == Event::Type::Move)
      rx = select_cell(event.x, event.y, network).rx_dbm;
    world.step(event);
    append_trace_row(trace, tick, event, world, rx);
  }
  result.totals = world.metrics();
  result.ticks = tick;
  result.trace_csv = trace.str();
  return result;
}

MetricsWindow window_from(const RunResult& result, double detached_floor_dbm) {
  MetricsWindow w;
  w.ticks = result.ticks;
  w.location_updates = result.totals.location_updates;
  w.dropped_signals = result.totals.dropped_signals;
  w.mean_rx_dbm = result.totals.mean_rx_dbm(detached_floor_dbm);
  return w;
}

kb::RiskAssessment assess_network_risk(const MetricsWindow& window,
                                       const kb::KnowledgeBase& knowledge) {
  const double ticks = window.ticks > 0 ? static_cast<double>(window.ticks) : 1.0;
  return knowledge.infer(
      {{"update_rate", window.location_updates / ticks},
       {"drop_rate", window.dropped_signals / ticks},
       {"mean_rx_dbm", window.mean_rx_dbm}});
}

}  // namespace fuzzloc::sim
