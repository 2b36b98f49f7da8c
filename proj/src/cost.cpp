#include "mlcdf/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace mlcdf::cost {

std::string to_string(WorkModel model) {
  return model == WorkModel::wallclock ? "wallclock" : "deterministic";
}

WorkModel work_model_from_string(const std::string& name) {
  if (name == "wallclock") return WorkModel::wallclock;
  if (name == "deterministic") return WorkModel::deterministic;
  throw std::invalid_argument("unknown work model '" + name + "'");
}

double CostLedger::total() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.avg_work * static_cast<double>(e.count);
  return sum;
}

int CostLedger::max_level() const {
  int level = -1;
  for (const auto& e : entries_) level = std::max(level, e.level);
  return level;
}

nlohmann::json CostLedger::to_json() const {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& e : entries_) {
    cells.push_back({{"level", e.level}, {"stratum", e.stratum}, {"count", e.count},
                     {"avg_work", e.avg_work}});
  }
  return {{"method", method_}, {"total", total()}, {"entries", cells}};
}

double aggregate(std::span<const CostLedger> ledgers) {
  if (ledgers.empty()) throw std::domain_error("aggregate: no ledgers");
  double sum = 0.0;
  for (const auto& ledger : ledgers) sum += ledger.total();
  return sum / static_cast<double>(ledgers.size());
}

ComparisonTable::ComparisonTable(std::span<const CostCell> cells) {
  for (const auto& cell : cells) {
    if (std::find(methods_.begin(), methods_.end(), cell.method) == methods_.end()) {
      methods_.push_back(cell.method);
    }
    if (std::find(epsilons_.begin(), epsilons_.end(), cell.epsilon) == epsilons_.end()) {
      epsilons_.push_back(cell.epsilon);
    }
  }
  std::sort(epsilons_.begin(), epsilons_.end(), std::greater<>());
  costs_.assign(epsilons_.size(),
                std::vector<double>(methods_.size(), std::numeric_limits<double>::quiet_NaN()));
  for (const auto& cell : cells) {
    const auto row = std::find(epsilons_.begin(), epsilons_.end(), cell.epsilon) - epsilons_.begin();
    const auto col = std::find(methods_.begin(), methods_.end(), cell.method) - methods_.begin();
    costs_[row][col] = cell.mean_cost;
  }
}

double ComparisonTable::cost(std::size_t row, std::size_t column) const {
  return costs_.at(row).at(column);
}

double ComparisonTable::speedup(std::size_t row, std::size_t column,
                                const std::string& baseline) const {
  if (methods_.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto it = std::find(methods_.begin(), methods_.end(), baseline);
  const std::size_t base = it == methods_.end() ? 0 : static_cast<std::size_t>(it - methods_.begin());
  return cost(row, base) / cost(row, column);
}

double ComparisonTable::speedup_vs_mc(std::size_t row, std::size_t column) const {
  return speedup(row, column, "mc");
}

double ComparisonTable::speedup_vs_mlmc(std::size_t row, std::size_t column) const {
  return speedup(row, column, "mlmc");
}

namespace {

std::string number(double value) {
  if (std::isnan(value)) return "";
  return fmt::format("{:.10g}", value);
}

}  // namespace

std::string ComparisonTable::to_csv() const {
  std::string out = "epsilon";
  for (const auto& m : methods_) out += ",cost_" + m;
  for (const auto& m : methods_) out += ",speedup_vs_mc_" + m;
  for (const auto& m : methods_) out += ",speedup_vs_mlmc_" + m;
  out += '\n';
  for (std::size_t r = 0; r < epsilons_.size(); ++r) {
    out += number(epsilons_[r]);
    for (std::size_t c = 0; c < methods_.size(); ++c) out += "," + number(cost(r, c));
    for (std::size_t c = 0; c < methods_.size(); ++c) out += "," + number(speedup_vs_mc(r, c));
    for (std::size_t c = 0; c < methods_.size(); ++c) out += "," + number(speedup_vs_mlmc(r, c));
    out += '\n';
  }
  return out;
}

nlohmann::json ComparisonTable::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < epsilons_.size(); ++r) {
    nlohmann::json row = {{"epsilon", epsilons_[r]}};
    for (std::size_t c = 0; c < methods_.size(); ++c) {
      if (std::isnan(cost(r, c))) continue;
      row["methods"][methods_[c]] = {{"cost", cost(r, c)},
                                     {"speedup_vs_mc", speedup_vs_mc(r, c)},
                                     {"speedup_vs_mlmc", speedup_vs_mlmc(r, c)}};
    }
    rows.push_back(row);
  }
  return {{"methods", methods_}, {"rows", rows}};
}

std::string ComparisonTable::plot_data_csv() const {
  std::string out = "method,epsilon,cost\n";
  for (std::size_t c = 0; c < methods_.size(); ++c) {
    for (std::size_t r = 0; r < epsilons_.size(); ++r) {
      if (std::isnan(cost(r, c))) continue;
      out += methods_[c] + "," + number(epsilons_[r]) + "," + number(cost(r, c)) + "\n";
    }
  }
  return out;
}

}  // namespace mlcdf::cost
