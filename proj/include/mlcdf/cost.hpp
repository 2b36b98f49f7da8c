#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mlcdf::cost {

enum class WorkModel { wallclock, deterministic };

std::string to_string(WorkModel model);
WorkModel work_model_from_string(const std::string& name);

/// Sample count and average work of one (level, stratum) cell of a run.
/// stratum == -1 marks an unstratified level.
struct LedgerEntry {
  int level = 0;
  int stratum = -1;
  std::size_t count = 0;
  double avg_work = 0.0;
};

/// Cost record of a single run: sum over cells of avg_work * count.
class CostLedger {
 public:
  CostLedger() = default;
  explicit CostLedger(std::string method) : method_(std::move(method)) {}

  void add(LedgerEntry entry) { entries_.push_back(entry); }

  const std::string& method() const { return method_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  double total() const;
  int max_level() const;

  nlohmann::json to_json() const;

 private:
  std::string method_;
  std::vector<LedgerEntry> entries_;
};

/// Mean of the per-run totals. Throws std::domain_error for no ledgers.
double aggregate(std::span<const CostLedger> ledgers);

struct CostCell {
  std::string method;
  double epsilon = 0.0;
  double mean_cost = 0.0;
};

/// Rows are tolerances (descending), columns are methods in first-seen
/// order. Speedups are baseline cost / method cost, with MC and MLMC as
/// baselines (the first method stands in for a missing baseline).
class ComparisonTable {
 public:
  explicit ComparisonTable(std::span<const CostCell> cells);

  const std::vector<std::string>& methods() const { return methods_; }
  const std::vector<double>& epsilons() const { return epsilons_; }
  /// NaN when the (epsilon, method) pair was not run.
  double cost(std::size_t row, std::size_t column) const;
  double speedup_vs_mc(std::size_t row, std::size_t column) const;
  double speedup_vs_mlmc(std::size_t row, std::size_t column) const;

  std::string to_csv() const;
  nlohmann::json to_json() const;
  /// Long format: method,epsilon,cost - one row per series point.
  std::string plot_data_csv() const;

 private:
  double speedup(std::size_t row, std::size_t column, const std::string& baseline) const;

  std::vector<std::string> methods_;
  std::vector<double> epsilons_;
  std::vector<std::vector<double>> costs_;
};

}  // namespace mlcdf::cost
