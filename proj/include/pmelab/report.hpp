#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pmelab/barriers.hpp"
#include "pmelab/capacity.hpp"
#include "pmelab/degiorgi.hpp"
#include "pmelab/perron.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

using json = nlohmann::ordered_json;

/// Plain CSV table with a fixed column order.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    std::string str() const;
};

/// Shortest text that reads back to the same double ("nan", "inf" for specials).
std::string fmt_num(double v);
std::string fmt_num(long v);
std::string fmt_num(std::size_t v);
std::string fmt_num(int v);

/// Non-finite values become strings.
json num(double v);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const json& j);
void write_csv(const std::string& path, const CsvTable& t);

json to_json(const SolveStats& s);
json to_json(const ComparisonReport& r);
json to_json(const SignReport& r);
json to_json(const PerronBracket& b);
json to_json(const RegularityProbe& p);
json to_json(const DichotomyReport& r);
json to_json(const FutureProbe& p);
json to_json(const CapacityResult& r);
json to_json(const CapacityProfile& p);
json to_json(const ThicknessReport& r);
json to_json(const IterationReport& r);
json to_json(const SupEstimateEntry& e);
json to_json(const SupEstimateLedger& l);

/// x, y[, z], t, u for one time level (defined samples only).
CsvTable field_csv(const Field& f, int level);
/// t, i, j[, k], u for every defined sample.
CsvTable samples_csv(const Field& f);
CsvTable bracket_csv(const PerronBracket& b);
/// member, radius, sup_upper, inf_lower, upper_gap, lower_gap, coarse gaps, samples
CsvTable probe_csv(const RegularityProbe& p);
CsvTable dichotomy_csv(const DichotomyReport& r);
/// k, r, cap, integrand, partial_sum and the floor-resolved columns
CsvTable profile_csv(const CapacityProfile& p);
/// j, k_j, Y_j, |A_j|, ratio, bound
CsvTable iteration_csv(const IterationReport& r);
CsvTable ledger_csv(const SupEstimateLedger& l);

}  // namespace pmelab
