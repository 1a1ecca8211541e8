#ifndef VXAI_REPORT_HPP_
#define VXAI_REPORT_HPP_

#include "vxai/repository_store.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vxai {

// Per-domain means, one value per method.
struct DomainTable {
  std::vector<std::string> domains;  // sorted
  std::map<std::string, std::map<MethodId, double>> values;
};

// Entries without a domain tag are grouped under this name.
inline constexpr std::string_view kUnspecifiedDomain = "unspecified";

std::string metrics_csv(const Repository& repo);
DomainTable fidelity_by_domain(const Repository& repo);
DomainTable interpretability_by_domain(const Repository& repo);
std::map<std::string, std::size_t> datasets_per_domain(const Repository& repo);

std::string domain_table_csv(const DomainTable& table);
std::string datasets_per_domain_csv(const std::map<std::string, std::size_t>& counts);

// Grouped bar chart, one group per domain and one bar per method.
std::string grouped_bar_svg(const DomainTable& table, const std::string& title, double y_min, double y_max);

// Writes table1.csv, fidelity_by_domain.{csv,svg},
// interpretability_by_domain.{csv,svg} and datasets_per_domain.csv.
// Returns the written paths. Throws EmptyRepository.
std::vector<std::filesystem::path> write_report(const Repository& repo, const std::filesystem::path& out_dir);

}  // namespace vxai

#endif  // VXAI_REPORT_HPP_
