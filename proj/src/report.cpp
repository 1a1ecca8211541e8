#include "vxai/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

namespace vxai {

namespace {

std::string domain_of(const RepositoryEntry& e) {
  return e.profile.domain_tag.empty() ? std::string(kUnspecifiedDomain) : e.profile.domain_tag;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

template <typename Getter>
DomainTable domain_means(const Repository& repo, Getter get) {
  std::map<std::string, std::map<MethodId, std::pair<double, std::size_t>>> sums;
  for (const auto& e : repo.list_entries()) {
    auto& row = sums[domain_of(e)];
    for (MethodId m : kAllMethods) {
      auto& cell = row[m];
      cell.first += get(e, m);
      ++cell.second;
    }
  }
  DomainTable table;
  for (const auto& [domain, row] : sums) {
    table.domains.push_back(domain);
    for (const auto& [m, cell] : row) table.values[domain][m] = cell.first / static_cast<double>(cell.second);
  }
  return table;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

constexpr std::array<const char*, 4> kBarColours = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759"};

}  // namespace

std::string metrics_csv(const Repository& repo) {
  std::string out = "dataset,method,fidelity,simplicity,stability\n";
  for (const auto& e : repo.list_entries()) {
    for (MethodId m : kAllMethods) {
      const auto& q = e.quant.methods.at(m);
      out += fmt::format("{},{},{:.6f},{:.6f},{:.6f}\n", csv_field(e.dataset_id), to_token(m), q.fidelity,
                         q.simplicity, q.stability);
    }
  }
  return out;
}

DomainTable fidelity_by_domain(const Repository& repo) {
  return domain_means(repo, [](const RepositoryEntry& e, MethodId m) { return e.quant.methods.at(m).fidelity; });
}

DomainTable interpretability_by_domain(const Repository& repo) {
  return domain_means(repo, [](const RepositoryEntry& e, MethodId m) {
    return e.qual.methods.at(m).means.interpretability;
  });
}

std::map<std::string, std::size_t> datasets_per_domain(const Repository& repo) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : repo.list_entries()) ++counts[domain_of(e)];
  return counts;
}

std::string domain_table_csv(const DomainTable& table) {
  std::string out = "domain";
  for (MethodId m : kAllMethods) out += fmt::format(",{}", to_token(m));
  out += "\n";
  for (const auto& d : table.domains) {
    out += csv_field(d);
    for (MethodId m : kAllMethods) out += fmt::format(",{:.4f}", table.values.at(d).at(m));
    out += "\n";
  }
  return out;
}

std::string datasets_per_domain_csv(const std::map<std::string, std::size_t>& counts) {
  std::string out = "domain,datasets\n";
  for (const auto& [d, n] : counts) out += fmt::format("{},{}\n", csv_field(d), n);
  return out;
}

std::string grouped_bar_svg(const DomainTable& table, const std::string& title, double y_min, double y_max) {
  const double left = 60;
  const double top = 40;
  const double plot_h = 240;
  const double bar_w = 18;
  const double group_w = bar_w * static_cast<double>(kAllMethods.size()) + 24;
  const double plot_w = std::max(group_w * static_cast<double>(table.domains.size()), 200.0);
  const double width = left + plot_w + 120;
  const double height = top + plot_h + 80;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  auto y_of = [&](double v) { return top + plot_h * (y_max - std::clamp(v, y_min, y_max)) / (y_max - y_min); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n",
      width, height);
  svg += fmt::format("<text x=\"{:.0f}\" y=\"20\" font-size=\"14\">{}</text>\n", left, xml_escape(title));
  for (int t = 0; t <= 4; ++t) {
    const double v = y_min + (y_max - y_min) * t / 4.0;
    const double y = y_of(v);
    svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", left, y,
                       left + plot_w, y);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", left - 6, y + 4, v);
  }
  const double zero_y = y_of(std::clamp(0.0, y_min, y_max));
  for (std::size_t g = 0; g < table.domains.size(); ++g) {
    const auto& d = table.domains[g];
    const double gx = left + group_w * static_cast<double>(g) + 12;
    for (std::size_t k = 0; k < kAllMethods.size(); ++k) {
      const double v = table.values.at(d).at(kAllMethods[k]);
      const double y = y_of(v);
      svg += fmt::format(
          "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"><title>{} {}: "
          "{:.4f}</title></rect>\n",
          gx + bar_w * static_cast<double>(k), std::min(y, zero_y), bar_w - 2, std::abs(zero_y - y), kBarColours[k],
          xml_escape(d), to_token(kAllMethods[k]), v);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                       gx + bar_w * static_cast<double>(kAllMethods.size()) / 2, top + plot_h + 18, xml_escape(d));
  }
  svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#333\"/>\n", left,
                     zero_y, left + plot_w, zero_y);
  for (std::size_t k = 0; k < kAllMethods.size(); ++k) {
    const double ly = top + 16.0 * static_cast<double>(k);
    svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", left + plot_w + 16,
                       ly, kBarColours[k]);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", left + plot_w + 32, ly + 9,
                       to_token(kAllMethods[k]));
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> write_report(const Repository& repo, const std::filesystem::path& out_dir) {
  if (repo.empty()) throw Error(ErrorCode::EmptyRepository, "repository has no entries");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    write_text(out_dir / name, text);
    written.push_back(out_dir / name);
  };

  emit("table1.csv", metrics_csv(repo));
  const DomainTable fid = fidelity_by_domain(repo);
  double fid_min = 0.0;
  for (const auto& [d, row] : fid.values) {
    for (const auto& [m, v] : row) fid_min = std::min(fid_min, v);
  }
  emit("fidelity_by_domain.csv", domain_table_csv(fid));
  emit("fidelity_by_domain.svg",
       grouped_bar_svg(fid, "Average fidelity by domain and XAI method", fid_min < 0.0 ? -1.0 : 0.0, 1.0));
  const DomainTable interp = interpretability_by_domain(repo);
  emit("interpretability_by_domain.csv", domain_table_csv(interp));
  emit("interpretability_by_domain.svg",
       grouped_bar_svg(interp, "Average interpretability (1-5) by domain and XAI method", 0.0, 5.0));
  emit("datasets_per_domain.csv", datasets_per_domain_csv(datasets_per_domain(repo)));
  return written;
}

}  // namespace vxai
