#include "vxai/survey_priors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace vxai {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fold(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::toupper(c)));
  }
  return out;
}

std::string lower_trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedPriors, why); }

}  // namespace

std::optional<std::int64_t> SurveyPriors::frequency_of(std::string_view name) const {
  for (const auto& [n, c] : technique_frequency) {
    if (n == name) return c;
  }
  return std::nullopt;
}

const std::vector<std::string>* SurveyPriors::methods_for(std::string_view domain) const {
  const std::string key = lower_trim(domain);
  for (const auto& [d, methods] : domain_methods) {
    if (lower_trim(d) == key) return &methods;
  }
  return nullptr;
}

std::optional<MethodId> map_method_name(std::string_view name) {
  const std::string f = fold(name);
  if (f == "SHAP" || f == "KERNELSHAP" || f == "SHAPLEYADDITIVEEXPLANATIONS") return MethodId::shap;
  if (f == "LIME") return MethodId::lime;
  if (f == "PFI" || f == "PERMUTATIONIMPORTANCE" || f == "PERMUTATIONFEATUREIMPORTANCE") return MethodId::pfi;
  if (f == "PDP" || f == "PARTIALDEPENDENCE" || f == "PARTIALDEPENDENCEPLOT") return MethodId::pdp;
  return std::nullopt;
}

SurveyPriors parse_priors(std::string_view json_text, PriorsReport* report) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("top level must be an object");
  const bool has_freq = doc.contains(kFrequencyKey);
  const bool has_domain = doc.contains(kDomainKey);
  if (!has_freq && !has_domain) {
    malformed("expected '" + std::string(kFrequencyKey) + "' or '" + std::string(kDomainKey) + "'");
  }

  SurveyPriors priors;
  std::vector<std::string> seen;
  auto note_name = [&](const std::string& name) {
    if (!map_method_name(name) && std::find(seen.begin(), seen.end(), name) == seen.end()) seen.push_back(name);
  };

  if (has_freq) {
    const auto& freq = doc.at(kFrequencyKey);
    if (!freq.is_object()) malformed("technique frequency must be an object");
    for (const auto& [name, count] : freq.items()) {
      if (!count.is_number_integer()) malformed("count for '" + name + "' is not an integer");
      const auto value = count.get<std::int64_t>();
      if (value < 0) malformed("count for '" + name + "' is negative");
      priors.technique_frequency.emplace_back(name, value);
      note_name(name);
    }
  }
  if (has_domain) {
    const auto& domains = doc.at(kDomainKey);
    if (!domains.is_object()) malformed("domain methods must be an object");
    for (const auto& [domain, list] : domains.items()) {
      if (!list.is_array() || list.empty()) malformed("domain '" + domain + "' needs a non-empty list");
      std::vector<std::string> methods;
      for (const auto& m : list) {
        if (!m.is_string()) malformed("domain '" + domain + "' lists a non-string method");
        methods.push_back(m.get<std::string>());
        note_name(methods.back());
      }
      priors.domain_methods.emplace_back(domain, std::move(methods));
    }
  }
  if (doc.contains("source_note") && doc["source_note"].is_string()) {
    priors.source_note = doc["source_note"].get<std::string>();
  }
  if (report) report->unmapped_names = std::move(seen);
  return priors;
}

SurveyPriors load_priors(const std::filesystem::path& path, PriorsReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) malformed("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  SurveyPriors priors = parse_priors(buffer.str(), report);
  if (priors.source_note.empty()) priors.source_note = path.filename().string();
  return priors;
}

std::string serialize_priors(const SurveyPriors& priors) {
  ordered_json doc = ordered_json::object();
  if (!priors.technique_frequency.empty()) {
    ordered_json freq = ordered_json::object();
    for (const auto& [name, count] : priors.technique_frequency) freq[name] = count;
    doc[std::string(kFrequencyKey)] = std::move(freq);
  }
  if (!priors.domain_methods.empty()) {
    ordered_json domains = ordered_json::object();
    for (const auto& [domain, methods] : priors.domain_methods) domains[domain] = methods;
    doc[std::string(kDomainKey)] = std::move(domains);
  }
  if (!priors.source_note.empty()) doc["source_note"] = priors.source_note;
  return doc.dump(2) + "\n";
}

SurveyPriors merge_priors(const SurveyPriors& base, const SurveyPriors& extra) {
  SurveyPriors out = base;
  for (const auto& entry : extra.technique_frequency) {
    auto it = std::find_if(out.technique_frequency.begin(), out.technique_frequency.end(),
                           [&](const auto& e) { return e.first == entry.first; });
    if (it != out.technique_frequency.end()) {
      it->second = entry.second;
    } else {
      out.technique_frequency.push_back(entry);
    }
  }
  for (const auto& entry : extra.domain_methods) {
    auto it = std::find_if(out.domain_methods.begin(), out.domain_methods.end(),
                           [&](const auto& e) { return e.first == entry.first; });
    if (it != out.domain_methods.end()) {
      it->second = entry.second;
    } else {
      out.domain_methods.push_back(entry);
    }
  }
  if (out.source_note.empty()) {
    out.source_note = extra.source_note;
  } else if (!extra.source_note.empty()) {
    out.source_note += "; " + extra.source_note;
  }
  return out;
}

double method_frequency(const SurveyPriors& priors, MethodId method) {
  double total = 0.0;
  for (const auto& [name, count] : priors.technique_frequency) {
    if (map_method_name(name) == method) total += static_cast<double>(count);
  }
  return total;
}

double domain_bonus(const SurveyPriors& priors, std::string_view domain, MethodId method) {
  if (const auto* listed = priors.methods_for(domain)) {
    for (std::size_t rank = 0; rank < listed->size(); ++rank) {
      if (map_method_name((*listed)[rank]) == method) {
        return 0.5 + 0.5 * (1.0 - static_cast<double>(rank) / static_cast<double>(listed->size()));
      }
    }
  }
  double max_freq = 0.0;
  for (MethodId m : kAllMethods) max_freq = std::max(max_freq, method_frequency(priors, m));
  if (max_freq <= 0.0) return 0.0;
  return 0.5 * method_frequency(priors, method) / max_freq;
}

}  // namespace vxai
