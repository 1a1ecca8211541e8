#include "vxai/rng.hpp"

#include "vxai/core.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace vxai {

namespace {

constexpr std::array<std::string_view, 21> kErrorNames = {
    "MissingLabelColumn", "RaggedRow",          "EmptyDataset",
    "SingleClassLabel",   "ConfigInvalid",      "DegenerateTraining",
    "DimensionMismatch",  "TooManyFeatures",    "IncompleteMetrics",
    "BackendUnavailable", "InvalidCount",       "ProfileExtractionFailed",
    "InsufficientPersonas", "SurveyIncomplete", "NoResponsesForMethod",
    "MalformedPriors",    "InvalidEntry",       "CorruptRepository",
    "VersionMismatch",    "EmptyRepository",    "Io",
};

}  // namespace

std::string_view to_string(ErrorCode code) {
  return kErrorNames[static_cast<std::size_t>(code)];
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

std::string_view to_token(MethodId method) {
  switch (method) {
    case MethodId::shap: return "shap";
    case MethodId::lime: return "lime";
    case MethodId::pfi: return "pfi";
    case MethodId::pdp: return "pdp";
  }
  return "";
}

std::string_view to_token(ModelId model) {
  switch (model) {
    case ModelId::random_forest: return "random_forest";
    case ModelId::logistic_regression: return "logistic_regression";
  }
  return "";
}

std::optional<MethodId> parse_method(std::string_view token) {
  for (MethodId m : kAllMethods) {
    if (to_token(m) == token) return m;
  }
  return std::nullopt;
}

std::optional<ModelId> parse_model(std::string_view token) {
  for (ModelId m : kAllModels) {
    if (to_token(m) == token) return m;
  }
  return std::nullopt;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + below(n - i)]);
  }
  pool.resize(k);
  return pool;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t offset) {
  return splitmix64(master ^ splitmix64(offset));
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace vxai
