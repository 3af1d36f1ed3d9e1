#include "dagkit/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <tuple>

#include "dagkit/errors.hpp"

namespace dagkit {

void RetrieverConfig::check() const {
  if (k < 1) throw ConfigError("retriever k must be >= 1");
  if (!(precision_x >= 0.0 && precision_x <= 1.0)) throw ConfigError("precision must lie in [0, 1]");
  if (!(bm25_k1 >= 0.0) || !(bm25_b >= 0.0 && bm25_b <= 1.0)) throw ConfigError("invalid BM25 parameters");
}

CorpusStats CorpusStats::from_documents(std::span<const std::vector<std::string>> docs) {
  CorpusStats stats;
  stats.doc_count = docs.size();
  std::size_t total = 0;
  for (const auto& doc : docs) {
    total += doc.size();
    std::set<std::string_view> unique(doc.begin(), doc.end());
    for (auto term : unique) ++stats.doc_freq[std::string(term)];
  }
  stats.avg_doc_length = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
  return stats;
}

double CorpusStats::idf(const std::string& term) const {
  auto it = doc_freq.find(term);
  const double df = it == doc_freq.end() ? 0.0 : static_cast<double>(it->second);
  const double n = static_cast<double>(doc_count);
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double bm25_score(std::span<const std::string> query_tokens, std::span<const std::string> doc_tokens,
                  const CorpusStats& stats, double k1, double b) {
  if (query_tokens.empty() || doc_tokens.empty()) return 0.0;
  std::unordered_map<std::string_view, std::size_t> tf;
  for (const auto& t : doc_tokens) ++tf[t];
  const double length_norm =
      stats.avg_doc_length > 0.0 ? static_cast<double>(doc_tokens.size()) / stats.avg_doc_length : 0.0;
  double score = 0.0;
  for (const auto& q : query_tokens) {
    auto it = tf.find(q);
    if (it == tf.end()) continue;
    const double f = static_cast<double>(it->second);
    score += stats.idf(q) * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * length_norm));
  }
  return score;
}

Bm25Retriever::Bm25Retriever(const ApiIndex& index, double k1, double b) : index_(index), k1_(k1), b_(b) {
  docs_.reserve(index.doc_count());
  for (const auto& spec : index.specs()) docs_.push_back(retrieval_key(spec));
  stats_ = CorpusStats::from_documents(docs_);
}

double Bm25Retriever::score(std::span<const std::string> query_tokens, std::size_t id) const {
  return bm25_score(query_tokens, docs_.at(id), stats_, k1_, b_);
}

bool Bm25Retriever::ranks_before(const ScoredDoc& a, const ScoredDoc& b) const {
  if (a.score != b.score) return a.score > b.score;
  const ApiSpec& sa = index_.spec(a.id);
  const ApiSpec& sb = index_.spec(b.id);
  return std::tie(sa.provider, sa.service, sa.name) < std::tie(sb.provider, sb.service, sb.name);
}

std::vector<ScoredDoc> Bm25Retriever::rank_all(std::span<const std::string> query_tokens) const {
  std::vector<ScoredDoc> ranked;
  ranked.reserve(docs_.size());
  for (std::size_t id = 0; id < docs_.size(); ++id) ranked.push_back({id, score(query_tokens, id)});
  std::sort(ranked.begin(), ranked.end(),
            [this](const ScoredDoc& a, const ScoredDoc& b) { return ranks_before(a, b); });
  return ranked;
}

std::vector<ScoredDoc> Bm25Retriever::retrieve_topk(std::span<const std::string> query_tokens,
                                                    std::size_t k) const {
  if (k > docs_.size()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds document count " + std::to_string(docs_.size()));
  }
  auto ranked = rank_all(query_tokens);
  ranked.resize(k);
  return ranked;
}

InclusionPlan::InclusionPlan(std::vector<std::string> task_ids, std::vector<bool> include, double precision_x,
                             std::uint64_t seed)
    : task_ids_(std::move(task_ids)), include_(std::move(include)), precision_x_(precision_x), seed_(seed) {
  if (task_ids_.size() != include_.size()) throw ContractError("inclusion plan size mismatch");
  for (std::size_t i = 0; i < task_ids_.size(); ++i) {
    if (!lookup_.emplace(task_ids_[i], i).second) {
      throw ConfigError("duplicate task id '" + task_ids_[i] + "' in inclusion plan");
    }
  }
}

bool InclusionPlan::includes(const std::string& task_id) const {
  auto it = lookup_.find(task_id);
  if (it == lookup_.end()) throw ContractError("task '" + task_id + "' is not covered by the inclusion plan");
  return include_[it->second];
}

std::size_t InclusionPlan::included_count() const {
  return static_cast<std::size_t>(std::count(include_.begin(), include_.end(), true));
}

nlohmann::json InclusionPlan::to_json() const {
  nlohmann::json tasks = nlohmann::json::object();
  for (std::size_t i = 0; i < task_ids_.size(); ++i) tasks[task_ids_[i]] = include_[i];
  return nlohmann::json{{"precision", precision_x_},
                        {"seed", seed_},
                        {"task_count", task_ids_.size()},
                        {"included", included_count()},
                        {"tasks", std::move(tasks)}};
}

namespace {

// Uniform integer in [0, bound) by rejection; bound > 0.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

}  // namespace

InclusionPlan plan_inclusions(std::span<const std::string> task_ids, double precision_x, std::uint64_t seed) {
  if (!(precision_x >= 0.0 && precision_x <= 1.0)) throw ConfigError("precision must lie in [0, 1]");
  const std::size_t n = task_ids.size();
  const auto selected = static_cast<std::size_t>(std::llround(precision_x * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<bool> include(n, false);
  for (std::size_t i = 0; i < selected; ++i) include[order[i]] = true;
  return InclusionPlan(std::vector<std::string>(task_ids.begin(), task_ids.end()), std::move(include), precision_x,
                       seed);
}

std::vector<ScoredDoc> precision_retrieve(const Bm25Retriever& retriever, std::span<const std::string> target_apis,
                                          Provider provider, std::span<const std::string> query_tokens,
                                          const RetrieverConfig& config, bool include_target) {
  config.check();
  const ApiIndex& index = retriever.index();
  std::set<std::size_t> target_ids;
  for (const auto& name : target_apis) {
    for (std::size_t id : index.lookup_ids(name)) target_ids.insert(id);
  }

  std::optional<std::size_t> oracle;
  if (include_target) {
    if (target_apis.empty()) throw ConfigError("task has no target API to include");
    const auto ids = index.lookup_ids(target_apis.front());
    if (ids.empty()) {
      throw ConfigError("target '" + target_apis.front() + "' is not in the index; cannot force its document");
    }
    oracle = ids.front();
    for (std::size_t id : ids) {
      if (index.spec(id).provider == provider) {
        oracle = id;
        break;
      }
    }
  }

  const std::size_t wanted = include_target ? config.k - 1 : config.k;
  std::vector<ScoredDoc> result;
  std::optional<ScoredDoc> forced;
  const std::vector<ScoredDoc> ranked = retriever.rank_all(query_tokens);
  for (const ScoredDoc& doc : ranked) {
    if (oracle && doc.id == *oracle) {
      forced = doc;
      continue;
    }
    if (target_ids.count(doc.id) != 0) continue;
    if (result.size() < wanted) result.push_back(doc);
  }
  if (result.size() < wanted) {
    throw ConfigError("only " + std::to_string(result.size()) + " non-target documents available, need " +
                      std::to_string(wanted));
  }
  if (forced) {
    if (config.pin_target_first) {
      result.insert(result.begin(), *forced);
    } else {
      // rank_all order is total, so merging by rank keeps the same tie-break.
      result.push_back(*forced);
      std::unordered_map<std::size_t, std::size_t> position;
      for (std::size_t i = 0; i < ranked.size(); ++i) position[ranked[i].id] = i;
      std::sort(result.begin(), result.end(),
                [&](const ScoredDoc& a, const ScoredDoc& b) { return position[a.id] < position[b.id]; });
    }
  }
  return result;
}

}  // namespace dagkit
