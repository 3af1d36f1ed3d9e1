#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dagkit/api_index.hpp"
#include "dagkit/tokenize.hpp"
#include "json.hpp"

namespace dagkit {

struct RetrieverConfig {
  std::size_t k = 1;
  double precision_x = 0.5;
  std::uint64_t seed = 0;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  bool pin_target_first = false;

  // Throws ConfigError unless k >= 1 and 0 <= precision_x <= 1.
  void check() const;
};

// Document frequencies and length statistics of a tokenized corpus.
struct CorpusStats {
  std::size_t doc_count = 0;
  double avg_doc_length = 0.0;
  std::unordered_map<std::string, std::size_t> doc_freq;

  static CorpusStats from_documents(std::span<const std::vector<std::string>> docs);
  // ln((N - df + 0.5) / (df + 0.5) + 1); never negative.
  double idf(const std::string& term) const;
};

// Okapi BM25. Every query token contributes, so a repeated query token is
// counted once per repetition.
double bm25_score(std::span<const std::string> query_tokens, std::span<const std::string> doc_tokens,
                  const CorpusStats& stats, double k1 = 1.2, double b = 0.75);

struct ScoredDoc {
  std::size_t id;  // position in ApiIndex::specs()
  double score;
};

// BM25 over the retrieval keys of every spec in an index. Holds a reference to
// the index, which must outlive it.
class Bm25Retriever {
 public:
  Bm25Retriever(const ApiIndex& index, double k1 = 1.2, double b = 0.75);

  const ApiIndex& index() const { return index_; }
  const CorpusStats& stats() const { return stats_; }
  std::span<const std::string> doc_tokens(std::size_t id) const { return docs_.at(id); }

  double score(std::span<const std::string> query_tokens, std::size_t id) const;

  // Every document, descending score, ties by ascending (provider, service, name).
  std::vector<ScoredDoc> rank_all(std::span<const std::string> query_tokens) const;

  // Throws ConfigError when k exceeds the document count.
  std::vector<ScoredDoc> retrieve_topk(std::span<const std::string> query_tokens, std::size_t k) const;

 private:
  bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) const;

  const ApiIndex& index_;
  double k1_;
  double b_;
  std::vector<std::vector<std::string>> docs_;
  CorpusStats stats_;
};

// Which tasks get the target document forced into their retrieval results.
class InclusionPlan {
 public:
  InclusionPlan() = default;
  InclusionPlan(std::vector<std::string> task_ids, std::vector<bool> include, double precision_x,
                std::uint64_t seed);

  bool covers(const std::string& task_id) const { return lookup_.count(task_id) != 0; }
  // Throws ContractError for tasks outside the plan.
  bool includes(const std::string& task_id) const;
  std::size_t size() const { return task_ids_.size(); }
  std::size_t included_count() const;
  const std::vector<std::string>& task_ids() const { return task_ids_; }

  nlohmann::json to_json() const;

 private:
  std::vector<std::string> task_ids_;
  std::vector<bool> include_;
  std::unordered_map<std::string, std::size_t> lookup_;
  double precision_x_ = 0.0;
  std::uint64_t seed_ = 0;
};

// Marks exactly round(precision_x * N) tasks, picked by a seeded Fisher-Yates
// shuffle (mt19937_64 with rejection sampling, so plans are identical across
// standard libraries). Throws ConfigError on duplicate ids or x outside [0, 1].
InclusionPlan plan_inclusions(std::span<const std::string> task_ids, double precision_x, std::uint64_t seed);

// k documents for one task. With the plan bit set, the first target's document
// is forced in next to the best k-1 non-target documents; otherwise the best k
// non-target documents are returned. `provider` picks among same-named
// targets from several services.
std::vector<ScoredDoc> precision_retrieve(const Bm25Retriever& retriever, std::span<const std::string> target_apis,
                                          Provider provider, std::span<const std::string> query_tokens,
                                          const RetrieverConfig& config, bool include_target);

}  // namespace dagkit
