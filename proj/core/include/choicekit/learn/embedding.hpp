#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "choicekit/llm/cache.hpp"
#include "choicekit/task.hpp"

namespace choicekit::learn {

// Source of text embeddings. dimension() is provider-reported; nothing in the
// toolkit hard-codes a width.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Eigen::VectorXd embed(const std::string& text) = 0;
  virtual int dimension() const = 0;
  virtual std::string name() const = 0;
};

// Deterministic stand-in: the vector is a unit-norm gaussian draw seeded by
// (seed, text), so equal texts embed equally and runs replay bit-for-bit.
class MockEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit MockEmbeddingProvider(int dim = 3072, std::uint64_t seed = 0);

  Eigen::VectorXd embed(const std::string& text) override;
  int dimension() const override { return dim_; }
  std::string name() const override;

 private:
  int dim_;
  std::uint64_t seed_;
};

struct HttpEmbeddingConfig {
  std::string endpoint_url;
  std::string model_id;
  std::string credential_env = "CHOICEKIT_API_KEY";
  int timeout_seconds = 120;
};

// POSTs {model, input} and reads {data: [{embedding: [...]}]}. Dimension is
// learned from the first successful call.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);

  Eigen::VectorXd embed(const std::string& text) override;
  int dimension() const override { return dim_; }
  std::string name() const override;

 private:
  HttpEmbeddingConfig config_;
  int dim_ = 0;
};

// Precomputed vectors keyed by text hash. Text layout, one record per line:
//
//   choicekit-embeddings v1 dim=<d>
//   <16-hex text hash> <v0> <v1> ... <v_{d-1}>
//
// Lets the whole learn pipeline run offline.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  static EmbeddingStore load(const std::string& path);   // Errc::file_unreadable, schema_violation
  void save(const std::string& path) const;              // Errc::file_unwritable

  void put(const std::string& text, const Eigen::VectorXd& vector);  // Errc::dimension_mismatch
  std::optional<Eigen::VectorXd> get(const std::string& text) const;

  int dimension() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  int dim_ = 0;  // 0 until the first put/load
  std::unordered_map<std::uint64_t, Eigen::VectorXd> vectors_;
};

// Serves embeds straight from a store; unknown text is Errc::provider_failure.
class StoreEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit StoreEmbeddingProvider(EmbeddingStore store);

  Eigen::VectorXd embed(const std::string& text) override;
  int dimension() const override { return store_.dimension(); }
  std::string name() const override { return "store"; }

 private:
  EmbeddingStore store_;
};

// Embeds one text, consulting the completion cache first (embeddings are cached
// like completions, keyed by provider name + text). Empty text is
// Errc::missing_text.
Eigen::VectorXd embed_text(const std::string& text, EmbeddingProvider& provider,
                           llm::CompletionCache* cache = nullptr);

// d = v_a - v_b. Errc::dimension_mismatch when widths differ.
Eigen::VectorXd task_representation(const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_b);

// Difference representations for every task, row order following `tasks`.
// Tasks must carry texts; all vectors must agree on width.
Eigen::MatrixXd embed_tasks(const std::vector<ChoiceTask>& tasks, EmbeddingProvider& provider,
                            llm::CompletionCache* cache = nullptr);

}  // namespace choicekit::learn
