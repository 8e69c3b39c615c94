#include "choicekit/learn/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "choicekit/csv.hpp"
#include "choicekit/errors.hpp"
#include "choicekit/rng.hpp"

namespace choicekit::learn {

using nlohmann::json;

MockEmbeddingProvider::MockEmbeddingProvider(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim_ < 1) throw Error(Errc::invalid_hyperparameter, "embedding dim must be >= 1");
}

std::string MockEmbeddingProvider::name() const {
  return "mock-embed-" + std::to_string(dim_) + "-" + std::to_string(seed_);
}

Eigen::VectorXd MockEmbeddingProvider::embed(const std::string& text) {
  Rng rng(mix_seed(seed_, fnv1a64(text)));
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v(i) = normal(rng, 0.0, 1.0);
  double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config)
    : config_(std::move(config)) {
  if (config_.endpoint_url.find("://") == std::string::npos)
    throw Error(Errc::config_invalid, "endpoint_url must include a scheme");
  if (config_.model_id.empty()) throw Error(Errc::config_invalid, "model_id must be non-empty");
}

std::string HttpEmbeddingProvider::name() const { return "http-embed:" + config_.model_id; }

Eigen::VectorXd HttpEmbeddingProvider::embed(const std::string& text) {
  const char* cred = std::getenv(config_.credential_env.c_str());
  if (cred == nullptr || *cred == '\0')
    throw Error(Errc::auth_missing,
                "credential environment variable " + config_.credential_env + " is unset");

  std::size_t scheme_end = config_.endpoint_url.find("://") + 3;
  std::size_t path_start = config_.endpoint_url.find('/', scheme_end);
  std::string base = (path_start == std::string::npos) ? config_.endpoint_url
                                                       : config_.endpoint_url.substr(0, path_start);
  std::string path = (path_start == std::string::npos) ? "/"
                                                       : config_.endpoint_url.substr(path_start);

  json body;
  body["model"] = config_.model_id;
  body["input"] = text;

  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers{{"Authorization", std::string("Bearer ") + cred}};

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res)
    throw Error(Errc::provider_transient,
                "transport error talking to " + base + ": " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw Error(Errc::provider_transient, "status " + std::to_string(res->status) + " from " + base);
  if (res->status != 200)
    throw Error(Errc::provider_failure,
                "status " + std::to_string(res->status) + " from " + base + ": " + res->body);

  Eigen::VectorXd v;
  try {
    json parsed = json::parse(res->body);
    const json& arr = parsed.at("data").at(0).at("embedding");
    v.resize(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i)
      v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  } catch (const json::exception& e) {
    throw Error(Errc::provider_failure, std::string("malformed embedding payload: ") + e.what());
  }
  if (v.size() == 0) throw Error(Errc::provider_failure, "provider returned an empty embedding");
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (static_cast<int>(v.size()) != dim_)
    throw Error(Errc::dimension_mismatch, "provider switched dimensionality mid-run: " +
                                              std::to_string(v.size()) + " vs " +
                                              std::to_string(dim_));
  return v;
}

EmbeddingStore EmbeddingStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw Error(Errc::schema_violation, path + ": empty file");
  int dim = 0;
  if (header.rfind("choicekit-embeddings v1 dim=", 0) != 0 ||
      std::from_chars(header.data() + 28, header.data() + header.size(), dim).ec != std::errc() ||
      dim < 1)
    throw Error(Errc::schema_violation, path + ": bad header '" + header + "'");

  EmbeddingStore store;
  store.dim_ = dim;
  std::string line;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string hash_text;
    fields >> hash_text;
    std::uint64_t key = 0;
    if (std::from_chars(hash_text.data(), hash_text.data() + hash_text.size(), key, 16).ec !=
        std::errc())
      throw Error(Errc::schema_violation,
                  path + ":" + std::to_string(line_no) + ": bad hash '" + hash_text + "'");
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i)
      if (!(fields >> v(i)))
        throw Error(Errc::schema_violation,
                    path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " values");
    double extra = 0.0;
    if (fields >> extra)
      throw Error(Errc::schema_violation,
                  path + ":" + std::to_string(line_no) + ": more than " + std::to_string(dim) +
                      " values");
    store.vectors_[key] = std::move(v);
  }
  return store;
}

void EmbeddingStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path);
  out << "choicekit-embeddings v1 dim=" << dim_ << '\n';

  std::vector<std::uint64_t> keys;
  keys.reserve(vectors_.size());
  for (const auto& [key, v] : vectors_) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  char hex[17];
  for (std::uint64_t key : keys) {
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(key));
    out << hex;
    const Eigen::VectorXd& v = vectors_.at(key);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << csv::format_double(v(i));
    out << '\n';
  }
}

void EmbeddingStore::put(const std::string& text, const Eigen::VectorXd& vector) {
  if (vector.size() == 0) throw Error(Errc::dimension_mismatch, "refusing to store an empty vector");
  if (dim_ == 0) dim_ = static_cast<int>(vector.size());
  if (static_cast<int>(vector.size()) != dim_)
    throw Error(Errc::dimension_mismatch, "store holds " + std::to_string(dim_) +
                                              "-dim vectors, got " + std::to_string(vector.size()));
  vectors_[fnv1a64(text)] = vector;
}

std::optional<Eigen::VectorXd> EmbeddingStore::get(const std::string& text) const {
  auto it = vectors_.find(fnv1a64(text));
  if (it == vectors_.end()) return std::nullopt;
  return it->second;
}

StoreEmbeddingProvider::StoreEmbeddingProvider(EmbeddingStore store) : store_(std::move(store)) {}

Eigen::VectorXd StoreEmbeddingProvider::embed(const std::string& text) {
  auto v = store_.get(text);
  if (!v)
    throw Error(Errc::provider_failure,
                "no precomputed embedding for text starting '" + text.substr(0, 40) + "'");
  return *v;
}

namespace {

std::string serialize_vector(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr.dump();
}

Eigen::VectorXd deserialize_vector(const std::string& text) {
  json arr = json::parse(text);
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

}  // namespace

Eigen::VectorXd embed_text(const std::string& text, EmbeddingProvider& provider,
                           llm::CompletionCache* cache) {
  if (text.empty()) throw Error(Errc::missing_text, "cannot embed empty text");
  llm::CompletionRequest key;
  key.model_id = "embedding/" + provider.name();
  key.user_text = text;
  if (cache) {
    if (auto hit = cache->get(key)) {
      try {
        return deserialize_vector(*hit);
      } catch (const json::exception&) {
        // fall through to a fresh call; put() below repairs the entry
      }
    }
  }
  Eigen::VectorXd v = provider.embed(text);
  if (cache) cache->put(key, serialize_vector(v));
  return v;
}

Eigen::VectorXd task_representation(const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_b) {
  if (v_a.size() != v_b.size())
    throw Error(Errc::dimension_mismatch, "option vectors are " + std::to_string(v_a.size()) +
                                              " and " + std::to_string(v_b.size()) + " wide");
  return v_a - v_b;
}

Eigen::MatrixXd embed_tasks(const std::vector<ChoiceTask>& tasks, EmbeddingProvider& provider,
                            llm::CompletionCache* cache) {
  if (tasks.empty()) throw Error(Errc::empty_group, "no tasks to embed");
  Eigen::MatrixXd out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const ChoiceTask& task = tasks[i];
    if (!task.has_text())
      throw Error(Errc::missing_text, "task " + task.task_id + " has no option texts");
    Eigen::VectorXd d = task_representation(embed_text(*task.option_a_text, provider, cache),
                                            embed_text(*task.option_b_text, provider, cache));
    if (i == 0) out.resize(static_cast<Eigen::Index>(tasks.size()), d.size());
    if (d.size() != out.cols())
      throw Error(Errc::dimension_mismatch,
                  "task " + task.task_id + " embeds to " + std::to_string(d.size()) +
                      " dims, dataset uses " + std::to_string(out.cols()));
    out.row(static_cast<Eigen::Index>(i)) = d.transpose();
  }
  return out;
}

}  // namespace choicekit::learn
