#include "detectors.hpp"

#include "sedkit/community.hpp"
#include "sedkit/embeddings.hpp"
#include "sedkit/kmeans.hpp"
#include "sedkit/lda.hpp"
#include "sedkit/wmd.hpp"

namespace sedkit {

namespace {

using nlohmann::json;

ParamSpec int_param(std::int64_t def, double min, std::string help) {
  return {ParamType::kInt, def, min, false, std::move(help)};
}

ParamSpec real_param(double def, double min, bool exclusive, std::string help) {
  return {ParamType::kReal, def, min, exclusive, std::move(help)};
}

ParamSpec string_param(json def, std::string help) { return {ParamType::kString, std::move(def), {}, false, std::move(help)}; }

std::size_t get_size(const json& params, const char* key) { return params.at(key).get<std::size_t>(); }

// k = 0 stands for the corpus's ground-truth event count.
std::size_t resolve_k(std::size_t k, const Corpus& corpus, const char* key) {
  if (k > 0) return k;
  if (!corpus.labeled()) {
    throw Error(ErrorCode::kInvalidHyperparameter, std::string(key) + "=0 needs a labeled corpus to take the event count from");
  }
  return corpus.event_count();
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

class TextDetector : public Detector {
 public:
  explicit TextDetector(const json& params) : min_count_(get_size(params, "min_count")) {}

  void preprocess(const DetectorContext& context) override {
    corpus_ = context.corpus;
    seed_ = context.seed;
    docs_ = tokenize_corpus(*context.corpus, context.tokenizer);
    vocab_ = build_vocabulary(docs_, min_count_, context.stopwords);
    after_preprocess(context);
  }

 protected:
  virtual void after_preprocess(const DetectorContext&) {}

  std::size_t min_count_;
  const Corpus* corpus_ = nullptr;
  std::uint64_t seed_ = 0;
  std::vector<TokenList> docs_;
  Vocabulary vocab_;
};

class LdaDetector final : public TextDetector {
 public:
  explicit LdaDetector(const json& params) : TextDetector(params) {
    options_.topics = get_size(params, "topics");
    options_.alpha = params.at("alpha").get<double>();
    options_.beta = params.at("beta").get<double>();
    options_.iterations = get_size(params, "iterations");
  }

  void fit() override { model_.emplace(lda_fit(encoded_, vocab_.size(), options_)); }
  std::vector<std::uint32_t> detect() override { return model_->dominant_topics(); }

 private:
  void after_preprocess(const DetectorContext&) override {
    options_.topics = resolve_k(options_.topics, *corpus_, "topics");
    options_.seed = seed_;
    encoded_.clear();
    for (const auto& d : docs_) encoded_.push_back(vocab_.encode(d));
  }

  LdaOptions options_;
  std::vector<std::vector<std::uint32_t>> encoded_;
  std::optional<TopicModel> model_;
};

KMeansOptions kmeans_options(const json& params) {
  KMeansOptions o;
  o.k = get_size(params, "k");
  o.max_iters = get_size(params, "max_iters");
  o.restarts = get_size(params, "restarts");
  return o;
}

class TfidfKMeans final : public TextDetector {
 public:
  explicit TfidfKMeans(const json& params) : TextDetector(params), options_(kmeans_options(params)) {}

  void fit() override { result_ = kmeans(vectors_, options_); }
  std::vector<std::uint32_t> detect() override { return result_.labels; }

 private:
  void after_preprocess(const DetectorContext&) override {
    options_.k = resolve_k(options_.k, *corpus_, "k");
    options_.seed = seed_;
    vectors_ = to_dense(tfidf_vectorize(docs_, vocab_));
  }

  KMeansOptions options_;
  std::vector<std::vector<double>> vectors_;
  KMeansResult result_;
};

SgnsOptions sgns_options(const json& params) {
  SgnsOptions o;
  o.dimension = get_size(params, "dimension");
  o.window = get_size(params, "window");
  o.negatives = get_size(params, "negatives");
  o.epochs = get_size(params, "epochs");
  o.learning_rate = params.at("learning_rate").get<double>();
  return o;
}

class SgnsKMeans final : public TextDetector {
 public:
  explicit SgnsKMeans(const json& params)
      : TextDetector(params), sgns_(sgns_options(params)), options_(kmeans_options(params)) {}

  void fit() override {
    const auto table = train_embeddings(docs_, vocab_, sgns_);
    result_ = kmeans(document_embeddings(docs_, table), options_);
  }
  std::vector<std::uint32_t> detect() override { return result_.labels; }

 private:
  void after_preprocess(const DetectorContext&) override {
    options_.k = resolve_k(options_.k, *corpus_, "k");
    options_.seed = seed_;
    sgns_.seed = seed_;
  }

  SgnsOptions sgns_;
  KMeansOptions options_;
  KMeansResult result_;
};

class ExternalKMeans final : public Detector {
 public:
  explicit ExternalKMeans(const json& params)
      : path_(params.at("embeddings").get<std::string>()), options_(kmeans_options(params)) {}

  void preprocess(const DetectorContext& context) override {
    options_.k = resolve_k(options_.k, *context.corpus, "k");
    options_.seed = context.seed;
    vectors_ = load_external_embeddings(resolve_path(context.base_dir, path_), *context.corpus);
  }
  void fit() override { result_ = kmeans(vectors_, options_); }
  std::vector<std::uint32_t> detect() override { return result_.labels; }

 private:
  std::string path_;
  KMeansOptions options_;
  std::vector<std::vector<double>> vectors_;
  KMeansResult result_;
};

class WmdDetector final : public TextDetector {
 public:
  explicit WmdDetector(const json& params)
      : TextDetector(params),
        threshold_(params.at("threshold").get<double>()),
        path_(params.at("embeddings").get<std::string>()),
        sgns_(sgns_options(params)) {}

  void fit() override {
    if (!table_) table_.emplace(train_embeddings(docs_, vocab_, sgns_));
  }
  std::vector<std::uint32_t> detect() override { return wmd_cluster(docs_, *table_, threshold_).labels; }

 private:
  void after_preprocess(const DetectorContext& context) override {
    sgns_.seed = seed_;
    if (!path_.empty()) table_.emplace(EmbeddingTable::load(resolve_path(context.base_dir, path_)));
  }

  double threshold_;
  std::string path_;
  SgnsOptions sgns_;
  std::optional<EmbeddingTable> table_;
};

class KeywordCommunityDetector final : public TextDetector {
 public:
  explicit KeywordCommunityDetector(const json& params)
      : TextDetector(params), min_cooccur_(params.at("min_cooccur").get<std::uint32_t>()) {}

  void fit() override {
    const auto graph = build_keyword_graph(docs_, vocab_, min_cooccur_);
    labels_ = keyword_communities(graph, docs_).labels;
  }
  std::vector<std::uint32_t> detect() override { return labels_; }

 private:
  std::uint32_t min_cooccur_;
  std::vector<std::uint32_t> labels_;
};

class SeDetector final : public Detector {
 public:
  explicit SeDetector(const json& params)
      : relations_(parse_relations(params.at("relations").get<std::string>())),
        knn_(get_size(params, "knn")),
        min_count_(get_size(params, "min_count")) {}

  void preprocess(const DetectorContext& context) override {
    corpus_ = context.corpus;
    seed_ = context.seed;
    if (knn_ > 0) {
      const auto docs = tokenize_corpus(*corpus_, context.tokenizer);
      vectors_ = to_dense(tfidf_vectorize(docs, build_vocabulary(docs, min_count_, context.stopwords)));
    }
  }
  void fit() override {
    std::optional<SemanticKnn> knn;
    if (knn_ > 0) knn = SemanticKnn{vectors_, knn_};
    events_ = se_detect(*corpus_, relations_, knn, seed_).events;
  }
  std::vector<std::uint32_t> detect() override { return events_; }

 private:
  RelationSet relations_;
  std::size_t knn_;
  std::size_t min_count_;
  const Corpus* corpus_ = nullptr;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<double>> vectors_;
  std::vector<std::uint32_t> events_;
};

ParamSchema kmeans_schema() {
  return {{"k", int_param(0, 0, "cluster count; 0 uses the ground-truth event count")},
          {"max_iters", int_param(100, 1, "Lloyd iteration cap")},
          {"restarts", int_param(10, 1, "k-means++ restarts; lowest inertia wins")}};
}

ParamSchema sgns_schema() {
  return {{"dimension", int_param(50, 1, "embedding dimension")},
          {"window", int_param(5, 1, "context window radius")},
          {"negatives", int_param(5, 1, "negative samples per pair")},
          {"epochs", int_param(5, 1, "training passes")},
          {"learning_rate", real_param(0.025, 0.0, true, "initial learning rate")}};
}

ParamSchema merge(ParamSchema a, const ParamSchema& b) {
  a.insert(b.begin(), b.end());
  return a;
}

const ParamSpec kMinCount = int_param(1, 1, "minimum document frequency for vocabulary tokens");

}  // namespace

void register_builtin_detectors(DetectorRegistry& registry) {
  registry.register_detector(
      "lda", [](const json& p) { return std::make_unique<LdaDetector>(p); },
      {{"topics", int_param(0, 0, "topic count; 0 uses the ground-truth event count")},
       {"alpha", real_param(0.1, 0.0, true, "document-topic Dirichlet prior")},
       {"beta", real_param(0.01, 0.0, true, "topic-word Dirichlet prior")},
       {"iterations", int_param(200, 1, "Gibbs sweeps")},
       {"min_count", kMinCount}},
      "collapsed Gibbs LDA; event = dominant topic");
  registry.register_detector(
      "tfidf_kmeans", [](const json& p) { return std::make_unique<TfidfKMeans>(p); },
      merge(kmeans_schema(), {{"min_count", kMinCount}}), "k-means over L2-normalised TF-IDF vectors");
  registry.register_detector(
      "sgns_kmeans", [](const json& p) { return std::make_unique<SgnsKMeans>(p); },
      merge(merge(kmeans_schema(), sgns_schema()), {{"min_count", kMinCount}}),
      "k-means over mean skip-gram document embeddings");
  registry.register_detector(
      "external_kmeans", [](const json& p) { return std::make_unique<ExternalKMeans>(p); },
      merge(kmeans_schema(), {{"embeddings", string_param(nullptr, "per-message vector file (id v1 .. vd)")}}),
      "k-means over precomputed message embeddings");
  registry.register_detector(
      "wmd_cluster", [](const json& p) { return std::make_unique<WmdDetector>(p); },
      merge(sgns_schema(), {{"threshold", real_param(1.0, 0.0, true, "maximum WMD to a cluster medoid")},
                            {"embeddings", string_param("", "word vector file; empty trains skip-gram vectors")},
                            {"min_count", kMinCount}}),
      "single-pass medoid clustering under word mover's distance");
  registry.register_detector(
      "keyword_community", [](const json& p) { return std::make_unique<KeywordCommunityDetector>(p); },
      {{"min_cooccur", int_param(2, 1, "minimum co-occurrence count for a keyword edge")}, {"min_count", kMinCount}},
      "modularity communities of the keyword co-occurrence graph");
  registry.register_detector(
      "se_detect", [](const json& p) { return std::make_unique<SeDetector>(p); },
      {{"relations", string_param("hashtag,entity,mention,user", "shared attributes that link messages")},
       {"knn", int_param(0, 0, "semantic nearest neighbours per message; 0 disables")},
       {"min_count", kMinCount}},
      "two-level structural entropy minimisation on the message graph");
}

}  // namespace sedkit
