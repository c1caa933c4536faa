#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mimir {

// ---- preprocessing ---------------------------------------------------------

class Stemmer {
 public:
  struct Rule {
    std::string suffix;
    std::string replacement;  // empty: drop the suffix
    std::size_t min_stem = 1;
    bool undouble = false;
  };

  explicit Stemmer(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  // Tab-separated "suffix replacement min_stem" lines; "-" drops the suffix,
  // "-+undouble" also collapses a doubled final consonant other than l, s, z.
  static Stemmer parse(std::string_view text);
  static const Stemmer& bundled();

  // The first rule whose suffix matches and leaves a long enough stem wins.
  std::string stem(std::string_view word) const;

 private:
  std::vector<Rule> rules_;
};

// Lowercase, split on non-alphanumerics, drop stop words and tokens shorter
// than two characters or without letters, then stem.
std::vector<std::string> preprocess(std::string_view text);
std::vector<std::string> preprocess(std::string_view text, const std::unordered_set<std::string>& stopwords,
                                    const Stemmer& stemmer);

// ---- tf-idf ----------------------------------------------------------------

enum class TfIdfMode { Standard, PaperLiteral };
std::string_view to_string(TfIdfMode m);
TfIdfMode parse_tfidf_mode(std::string_view s);

using SparseVector = std::vector<std::pair<std::size_t, double>>;  // ascending column

struct Vocabulary {
  std::vector<std::string> terms;  // column -> term, lexicographic
  std::vector<std::size_t> df;     // column -> document frequency (>= 1)
  std::size_t n_docs = 0;
  std::unordered_map<std::string, std::size_t> index;

  static Vocabulary fit(const std::vector<std::vector<std::string>>& docs);
  static Vocabulary from_parts(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t n_docs);

  std::size_t size() const { return terms.size(); }
  std::optional<std::size_t> find(std::string_view term) const;
  // log2(N / (df + 1)); Standard mode clamps negatives to zero.
  double idf(std::size_t column, TfIdfMode mode = TfIdfMode::Standard) const;
};

// Standard: (1 + log2 tf) * max(0, log2(N/(df+1))), row L2-normalized.
// PaperLiteral: tf / log2(N/(df+1)), zero where the log is not positive, not
// normalized. Unknown terms are ignored.
SparseVector tfidf_row(const Vocabulary& vocab, const std::vector<std::string>& tokens,
                       TfIdfMode mode = TfIdfMode::Standard);
// Throws Error(EmptyVocabulary) when the vocabulary is empty.
std::vector<SparseVector> tfidf_vectorize(const Vocabulary& vocab, const std::vector<std::vector<std::string>>& docs,
                                          TfIdfMode mode = TfIdfMode::Standard);

// ---- data ------------------------------------------------------------------

struct LabeledDoc {
  std::string label;
  std::string text;
  friend bool operator==(const LabeledDoc&, const LabeledDoc&) = default;
};

// "Counterfeit", "Crypto", ..., "Hosting".
const std::vector<std::string>& default_classes();

// Every label is brought to exactly `cap` documents: larger classes are
// sampled without replacement, smaller ones with replacement. Output grouped
// by label in lexicographic order. Throws Error(EmptyClass) on empty input.
std::vector<LabeledDoc> bootstrap_balance(const std::vector<LabeledDoc>& docs, std::size_t cap,
                                          std::uint64_t seed = 42);

// ---- logistic regression ---------------------------------------------------

enum class Penalty { None, L2, L1, ElasticNet };
std::string_view to_string(Penalty p);
Penalty parse_penalty(std::string_view s);

struct ClassifierConfig {
  Penalty penalty = Penalty::L1;
  double C = 1.0;
  double l1_ratio = 0.5;  // ElasticNet mix
  std::vector<std::string> classes = default_classes();
  std::size_t per_class_cap = 200;
  std::size_t folds = 10;
  double beta = 1.0;
  std::uint64_t seed = 42;
  std::size_t max_iterations = 1000;
  double tolerance = 1e-4;  // on the proximal gradient-mapping norm
  double holdout_fraction = 0.2;
  bool grid_search = true;
  bool one_vs_one = false;
  TfIdfMode mode = TfIdfMode::Standard;
};

struct Dataset {
  std::vector<SparseVector> rows;
  std::vector<std::size_t> labels;
  std::size_t dim = 0;
  std::size_t n_classes = 0;
};

// Row-major weights, n_classes x (dim + 1); the last column is the bias.
struct LinearModel {
  std::size_t n_classes = 0;
  std::size_t dim = 0;
  std::vector<double> w;

  LinearModel() = default;
  LinearModel(std::size_t classes, std::size_t features) : n_classes(classes), dim(features), w(classes * (features + 1)) {}

  double& at(std::size_t k, std::size_t j) { return w[k * (dim + 1) + j]; }
  double at(std::size_t k, std::size_t j) const { return w[k * (dim + 1) + j]; }
  double& bias(std::size_t k) { return at(k, dim); }
  double bias(std::size_t k) const { return at(k, dim); }

  std::vector<double> scores(const SparseVector& x) const;
  std::vector<double> probabilities(const SparseVector& x) const;
};

struct Regularizer {
  Penalty penalty = Penalty::None;
  double lambda = 0.0;  // 1 / (C * n)
  double l1_ratio = 0.5;

  static Regularizer from(Penalty p, double C, std::size_t n, double l1_ratio = 0.5);
  double l1() const;  // effective weight on ||w||_1
  double l2() const;  // effective weight on 0.5 * ||w||^2
};

// Mean cross-entropy plus the penalty on non-bias weights.
double objective(const LinearModel& m, const Dataset& d, const Regularizer& r);
// Gradient of objective(); the L1 part contributes sign(w) (0 at w == 0).
std::vector<double> objective_gradient(const LinearModel& m, const Dataset& d, const Regularizer& r);

struct FitResult {
  LinearModel model;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> objective_history;  // one entry per accepted step, plus the start
};

// Proximal gradient descent: step 0.1, halved whenever the objective would
// rise. Cross-entropy is the smooth part; both penalty terms are proximal.
FitResult fit_softmax(const Dataset& d, const Regularizer& r, std::size_t max_iterations = 1000,
                      double tolerance = 1e-4, double initial_step = 0.1);

// ---- metrics ---------------------------------------------------------------

double f_beta(double precision, double recall, double beta = 1.0);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro over the union of observed labels
  double recall = 0.0;
  double f_beta = 0.0;     // from the macro precision and recall
};

// Throws Error(LengthMismatch) when the vectors differ in length.
Metrics compute_metrics(const std::vector<std::string>& predicted, const std::vector<std::string>& truth,
                        double beta = 1.0);

// 1 - (p1 - p2) for the two largest probabilities.
double reliability(const std::vector<double>& probabilities);

// ---- model -----------------------------------------------------------------

struct GridPoint {
  Penalty penalty = Penalty::None;
  double C = 1.0;
  double holdout_f_beta = 0.0;
  double holdout_accuracy = 0.0;
  bool converged = true;
};

struct FoldReport {
  std::size_t fold = 0;
  Metrics metrics;
  std::size_t iterations = 0;
  bool converged = true;
};

struct TrainingReport {
  std::vector<GridPoint> grid;
  Penalty chosen_penalty = Penalty::None;
  double chosen_C = 1.0;
  std::vector<FoldReport> folds;
  Metrics pooled;             // all out-of-fold predictions together
  double mean_fold_f_beta = 0.0;  // F_beta averaged over folds
  double mean_fold_accuracy = 0.0;
  std::size_t iterations = 0;      // final refit
  bool converged = true;
  double gradient_norm = 0.0;
  std::uint64_t seed = 42;
};

struct LRModel {
  ClassifierConfig config;
  std::vector<std::string> classes;
  Vocabulary vocabulary;
  // Multinomial: one model over all classes. One-vs-one: one binary model per
  // pair (i < j), in lexicographic pair order; class 0 of each is i.
  std::vector<LinearModel> models;
  TrainingReport report;

  std::vector<double> probabilities(const SparseVector& x) const;
};

struct Prediction {
  std::string label;
  std::vector<double> probabilities;  // aligned with LRModel::classes
  double reliability = 0.0;
};

// Fits on `docs` as given (balance them first). Grid search on a holdout,
// k-fold cross-validation, then a refit on everything. Throws Error(EmptyClass)
// when fewer than two classes have documents or a configured class has none.
LRModel train(const ClassifierConfig& config, const std::vector<LabeledDoc>& docs);

Prediction predict(const LRModel& model, std::string_view text);

void save_model(const LRModel& model, const std::filesystem::path& path);
LRModel load_model(const std::filesystem::path& path);
// One row per grid point, then one per fold, then the two aggregations.
std::string report_csv(const TrainingReport& report);

// {"label": ..., "text": ...} per line.
std::vector<LabeledDoc> load_labeled_jsonl(const std::filesystem::path& path);
void save_labeled_jsonl(const std::vector<LabeledDoc>& docs, const std::filesystem::path& path);

}  // namespace mimir
