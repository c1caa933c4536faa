#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "mimir/classify.hpp"
#include "mimir/error.hpp"

namespace mimir {

const std::vector<std::string>& default_classes() {
  static const std::vector<std::string> classes{"Counterfeit", "Crypto", "Drugs",  "Forum",        "Hacking", "Locked",
                                                "Down",        "Market", "Porn",   "Soc.-Network", "Hosting"};
  return classes;
}

std::vector<LabeledDoc> bootstrap_balance(const std::vector<LabeledDoc>& docs, std::size_t cap, std::uint64_t seed) {
  if (docs.empty()) throw Error(ErrorCode::EmptyClass, "no documents to balance");
  if (cap == 0) throw Error(ErrorCode::InvalidConfig, "per-class cap must be positive");
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < docs.size(); ++i) by_label[docs[i].label].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<LabeledDoc> out;
  out.reserve(by_label.size() * cap);
  for (auto& [label, idx] : by_label) {
    if (idx.size() >= cap) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(cap);
      std::sort(idx.begin(), idx.end());
      for (auto i : idx) out.push_back(docs[i]);
    } else {
      for (auto i : idx) out.push_back(docs[i]);
      std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
      for (std::size_t n = idx.size(); n < cap; ++n) out.push_back(docs[idx[pick(rng)]]);
    }
  }
  return out;
}

std::vector<double> LRModel::probabilities(const SparseVector& x) const {
  const std::size_t K = classes.size();
  if (!config.one_vs_one) return models.at(0).probabilities(x);
  std::vector<double> p(K, 0.0);
  std::size_t m = 0;
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i + 1; j < K; ++j, ++m) {
      double r_ij = models.at(m).probabilities(x)[0];
      p[i] += r_ij;
      p[j] += 1.0 - r_ij;
    }
  }
  const double scale = 2.0 / (static_cast<double>(K) * static_cast<double>(K - 1));
  for (double& v : p) v *= scale;
  return p;
}

namespace {

struct Corpus {
  std::vector<std::vector<std::string>> tokens;
  std::vector<std::size_t> labels;
};

Dataset make_dataset(const Vocabulary& vocab, const Corpus& c, const std::vector<std::size_t>& subset,
                     std::size_t n_classes, TfIdfMode mode) {
  Dataset d;
  d.dim = vocab.size();
  d.n_classes = n_classes;
  for (auto i : subset) {
    d.rows.push_back(tfidf_row(vocab, c.tokens[i], mode));
    d.labels.push_back(c.labels[i]);
  }
  return d;
}

Vocabulary fit_vocabulary(const Corpus& c, const std::vector<std::size_t>& subset) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(subset.size());
  for (auto i : subset) docs.push_back(c.tokens[i]);
  Vocabulary v = Vocabulary::fit(docs);
  if (v.size() == 0) throw Error(ErrorCode::EmptyVocabulary, "training documents contain no usable terms");
  return v;
}

struct Fitted {
  std::vector<LinearModel> models;
  std::size_t iterations = 0;
  bool converged = true;
  double gradient_norm = 0.0;
};

Fitted fit(const Dataset& d, Penalty penalty, double C, const ClassifierConfig& cfg) {
  Fitted out;
  if (!cfg.one_vs_one) {
    auto r = fit_softmax(d, Regularizer::from(penalty, C, d.rows.size(), cfg.l1_ratio), cfg.max_iterations,
                         cfg.tolerance);
    out.iterations = r.iterations;
    out.converged = r.converged;
    out.gradient_norm = r.gradient_norm;
    out.models.push_back(std::move(r.model));
    return out;
  }
  for (std::size_t i = 0; i < d.n_classes; ++i) {
    for (std::size_t j = i + 1; j < d.n_classes; ++j) {
      Dataset pair;
      pair.dim = d.dim;
      pair.n_classes = 2;
      for (std::size_t n = 0; n < d.rows.size(); ++n) {
        if (d.labels[n] != i && d.labels[n] != j) continue;
        pair.rows.push_back(d.rows[n]);
        pair.labels.push_back(d.labels[n] == i ? 0 : 1);
      }
      auto r = fit_softmax(pair, Regularizer::from(penalty, C, pair.rows.size(), cfg.l1_ratio), cfg.max_iterations,
                           cfg.tolerance);
      out.iterations = std::max(out.iterations, r.iterations);
      out.converged = out.converged && r.converged;
      out.gradient_norm = std::max(out.gradient_norm, r.gradient_norm);
      out.models.push_back(std::move(r.model));
    }
  }
  return out;
}

std::vector<std::string> predict_labels(const LRModel& shell, const Dataset& d) {
  std::vector<std::string> out;
  out.reserve(d.rows.size());
  for (const auto& row : d.rows) {
    auto p = shell.probabilities(row);
    auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    out.push_back(shell.classes[best]);
  }
  return out;
}

std::vector<std::string> names_of(const std::vector<std::string>& classes, const std::vector<std::size_t>& labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (auto l : labels) out.push_back(classes[l]);
  return out;
}

int penalty_rank(Penalty p) {
  switch (p) {
    case Penalty::None: return 0;
    case Penalty::L2: return 1;
    case Penalty::L1: return 2;
    case Penalty::ElasticNet: return 3;
  }
  return 4;
}

}  // namespace

LRModel train(const ClassifierConfig& config, const std::vector<LabeledDoc>& docs) {
  LRModel model;
  model.config = config;
  if (config.folds < 2) throw Error(ErrorCode::InvalidConfig, "cross-validation needs at least 2 folds");

  if (config.classes.empty()) {
    std::set<std::string> seen;
    for (const auto& d : docs) seen.insert(d.label);
    model.classes.assign(seen.begin(), seen.end());
  } else {
    model.classes = config.classes;
  }
  if (model.classes.size() < 2) throw Error(ErrorCode::EmptyClass, "training needs at least two classes");
  std::map<std::string, std::size_t> class_index;
  for (std::size_t k = 0; k < model.classes.size(); ++k) class_index.emplace(model.classes[k], k);

  Corpus corpus;
  std::vector<std::size_t> per_class(model.classes.size(), 0);
  std::size_t ignored = 0;
  for (const auto& d : docs) {
    auto it = class_index.find(d.label);
    if (it == class_index.end()) {
      ++ignored;
      continue;
    }
    corpus.tokens.push_back(preprocess(d.text));
    corpus.labels.push_back(it->second);
    ++per_class[it->second];
  }
  if (ignored) spdlog::warn("ignored {} documents with labels outside the class list", ignored);
  for (std::size_t k = 0; k < per_class.size(); ++k) {
    if (per_class[k] == 0) throw Error(ErrorCode::EmptyClass, "no documents for class " + model.classes[k]);
  }
  const std::size_t K = model.classes.size(), n = corpus.labels.size();
  std::mt19937_64 rng(config.seed);
  TrainingReport& report = model.report;
  report.seed = config.seed;

  // Shell model used to evaluate intermediate fits.
  LRModel shell;
  shell.config = config;
  shell.classes = model.classes;

  Penalty penalty = config.penalty;
  double C = config.C;
  if (config.grid_search) {
    std::vector<std::vector<std::size_t>> by_class(K);
    for (std::size_t i = 0; i < n; ++i) by_class[corpus.labels[i]].push_back(i);
    std::vector<std::size_t> fit_idx, hold_idx;
    for (auto& idx : by_class) {
      std::shuffle(idx.begin(), idx.end(), rng);
      std::size_t h = static_cast<std::size_t>(std::llround(config.holdout_fraction * static_cast<double>(idx.size())));
      if (idx.size() >= 2) h = std::clamp<std::size_t>(h, 1, idx.size() - 1);
      else h = 0;
      hold_idx.insert(hold_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h));
      fit_idx.insert(fit_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(h), idx.end());
    }
    Vocabulary vocab = fit_vocabulary(corpus, fit_idx);
    Dataset train_set = make_dataset(vocab, corpus, fit_idx, K, config.mode);
    Dataset hold_set = make_dataset(vocab, corpus, hold_idx, K, config.mode);
    auto truth = names_of(model.classes, hold_set.labels);

    const std::vector<double> Cs{0.01, 0.1, 1.0, 10.0, 100.0};
    std::optional<GridPoint> unpenalized;
    for (Penalty p : {Penalty::None, Penalty::L2, Penalty::L1, Penalty::ElasticNet}) {
      for (double c : Cs) {
        GridPoint gp;
        if (p == Penalty::None && unpenalized) {
          gp = *unpenalized;  // C has no effect without a penalty
        } else {
          Fitted f = fit(train_set, p, c, config);
          shell.models = std::move(f.models);
          Metrics m = compute_metrics(predict_labels(shell, hold_set), truth, config.beta);
          gp.holdout_f_beta = m.f_beta;
          gp.holdout_accuracy = m.accuracy;
          gp.converged = f.converged;
          if (p == Penalty::None) unpenalized = gp;
        }
        gp.penalty = p;
        gp.C = c;
        report.grid.push_back(gp);
      }
    }
    const GridPoint* best = &report.grid.front();
    for (const auto& gp : report.grid) {
      auto key = [](const GridPoint& g) { return std::make_tuple(-g.holdout_f_beta, g.C, penalty_rank(g.penalty)); };
      if (key(gp) < key(*best)) best = &gp;
    }
    penalty = best->penalty;
    C = best->C;
  }
  report.chosen_penalty = penalty;
  report.chosen_C = C;

  // k-fold cross-validation; the vectorizer only ever sees the training folds.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t k = std::min(config.folds, n);
  std::vector<std::string> pooled_pred, pooled_truth;
  double f_sum = 0.0, acc_sum = 0.0;
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> tr, te;
    for (std::size_t pos = 0; pos < n; ++pos) (pos % k == fold ? te : tr).push_back(order[pos]);
    Vocabulary vocab = fit_vocabulary(corpus, tr);
    Fitted f = fit(make_dataset(vocab, corpus, tr, K, config.mode), penalty, C, config);
    shell.models = std::move(f.models);
    Dataset test_set = make_dataset(vocab, corpus, te, K, config.mode);
    auto pred = predict_labels(shell, test_set);
    auto truth = names_of(model.classes, test_set.labels);
    FoldReport fr{fold, compute_metrics(pred, truth, config.beta), f.iterations, f.converged};
    f_sum += fr.metrics.f_beta;
    acc_sum += fr.metrics.accuracy;
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
    pooled_truth.insert(pooled_truth.end(), truth.begin(), truth.end());
    report.folds.push_back(fr);
  }
  report.pooled = compute_metrics(pooled_pred, pooled_truth, config.beta);
  report.mean_fold_f_beta = f_sum / static_cast<double>(k);
  report.mean_fold_accuracy = acc_sum / static_cast<double>(k);

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  model.vocabulary = fit_vocabulary(corpus, all);
  Fitted final_fit = fit(make_dataset(model.vocabulary, corpus, all, K, config.mode), penalty, C, config);
  model.models = std::move(final_fit.models);
  report.iterations = final_fit.iterations;
  report.converged = final_fit.converged;
  report.gradient_norm = final_fit.gradient_norm;
  if (!final_fit.converged) {
    spdlog::warn("NonConvergence: stopped after {} iterations, gradient norm {:.3g}", final_fit.iterations,
                 final_fit.gradient_norm);
  }
  return model;
}

Prediction predict(const LRModel& model, std::string_view text) {
  SparseVector x = tfidf_row(model.vocabulary, preprocess(text), model.config.mode);
  Prediction p;
  p.probabilities = model.probabilities(x);
  auto best = static_cast<std::size_t>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                                       p.probabilities.begin());
  p.label = model.classes[best];
  p.reliability = reliability(p.probabilities);
  return p;
}

// ---- persistence -----------------------------------------------------------

void save_model(const LRModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  const auto& c = model.config;
  out << "# mimir-lr-model 1\n[config]\n";
  out << "penalty=" << to_string(c.penalty) << "\nC=" << fmt::format("{:.17g}", c.C)
      << "\nl1_ratio=" << fmt::format("{:.17g}", c.l1_ratio) << "\nper_class_cap=" << c.per_class_cap
      << "\nfolds=" << c.folds << "\nbeta=" << fmt::format("{:.17g}", c.beta) << "\nseed=" << c.seed
      << "\nmax_iterations=" << c.max_iterations << "\ntolerance=" << fmt::format("{:.17g}", c.tolerance)
      << "\nholdout_fraction=" << fmt::format("{:.17g}", c.holdout_fraction)
      << "\ngrid_search=" << c.grid_search << "\none_vs_one=" << c.one_vs_one << "\nmode=" << to_string(c.mode)
      << "\nchosen_penalty=" << to_string(model.report.chosen_penalty)
      << "\nchosen_C=" << fmt::format("{:.17g}", model.report.chosen_C) << "\n";
  out << "[classes]\n";
  for (const auto& cl : model.classes) out << cl << "\n";
  out << "[vocabulary]\nn_docs=" << model.vocabulary.n_docs << "\n";
  for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
    out << model.vocabulary.terms[i] << '\t' << i << '\t' << model.vocabulary.df[i] << "\n";
  }
  for (std::size_t m = 0; m < model.models.size(); ++m) {
    const auto& lm = model.models[m];
    out << "[weights " << m << ' ' << lm.n_classes << ' ' << lm.dim << "]\n";
    for (std::size_t k = 0; k < lm.n_classes; ++k) {
      for (std::size_t j = 0; j <= lm.dim; ++j) out << (j ? " " : "") << fmt::format("{:.17g}", lm.at(k, j));
      out << "\n";
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

LRModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  LRModel model;
  std::string line, section;
  std::size_t line_no = 0;
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  std::size_t n_docs = 0;
  LinearModel* current = nullptr;
  std::size_t row = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::SchemaError, fmt::format("{} line {}: {}", path.string(), line_no, why));
  };
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        section = line.substr(1, line.find(']') - 1);
        if (section.starts_with("weights")) {
          std::stringstream ss(section.substr(7));
          std::size_t idx = 0, K = 0, D = 0;
          if (!(ss >> idx >> K >> D)) fail("bad weights header");
          model.models.emplace_back(K, D);
          current = &model.models.back();
          row = 0;
          section = "weights";
        }
        continue;
      }
      if (section == "config") {
        auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key=value");
        std::string key = line.substr(0, eq), v = line.substr(eq + 1);
        auto& c = model.config;
        if (key == "penalty") c.penalty = parse_penalty(v);
        else if (key == "C") c.C = std::stod(v);
        else if (key == "l1_ratio") c.l1_ratio = std::stod(v);
        else if (key == "per_class_cap") c.per_class_cap = std::stoul(v);
        else if (key == "folds") c.folds = std::stoul(v);
        else if (key == "beta") c.beta = std::stod(v);
        else if (key == "seed") c.seed = std::stoull(v);
        else if (key == "max_iterations") c.max_iterations = std::stoul(v);
        else if (key == "tolerance") c.tolerance = std::stod(v);
        else if (key == "holdout_fraction") c.holdout_fraction = std::stod(v);
        else if (key == "grid_search") c.grid_search = v == "1";
        else if (key == "one_vs_one") c.one_vs_one = v == "1";
        else if (key == "mode") c.mode = parse_tfidf_mode(v);
        else if (key == "chosen_penalty") model.report.chosen_penalty = parse_penalty(v);
        else if (key == "chosen_C") model.report.chosen_C = std::stod(v);
      } else if (section == "classes") {
        model.classes.push_back(line);
      } else if (section == "vocabulary") {
        if (line.starts_with("n_docs=")) {
          n_docs = std::stoul(line.substr(7));
          continue;
        }
        auto t1 = line.find('\t'), t2 = line.rfind('\t');
        if (t1 == std::string::npos || t1 == t2) fail("expected term, index, df");
        if (std::stoul(line.substr(t1 + 1, t2 - t1 - 1)) != terms.size()) fail("vocabulary index out of order");
        terms.push_back(line.substr(0, t1));
        df.push_back(std::stoul(line.substr(t2 + 1)));
      } else if (section == "weights" && current) {
        if (row >= current->n_classes) fail("too many weight rows");
        std::stringstream ss(line);
        for (std::size_t j = 0; j <= current->dim; ++j) {
          if (!(ss >> current->at(row, j))) fail("short weight row");
        }
        ++row;
      } else {
        fail("content outside a known section");
      }
    }
  } catch (const std::invalid_argument&) {
    fail("not a number");
  } catch (const std::out_of_range&) {
    fail("number out of range");
  }
  model.config.classes = model.classes;
  model.vocabulary = Vocabulary::from_parts(std::move(terms), std::move(df), n_docs);
  if (model.classes.size() < 2 || model.models.empty()) fail("model has no classes or weights");
  return model;
}

std::string report_csv(const TrainingReport& r) {
  std::string out = "kind,penalty,C,fold,accuracy,precision,recall,f_beta,converged\n";
  for (const auto& g : r.grid) {
    out += fmt::format("grid,{},{},,{:.6f},,,{:.6f},{}\n", to_string(g.penalty), g.C, g.holdout_accuracy,
                       g.holdout_f_beta, g.converged ? 1 : 0);
  }
  for (const auto& f : r.folds) {
    out += fmt::format("fold,{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", to_string(r.chosen_penalty), r.chosen_C,
                       f.fold, f.metrics.accuracy, f.metrics.precision, f.metrics.recall, f.metrics.f_beta,
                       f.converged ? 1 : 0);
  }
  out += fmt::format("pooled,{},{},,{:.6f},{:.6f},{:.6f},{:.6f},{}\n", to_string(r.chosen_penalty), r.chosen_C,
                     r.pooled.accuracy, r.pooled.precision, r.pooled.recall, r.pooled.f_beta, r.converged ? 1 : 0);
  out += fmt::format("fold-mean,{},{},,{:.6f},,,{:.6f},{}\n", to_string(r.chosen_penalty), r.chosen_C,
                     r.mean_fold_accuracy, r.mean_fold_f_beta, r.converged ? 1 : 0);
  return out;
}

std::vector<LabeledDoc> load_labeled_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<LabeledDoc> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      docs.push_back({j.at("label").get<std::string>(), j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaError, fmt::format("{} line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return docs;
}

void save_labeled_jsonl(const std::vector<LabeledDoc>& docs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& d : docs) out << nlohmann::json{{"label", d.label}, {"text", d.text}}.dump() << "\n";
}

}  // namespace mimir
