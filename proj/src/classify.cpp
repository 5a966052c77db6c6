#include "classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "error.hpp"
#include "rng.hpp"

namespace siatext {

namespace {

// Cosine with double accumulation over float projections; zero-norm guard as
// in the loss.
double cosine_score(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  const double eps = 1e-8;
  double c = dot / (std::max(std::sqrt(na), eps) * std::max(std::sqrt(nb), eps));
  return std::clamp(c, -1.0, 1.0);
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ReferenceSet build_reference_set(const Params<float>& params, const EncodedCorpus& corpus,
                                 uint32_t per_class, uint64_t seed) {
  if (per_class == 0) {
    throw Error(ErrorCategory::invalid_argument, "per_class must be >= 1");
  }
  if (corpus.sentences.empty()) {
    throw Error(ErrorCategory::invalid_argument, "reference corpus is empty");
  }
  std::map<std::string, std::vector<uint32_t>> by_label;
  for (uint32_t i = 0; i < corpus.sentences.size(); ++i) {
    by_label[corpus.sentences[i].label].push_back(i);
  }
  for (const std::string& label : corpus.label_set) {
    if (by_label.find(label) == by_label.end()) {
      throw Error(ErrorCategory::invalid_argument,
                  "class '" + label + "' has no sentences in the reference corpus");
    }
  }

  Rng rng(seed);
  ReferenceSet refs;
  refs.per_class = per_class;
  for (const auto& [label, indices] : by_label) {
    const size_t take = std::min<size_t>(per_class, indices.size());
    std::vector<Reference> row;
    row.reserve(take);
    for (size_t pick : rng.sample_indices(indices.size(), take)) {
      const uint32_t id = indices[pick];
      row.push_back({project(params, corpus.sentences[id].encoding), id});
    }
    refs.labels.push_back(label);
    refs.references.push_back(std::move(row));
  }
  return refs;
}

Classification vote_on_projection(const ReferenceSet& refs, const std::vector<float>& s,
                                  double tau, VoteMode mode) {
  if (refs.labels.empty()) {
    throw Error(ErrorCategory::invalid_argument, "reference set is empty");
  }
  Classification out;
  for (size_t c = 0; c < refs.labels.size(); ++c) {
    ClassVote vote;
    vote.label = refs.labels[c];
    vote.reference_count = refs.references[c].size();
    double sum = 0.0;
    for (const Reference& ref : refs.references[c]) {
      const double sim = cosine_score(s, ref.vector);
      sum += sim;
      if (sim > tau) ++vote.matches;
    }
    vote.mean_similarity = vote.reference_count == 0 ? 0.0 : sum / double(vote.reference_count);
    out.votes.push_back(std::move(vote));
  }

  // Highest match count; ties fall to the higher mean similarity; remaining
  // ties to the lexicographically smallest label (labels are sorted, so strict
  // comparisons keep the earliest).
  size_t best = 0;
  for (size_t c = 1; c < out.votes.size(); ++c) {
    const ClassVote& a = out.votes[c];
    const ClassVote& b = out.votes[best];
    bool wins;
    if (mode == VoteMode::match_count) {
      wins = a.matches > b.matches ||
             (a.matches == b.matches && a.mean_similarity > b.mean_similarity);
    } else {
      wins = a.mean_similarity > b.mean_similarity;
    }
    if (wins) best = c;
  }
  out.label = out.votes[best].label;
  return out;
}

Classification classify(const Params<float>& params, const ReferenceSet& refs,
                        const SentenceEncoding& enc, double tau, VoteMode mode) {
  return vote_on_projection(refs, project(params, enc), tau, mode);
}

Metrics compute_metrics(const std::vector<std::string>& truths,
                        const std::vector<std::string>& predictions,
                        const std::vector<std::string>& labels) {
  if (truths.size() != predictions.size() || truths.empty()) {
    throw Error(ErrorCategory::invalid_argument,
                "metrics need equal-length, non-empty truth and prediction lists");
  }
  Metrics m;
  m.labels = labels;
  std::sort(m.labels.begin(), m.labels.end());
  m.labels.erase(std::unique(m.labels.begin(), m.labels.end()), m.labels.end());
  if (m.labels.empty()) {
    throw Error(ErrorCategory::invalid_argument, "metrics need a non-empty label set");
  }

  std::map<std::string, size_t> index;
  for (size_t i = 0; i < m.labels.size(); ++i) index[m.labels[i]] = i;

  const size_t k = m.labels.size();
  m.confusion.assign(k, std::vector<uint64_t>(k, 0));
  m.total = truths.size();
  for (size_t i = 0; i < truths.size(); ++i) {
    auto t = index.find(truths[i]);
    auto p = index.find(predictions[i]);
    if (t == index.end()) {
      throw Error(ErrorCategory::invalid_argument,
                  "truth label '" + truths[i] + "' is outside the label set");
    }
    if (p == index.end()) {
      throw Error(ErrorCategory::invalid_argument,
                  "predicted label '" + predictions[i] + "' is outside the label set");
    }
    ++m.confusion[t->second][p->second];
  }

  uint64_t trace = 0;
  m.precision.assign(k, 0.0);
  m.recall.assign(k, 0.0);
  m.f1.assign(k, 0.0);
  m.zero_division.assign(k, false);
  for (size_t c = 0; c < k; ++c) {
    trace += m.confusion[c][c];
    uint64_t row = 0, col = 0;
    for (size_t j = 0; j < k; ++j) {
      row += m.confusion[c][j];
      col += m.confusion[j][c];
    }
    const double tp = static_cast<double>(m.confusion[c][c]);
    if (col > 0) {
      m.precision[c] = tp / static_cast<double>(col);
    } else {
      m.zero_division[c] = true;
    }
    if (row > 0) {
      m.recall[c] = tp / static_cast<double>(row);
    } else {
      m.zero_division[c] = true;
    }
    if (m.precision[c] + m.recall[c] > 0.0) {
      m.f1[c] = 2.0 * m.precision[c] * m.recall[c] / (m.precision[c] + m.recall[c]);
    } else {
      m.zero_division[c] = true;
    }
    m.macro_precision += m.precision[c];
    m.macro_recall += m.recall[c];
    m.macro_f1 += m.f1[c];
  }
  m.accuracy = static_cast<double>(trace) / static_cast<double>(m.total);
  m.macro_precision /= static_cast<double>(k);
  m.macro_recall /= static_cast<double>(k);
  m.macro_f1 /= static_cast<double>(k);
  return m;
}

Metrics evaluate(const Params<float>& params, const ReferenceSet& refs,
                 const EncodedCorpus& test_corpus, double tau, VoteMode mode) {
  if (test_corpus.sentences.empty()) {
    throw Error(ErrorCategory::invalid_argument, "test corpus is empty");
  }
  std::set<std::string> known(refs.labels.begin(), refs.labels.end());
  for (const std::string& label : test_corpus.label_set) {
    if (known.find(label) == known.end()) {
      throw Error(ErrorCategory::invalid_argument,
                  "test label '" + label + "' has no reference class");
    }
  }
  std::vector<std::string> truths, predictions;
  truths.reserve(test_corpus.sentences.size());
  predictions.reserve(test_corpus.sentences.size());
  for (const EncodedSentence& sentence : test_corpus.sentences) {
    truths.push_back(sentence.label);
    predictions.push_back(classify(params, refs, sentence.encoding, tau, mode).label);
  }
  return compute_metrics(truths, predictions, refs.labels);
}

std::string render_metrics_table(const Metrics& m) {
  std::string out;
  out += "accuracy        " + format_double(m.accuracy) + "\n";
  out += "macro_precision " + format_double(m.macro_precision) + "\n";
  out += "macro_recall    " + format_double(m.macro_recall) + "\n";
  out += "macro_f1        " + format_double(m.macro_f1) + "\n";
  out += "\nclass  precision  recall  f1  support\n";
  for (size_t c = 0; c < m.labels.size(); ++c) {
    uint64_t row = 0;
    for (uint64_t v : m.confusion[c]) row += v;
    out += m.labels[c] + "  " + format_double(m.precision[c]) + "  " +
           format_double(m.recall[c]) + "  " + format_double(m.f1[c]) + "  " +
           std::to_string(row);
    if (m.zero_division[c]) out += "  (zero-division reported as 0)";
    out += "\n";
  }
  out += "\nconfusion (rows = true, columns = predicted)\n";
  for (const std::string& label : m.labels) out += "\t" + label;
  out += "\n";
  for (size_t c = 0; c < m.labels.size(); ++c) {
    out += m.labels[c];
    for (uint64_t v : m.confusion[c]) out += "\t" + std::to_string(v);
    out += "\n";
  }
  return out;
}

std::string render_metrics_file(const Metrics& m) {
  std::string out;
  out += "accuracy\t" + format_double(m.accuracy) + "\n";
  out += "macro_precision\t" + format_double(m.macro_precision) + "\n";
  out += "macro_recall\t" + format_double(m.macro_recall) + "\n";
  out += "macro_f1\t" + format_double(m.macro_f1) + "\n";
  for (size_t c = 0; c < m.labels.size(); ++c) {
    out += "precision." + m.labels[c] + "\t" + format_double(m.precision[c]) + "\n";
    out += "recall." + m.labels[c] + "\t" + format_double(m.recall[c]) + "\n";
    out += "f1." + m.labels[c] + "\t" + format_double(m.f1[c]) + "\n";
    if (m.zero_division[c]) {
      out += "zero_division." + m.labels[c] + "\t1\n";
    }
  }
  out += "confusion";
  for (const std::string& label : m.labels) out += "\t" + label;
  out += "\n";
  for (size_t c = 0; c < m.labels.size(); ++c) {
    out += m.labels[c];
    for (uint64_t v : m.confusion[c]) out += "\t" + std::to_string(v);
    out += "\n";
  }
  return out;
}

void write_metrics_file(const Metrics& metrics, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot open metrics file for writing: " + path);
  }
  out << render_metrics_file(metrics);
  if (!out.flush()) {
    throw Error(ErrorCategory::io, "failed writing metrics file: " + path);
  }
}

std::string render_classification(const Classification& result) {
  std::string out = "predicted\t" + result.label + "\n";
  out += "class\tmatches\tmean_similarity\treferences\n";
  for (const ClassVote& vote : result.votes) {
    out += vote.label + "\t" + std::to_string(vote.matches) + "\t" +
           format_double(vote.mean_similarity) + "\t" + std::to_string(vote.reference_count) +
           "\n";
  }
  return out;
}

}  // namespace siatext
