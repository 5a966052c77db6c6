#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "net.hpp"
#include "types.hpp"

namespace siatext {

struct Reference {
  std::vector<float> vector;  // projected sentence, dim d
  uint32_t source_index = 0;  // sentence id in the reference corpus
};

// Per-class samples of projected reference sentences, scanned exhaustively at
// test time.
struct ReferenceSet {
  std::vector<std::string> labels;  // sorted class labels
  std::vector<std::vector<Reference>> references;  // parallel to labels
  uint32_t per_class = 100;
};

// Samples per_class sentences per class uniformly without replacement (all of
// them when fewer exist) and projects each through the shared encoder.
ReferenceSet build_reference_set(const Params<float>& params, const EncodedCorpus& corpus,
                                 uint32_t per_class, uint64_t seed);

enum class VoteMode {
  match_count,      // count references with cosine > tau; mean as tie-break
  mean_similarity,  // argmax of mean cosine (ablation mode)
};

struct ClassVote {
  std::string label;
  uint32_t matches = 0;
  double mean_similarity = 0.0;
  size_t reference_count = 0;
};

struct Classification {
  std::string label;
  std::vector<ClassVote> votes;  // one per class, in label order
};

// The vote over an already-projected input; classify = project + vote.
Classification vote_on_projection(const ReferenceSet& refs, const std::vector<float>& s,
                                  double tau, VoteMode mode = VoteMode::match_count);

Classification classify(const Params<float>& params, const ReferenceSet& refs,
                        const SentenceEncoding& enc, double tau = 0.0,
                        VoteMode mode = VoteMode::match_count);

struct Metrics {
  std::vector<std::string> labels;  // sorted
  std::vector<std::vector<uint64_t>> confusion;  // [true][predicted]
  uint64_t total = 0;
  double accuracy = 0.0;
  std::vector<double> precision;  // per class
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<bool> zero_division;  // true where a 0/0 was reported as 0
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// Confusion matrix and scores from parallel truth/prediction lists. Every
// truth and prediction must belong to `labels`.
Metrics compute_metrics(const std::vector<std::string>& truths,
                        const std::vector<std::string>& predictions,
                        const std::vector<std::string>& labels);

Metrics evaluate(const Params<float>& params, const ReferenceSet& refs,
                 const EncodedCorpus& test_corpus, double tau = 0.0,
                 VoteMode mode = VoteMode::match_count);

std::string render_metrics_table(const Metrics& metrics);

// Machine-readable form: `name<TAB>value` lines, then the confusion matrix as
// a labeled grid.
std::string render_metrics_file(const Metrics& metrics);
void write_metrics_file(const Metrics& metrics, const std::string& path);

std::string render_classification(const Classification& result);

}  // namespace siatext
