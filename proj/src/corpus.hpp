#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "types.hpp"

namespace siatext {

// Corpus file format: UTF-8, one record per line, `text<TAB>label`, LF line
// endings, blank lines ignored, text trimmed.
LabeledCorpus load_labeled_corpus(const std::string& path);
void save_labeled_corpus(const LabeledCorpus& corpus, const std::string& path);

LabeledCorpus make_corpus(std::vector<LabeledSentence> sentences);

// Deterministic stratified split; returns (train, test). Every label must have
// at least 2 instances so both halves see it.
std::pair<LabeledCorpus, LabeledCorpus> split_corpus(const LabeledCorpus& corpus,
                                                     double test_fraction, uint64_t seed);

struct PairOptions {
  // Same-class partners sampled per left sentence.
  uint32_t positives_per_left = 1;
  // Different-class partners sampled per left sentence.
  uint32_t negatives_per_positive = 1;
  uint64_t seed = 0;
};

// Aligns every left sentence with sampled same-class right sentences (y=+1)
// and sampled different-class right sentences (y=-1). Sampling is uniform
// without replacement within each draw. When left and right are the same
// corpus object, a sentence is never paired with itself.
PairDataset build_pairs(const EncodedCorpus& left, const EncodedCorpus& right,
                        const PairOptions& options);

struct ClassSpec {
  std::string label;
  std::string alphabet;  // UTF-8; characters drawn per code point
  uint32_t count = 0;
  uint32_t min_length = 1;
  uint32_t max_length = 1;
};

struct SyntheticCorpusSpec {
  std::vector<ClassSpec> classes;
};

// Each sentence draws its characters uniformly from its class alphabet, so
// class-conditional trigram statistics are separable by construction.
LabeledCorpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec, uint64_t seed);

// Synthetic spec file: `corpus<TAB>NAME` opens a corpus section, each
// `class<TAB>LABEL<TAB>ALPHABET<TAB>COUNT<TAB>MIN_LEN<TAB>MAX_LEN` adds a
// class to it. `#` comments and blank lines are ignored.
struct NamedSyntheticSpec {
  std::string name;
  SyntheticCorpusSpec spec;
};

std::vector<NamedSyntheticSpec> load_synthetic_spec(const std::string& path);

}  // namespace siatext
