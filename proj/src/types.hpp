#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace siatext {

struct LabeledSentence {
  std::string text;   // UTF-8, trimmed
  std::string label;  // class identifier, non-empty
};

struct LabeledCorpus {
  std::vector<LabeledSentence> sentences;
  std::vector<std::string> label_set;  // distinct labels, sorted
};

// A sentence as a sequence of trigram vocabulary indices. Boundary padding
// guarantees a non-empty sequence for any non-empty text.
struct SentenceEncoding {
  std::vector<uint32_t> indices;
  uint32_t source_length = 0;  // code points in the trimmed text
};

struct EncodedSentence {
  SentenceEncoding encoding;
  std::string label;
};

struct EncodedCorpus {
  std::vector<EncodedSentence> sentences;
  std::vector<std::string> label_set;
};

// One training pair: y = +1 for same-class sentences, -1 for different-class.
struct PairSample {
  SentenceEncoding left;
  SentenceEncoding right;
  int8_t y = 1;
  // Provenance into the source corpora, kept so label consistency stays checkable.
  uint32_t left_index = 0;
  uint32_t right_index = 0;
};

struct PairDataset {
  std::vector<PairSample> pairs;
  size_t positive_count = 0;
  size_t negative_count = 0;
};

}  // namespace siatext
