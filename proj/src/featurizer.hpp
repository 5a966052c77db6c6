#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "types.hpp"

namespace siatext {

// Boundary sentinels wrapped around every sentence before windowing, so even a
// one-character sentence yields a trigram.
inline constexpr char32_t kBoundaryStart = U'^';
inline constexpr char32_t kBoundaryEnd = U'$';

inline constexpr uint32_t kUnkIndex = 0;

// Bijection between trigram strings and dense indices. Index 0 is reserved for
// unknown trigrams and maps to no string; real trigrams occupy 1..size()-1.
struct TrigramVocabulary {
  std::unordered_map<std::string, uint32_t> index_of;
  std::vector<std::string> trigrams;  // trigrams[i] carries index i + 1

  size_t size() const { return trigrams.size() + 1; }

  uint32_t lookup(const std::string& trigram) const {
    auto it = index_of.find(trigram);
    return it == index_of.end() ? kUnkIndex : it->second;
  }
};

// All contiguous 3-code-point windows of the sentinel-wrapped text, in order.
// Yields exactly one trigram per code point of the trimmed input.
std::vector<std::string> extract_trigrams(std::string_view text);

// Vocabulary over every trigram occurring >= min_count times across the given
// corpora. Indices are assigned by descending count, ties broken
// lexicographically, starting at 1.
TrigramVocabulary build_vocabulary(const std::vector<const LabeledCorpus*>& corpora,
                                   uint32_t min_count = 1);
TrigramVocabulary build_vocabulary(const LabeledCorpus& corpus, uint32_t min_count = 1);

SentenceEncoding encode(std::string_view text, const TrigramVocabulary& vocab);

// Optional external morphology segmenter applied before trigram extraction.
using Segmenter = std::function<std::string(std::string_view)>;

// Identity when no segmenter is supplied; segmenter failures are rethrown with
// context.
std::string segment_hook(std::string_view text, const Segmenter& segmenter);

EncodedCorpus encode_corpus(const LabeledCorpus& corpus, const TrigramVocabulary& vocab,
                            const Segmenter& segmenter = {});

// Vocabulary file: UTF-8 text, line i holds the trigram for index i (1-based;
// index 0 is the implicit unk). Backslash escapes: \\ \t \n \r.
void save_vocabulary(const TrigramVocabulary& vocab, const std::string& path);
TrigramVocabulary load_vocabulary(const std::string& path);

}  // namespace siatext
