#include "featurizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "error.hpp"
#include "utf8.hpp"

namespace siatext {

std::vector<std::string> extract_trigrams(std::string_view text) {
  std::string_view trimmed = trim_whitespace(text);
  if (trimmed.empty()) {
    throw Error(ErrorCategory::invalid_argument,
                "cannot extract trigrams from empty or whitespace-only text");
  }
  std::vector<char32_t> cps = decode_utf8(trimmed);
  std::vector<char32_t> padded;
  padded.reserve(cps.size() + 2);
  padded.push_back(kBoundaryStart);
  padded.insert(padded.end(), cps.begin(), cps.end());
  padded.push_back(kBoundaryEnd);

  std::vector<std::string> out;
  out.reserve(cps.size());
  for (size_t i = 0; i + 3 <= padded.size(); ++i) {
    out.push_back(encode_utf8(padded.data() + i, 3));
  }
  return out;
}

TrigramVocabulary build_vocabulary(const std::vector<const LabeledCorpus*>& corpora,
                                   uint32_t min_count) {
  if (min_count < 1) {
    throw Error(ErrorCategory::invalid_argument, "min_count must be >= 1");
  }
  std::unordered_map<std::string, uint64_t> counts;
  size_t total_sentences = 0;
  for (const LabeledCorpus* corpus : corpora) {
    for (const LabeledSentence& sentence : corpus->sentences) {
      ++total_sentences;
      for (std::string& tri : extract_trigrams(sentence.text)) {
        ++counts[std::move(tri)];
      }
    }
  }
  if (total_sentences == 0) {
    throw Error(ErrorCategory::invalid_argument,
                "cannot build a vocabulary from empty corpora");
  }

  std::vector<std::pair<std::string, uint64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [tri, count] : counts) {
    if (count >= min_count) kept.emplace_back(tri, count);
  }
  if (kept.empty()) {
    throw Error(ErrorCategory::invalid_argument,
                "no trigram meets the min_count threshold");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  TrigramVocabulary vocab;
  vocab.trigrams.reserve(kept.size());
  for (auto& [tri, count] : kept) {
    vocab.index_of.emplace(tri, static_cast<uint32_t>(vocab.trigrams.size() + 1));
    vocab.trigrams.push_back(std::move(tri));
  }
  return vocab;
}

TrigramVocabulary build_vocabulary(const LabeledCorpus& corpus, uint32_t min_count) {
  return build_vocabulary(std::vector<const LabeledCorpus*>{&corpus}, min_count);
}

SentenceEncoding encode(std::string_view text, const TrigramVocabulary& vocab) {
  std::vector<std::string> trigrams = extract_trigrams(text);
  SentenceEncoding enc;
  enc.indices.reserve(trigrams.size());
  for (const std::string& tri : trigrams) {
    enc.indices.push_back(vocab.lookup(tri));
  }
  enc.source_length = static_cast<uint32_t>(trigrams.size());
  return enc;
}

std::string segment_hook(std::string_view text, const Segmenter& segmenter) {
  if (!segmenter) return std::string(text);
  try {
    return segmenter(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::invalid_argument,
                std::string("segmenter failed: ") + e.what());
  }
}

EncodedCorpus encode_corpus(const LabeledCorpus& corpus, const TrigramVocabulary& vocab,
                            const Segmenter& segmenter) {
  EncodedCorpus out;
  out.sentences.reserve(corpus.sentences.size());
  for (const LabeledSentence& sentence : corpus.sentences) {
    std::string text = segment_hook(sentence.text, segmenter);
    out.sentences.push_back({encode(text, vocab), sentence.label});
  }
  out.label_set = corpus.label_set;
  return out;
}

namespace {

std::string escape_trigram(const std::string& tri) {
  std::string out;
  out.reserve(tri.size());
  for (char c : tri) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_trigram(const std::string& line, size_t line_no) {
  std::string out;
  out.reserve(line.size());
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '\\') {
      out.push_back(line[i]);
      continue;
    }
    if (i + 1 >= line.size()) {
      throw Error(ErrorCategory::parse, "vocabulary line " + std::to_string(line_no) +
                                            ": dangling backslash escape");
    }
    switch (line[++i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default:
        throw Error(ErrorCategory::parse, "vocabulary line " + std::to_string(line_no) +
                                              ": unknown escape \\" + line[i]);
    }
  }
  return out;
}

}  // namespace

void save_vocabulary(const TrigramVocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot open vocabulary file for writing: " + path);
  }
  for (const std::string& tri : vocab.trigrams) {
    out << escape_trigram(tri) << '\n';
  }
  if (!out.flush()) {
    throw Error(ErrorCategory::io, "failed writing vocabulary file: " + path);
  }
}

TrigramVocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open vocabulary file: " + path);
  }
  TrigramVocabulary vocab;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string tri = unescape_trigram(line, line_no);
    if (tri.empty()) {
      throw Error(ErrorCategory::parse,
                  "vocabulary line " + std::to_string(line_no) + ": empty trigram");
    }
    auto [it, inserted] =
        vocab.index_of.emplace(tri, static_cast<uint32_t>(vocab.trigrams.size() + 1));
    if (!inserted) {
      throw Error(ErrorCategory::parse, "vocabulary line " + std::to_string(line_no) +
                                            ": duplicate trigram");
    }
    vocab.trigrams.push_back(std::move(tri));
  }
  if (vocab.trigrams.empty()) {
    throw Error(ErrorCategory::parse, "vocabulary file is empty: " + path);
  }
  return vocab;
}

}  // namespace siatext
