#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "error.hpp"
#include "rng.hpp"
#include "utf8.hpp"

namespace siatext {

namespace {

std::vector<std::string> collect_label_set(const std::vector<LabeledSentence>& sentences) {
  std::set<std::string> labels;
  for (const LabeledSentence& s : sentences) labels.insert(s.label);
  return {labels.begin(), labels.end()};
}

// label -> sentence indices, iterated in sorted label order
std::map<std::string, std::vector<size_t>> index_by_label(
    const std::vector<LabeledSentence>& sentences) {
  std::map<std::string, std::vector<size_t>> by_label;
  for (size_t i = 0; i < sentences.size(); ++i) {
    by_label[sentences[i].label].push_back(i);
  }
  return by_label;
}

}  // namespace

LabeledCorpus make_corpus(std::vector<LabeledSentence> sentences) {
  LabeledCorpus corpus;
  corpus.sentences = std::move(sentences);
  corpus.label_set = collect_label_set(corpus.sentences);
  return corpus;
}

LabeledCorpus load_labeled_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open corpus file: " + path);
  }
  std::vector<LabeledSentence> sentences;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_whitespace(line).empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw Error(ErrorCategory::parse,
                  path + ": line " + std::to_string(line_no) +
                      ": expected exactly one tab between text and label");
    }
    std::string text(trim_whitespace(std::string_view(line).substr(0, tab)));
    std::string label(trim_whitespace(std::string_view(line).substr(tab + 1)));
    if (text.empty()) {
      throw Error(ErrorCategory::parse,
                  path + ": line " + std::to_string(line_no) + ": empty text field");
    }
    if (label.empty()) {
      throw Error(ErrorCategory::parse,
                  path + ": line " + std::to_string(line_no) + ": empty label field");
    }
    sentences.push_back({std::move(text), std::move(label)});
  }
  if (sentences.empty()) {
    throw Error(ErrorCategory::parse, "corpus file has no records: " + path);
  }
  return make_corpus(std::move(sentences));
}

void save_labeled_corpus(const LabeledCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot open corpus file for writing: " + path);
  }
  for (const LabeledSentence& s : corpus.sentences) {
    out << s.text << '\t' << s.label << '\n';
  }
  if (!out.flush()) {
    throw Error(ErrorCategory::io, "failed writing corpus file: " + path);
  }
}

std::pair<LabeledCorpus, LabeledCorpus> split_corpus(const LabeledCorpus& corpus,
                                                     double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCategory::invalid_argument,
                "test_fraction must lie strictly between 0 and 1");
  }
  auto by_label = index_by_label(corpus.sentences);
  for (const auto& [label, indices] : by_label) {
    if (indices.size() < 2) {
      throw Error(ErrorCategory::invalid_argument,
                  "label '" + label + "' has fewer than 2 sentences and cannot be split");
    }
  }

  Rng rng(seed);
  std::vector<bool> in_test(corpus.sentences.size(), false);
  for (auto& [label, indices] : by_label) {
    std::vector<size_t> shuffled = indices;
    rng.shuffle(shuffled);
    size_t want = static_cast<size_t>(std::llround(
        static_cast<double>(indices.size()) * test_fraction));
    want = std::clamp<size_t>(want, 1, indices.size() - 1);
    for (size_t i = 0; i < want; ++i) in_test[shuffled[i]] = true;
  }

  std::vector<LabeledSentence> train, test;
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    (in_test[i] ? test : train).push_back(corpus.sentences[i]);
  }
  return {make_corpus(std::move(train)), make_corpus(std::move(test))};
}

PairDataset build_pairs(const EncodedCorpus& left, const EncodedCorpus& right,
                        const PairOptions& options) {
  if (left.sentences.empty() || right.sentences.empty()) {
    throw Error(ErrorCategory::invalid_argument, "pair building needs non-empty corpora");
  }
  if (options.negatives_per_positive < 1) {
    throw Error(ErrorCategory::invalid_argument, "negatives_per_positive must be >= 1");
  }
  if (options.positives_per_left < 1) {
    throw Error(ErrorCategory::invalid_argument, "positives_per_left must be >= 1");
  }
  if (right.label_set.size() < 2) {
    throw Error(ErrorCategory::invalid_argument,
                "right corpus has a single label; no negative pairs exist");
  }

  const bool same_corpus = &left == &right;

  std::unordered_map<std::string, std::vector<size_t>> right_by_label;
  for (size_t i = 0; i < right.sentences.size(); ++i) {
    right_by_label[right.sentences[i].label].push_back(i);
  }
  // different-label candidates per left label, built once
  std::unordered_map<std::string, std::vector<size_t>> right_other_label;
  for (const std::string& label : left.label_set) {
    auto it = right_by_label.find(label);
    if (it == right_by_label.end()) {
      throw Error(ErrorCategory::invalid_argument,
                  "left label '" + label + "' is absent from the right corpus");
    }
    std::vector<size_t>& others = right_other_label[label];
    for (size_t i = 0; i < right.sentences.size(); ++i) {
      if (right.sentences[i].label != label) others.push_back(i);
    }
  }

  Rng rng(options.seed);
  PairDataset dataset;
  for (size_t li = 0; li < left.sentences.size(); ++li) {
    const EncodedSentence& ls = left.sentences[li];

    std::vector<size_t> same = right_by_label.at(ls.label);
    if (same_corpus) {
      same.erase(std::remove(same.begin(), same.end(), li), same.end());
    }
    if (same.empty()) {
      throw Error(ErrorCategory::invalid_argument,
                  "label '" + ls.label + "' has no eligible positive partner in the right corpus");
    }
    size_t n_pos = std::min<size_t>(options.positives_per_left, same.size());
    for (size_t pick : rng.sample_indices(same.size(), n_pos)) {
      size_t ri = same[pick];
      dataset.pairs.push_back({ls.encoding, right.sentences[ri].encoding, +1,
                               static_cast<uint32_t>(li), static_cast<uint32_t>(ri)});
      ++dataset.positive_count;
    }

    const std::vector<size_t>& other = right_other_label.at(ls.label);
    size_t n_neg =
        std::min<size_t>(static_cast<size_t>(options.negatives_per_positive) * n_pos,
                         other.size());
    for (size_t pick : rng.sample_indices(other.size(), n_neg)) {
      size_t ri = other[pick];
      dataset.pairs.push_back({ls.encoding, right.sentences[ri].encoding, -1,
                               static_cast<uint32_t>(li), static_cast<uint32_t>(ri)});
      ++dataset.negative_count;
    }
  }
  return dataset;
}

LabeledCorpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec, uint64_t seed) {
  if (spec.classes.size() < 2) {
    throw Error(ErrorCategory::invalid_argument, "synthetic spec needs at least 2 classes");
  }
  Rng rng(seed);
  std::vector<LabeledSentence> sentences;
  for (const ClassSpec& cls : spec.classes) {
    std::vector<char32_t> alphabet = decode_utf8(cls.alphabet);
    if (alphabet.empty()) {
      throw Error(ErrorCategory::invalid_argument,
                  "class '" + cls.label + "' has an empty alphabet");
    }
    for (char32_t cp : alphabet) {
      if (cp == U'\t' || cp == U'\n' || cp == U'\r') {
        throw Error(ErrorCategory::invalid_argument,
                    "class '" + cls.label + "' alphabet contains tab or newline");
      }
    }
    if (cls.count < 1) {
      throw Error(ErrorCategory::invalid_argument,
                  "class '" + cls.label + "' has a zero sentence count");
    }
    if (cls.min_length < 1 || cls.max_length < cls.min_length) {
      throw Error(ErrorCategory::invalid_argument,
                  "class '" + cls.label + "' has an invalid length range");
    }
    for (uint32_t i = 0; i < cls.count; ++i) {
      size_t len = static_cast<size_t>(rng.between(cls.min_length, cls.max_length));
      std::string text;
      for (size_t k = 0; k < len; ++k) {
        append_utf8(text, alphabet[static_cast<size_t>(rng.below(alphabet.size()))]);
      }
      sentences.push_back({std::move(text), cls.label});
    }
  }
  return make_corpus(std::move(sentences));
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

uint32_t parse_u32(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    unsigned long v = std::stoul(s, &pos);
    if (pos != s.size() || v > UINT32_MAX) throw std::invalid_argument(s);
    return static_cast<uint32_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCategory::parse, context + ": expected an unsigned integer, got '" + s + "'");
  }
}

}  // namespace

std::vector<NamedSyntheticSpec> load_synthetic_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open synthetic spec file: " + path);
  }
  std::vector<NamedSyntheticSpec> specs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view stripped = trim_whitespace(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    std::string where = path + ": line " + std::to_string(line_no);
    std::vector<std::string> fields = split_tabs(line);
    if (fields[0] == "corpus") {
      if (fields.size() != 2 || fields[1].empty()) {
        throw Error(ErrorCategory::parse, where + ": expected `corpus<TAB>NAME`");
      }
      for (const NamedSyntheticSpec& s : specs) {
        if (s.name == fields[1]) {
          throw Error(ErrorCategory::parse, where + ": duplicate corpus name '" + fields[1] + "'");
        }
      }
      specs.push_back({fields[1], {}});
    } else if (fields[0] == "class") {
      if (specs.empty()) {
        throw Error(ErrorCategory::parse, where + ": `class` line before any `corpus` line");
      }
      if (fields.size() != 6) {
        throw Error(ErrorCategory::parse,
                    where + ": expected `class<TAB>LABEL<TAB>ALPHABET<TAB>COUNT<TAB>MIN<TAB>MAX`");
      }
      ClassSpec cls;
      cls.label = fields[1];
      cls.alphabet = fields[2];
      cls.count = parse_u32(fields[3], where);
      cls.min_length = parse_u32(fields[4], where);
      cls.max_length = parse_u32(fields[5], where);
      if (cls.label.empty()) {
        throw Error(ErrorCategory::parse, where + ": empty class label");
      }
      specs.back().spec.classes.push_back(std::move(cls));
    } else {
      throw Error(ErrorCategory::parse, where + ": unknown directive '" + fields[0] + "'");
    }
  }
  if (specs.empty()) {
    throw Error(ErrorCategory::parse, "synthetic spec file defines no corpora: " + path);
  }
  for (const NamedSyntheticSpec& s : specs) {
    if (s.spec.classes.size() < 2) {
      throw Error(ErrorCategory::parse,
                  "corpus '" + s.name + "' defines fewer than 2 classes: " + path);
    }
  }
  return specs;
}

}  // namespace siatext
