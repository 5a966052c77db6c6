#include "siatext/siatext.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "checkpoint.hpp"
#include "classify.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "featurizer.hpp"
#include "net.hpp"
#include "rng.hpp"
#include "train.hpp"
#include "utf8.hpp"

struct siatext_corpus {
  siatext::LabeledCorpus corpus;
};

struct siatext_vocab {
  siatext::TrigramVocabulary vocab;
};

struct siatext_model {
  siatext::Params<float> params;
  siatext::TrigramVocabulary vocab;
  siatext::NetConfig net;
  float margin = 0.5f;
};

struct siatext_refset {
  siatext::ReferenceSet refs;
};

struct siatext_metrics {
  siatext::Metrics metrics;
};

namespace {

thread_local std::string g_last_error;

siatext_status status_of(const siatext::Error& e) {
  switch (e.category()) {
    case siatext::ErrorCategory::invalid_argument: return SIATEXT_ERR_INVALID_ARGUMENT;
    case siatext::ErrorCategory::io: return SIATEXT_ERR_IO;
    case siatext::ErrorCategory::parse: return SIATEXT_ERR_PARSE;
    case siatext::ErrorCategory::format: return SIATEXT_ERR_FORMAT;
    case siatext::ErrorCategory::numeric: return SIATEXT_ERR_NUMERIC;
  }
  return SIATEXT_ERR_INVALID_ARGUMENT;
}

template <typename Fn>
siatext_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SIATEXT_OK;
  } catch (const siatext::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SIATEXT_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SIATEXT_ERR_INVALID_ARGUMENT;
  }
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw siatext::Error(siatext::ErrorCategory::invalid_argument,
                         std::string("null or invalid argument: ") + what);
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

siatext::VoteMode vote_mode_of(int vote_mode) {
  if (vote_mode == SIATEXT_VOTE_MEAN_SIMILARITY) return siatext::VoteMode::mean_similarity;
  if (vote_mode == SIATEXT_VOTE_MATCH_COUNT) return siatext::VoteMode::match_count;
  throw siatext::Error(siatext::ErrorCategory::invalid_argument,
                       "vote_mode must be 0 (match count) or 1 (mean similarity)");
}

}  // namespace

extern "C" {

uint32_t siatext_api_version(void) { return SIATEXT_API_VERSION; }

const char* siatext_status_name(siatext_status status) {
  switch (status) {
    case SIATEXT_OK: return "ok";
    case SIATEXT_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SIATEXT_ERR_IO: return "io";
    case SIATEXT_ERR_PARSE: return "parse";
    case SIATEXT_ERR_FORMAT: return "format";
    case SIATEXT_ERR_NUMERIC: return "numeric";
  }
  return "unknown";
}

const char* siatext_last_error(void) { return g_last_error.c_str(); }

void siatext_string_free(char* s) { std::free(s); }

/* ---- corpora ------------------------------------------------------------ */

siatext_status siatext_corpus_load(const char* path, siatext_corpus** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out");
    auto* handle = new siatext_corpus{siatext::load_labeled_corpus(path)};
    *out = handle;
  });
}

siatext_status siatext_corpus_save(const siatext_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus != nullptr && path != nullptr, "corpus/path");
    siatext::save_labeled_corpus(corpus->corpus, path);
  });
}

size_t siatext_corpus_size(const siatext_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.sentences.size();
}

size_t siatext_corpus_label_count(const siatext_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.label_set.size();
}

void siatext_corpus_free(siatext_corpus* corpus) { delete corpus; }

siatext_status siatext_corpus_split(const siatext_corpus* corpus, double test_fraction,
                                    uint64_t seed, siatext_corpus** train_out,
                                    siatext_corpus** test_out) {
  return guarded([&] {
    require(corpus != nullptr && train_out != nullptr && test_out != nullptr,
            "corpus/train_out/test_out");
    auto [train, test] = siatext::split_corpus(corpus->corpus, test_fraction, seed);
    *train_out = new siatext_corpus{std::move(train)};
    *test_out = new siatext_corpus{std::move(test)};
  });
}

siatext_status siatext_synth_run(const char* spec_path, const char* out_dir, uint64_t seed,
                                 size_t* corpora_written) {
  return guarded([&] {
    require(spec_path != nullptr && out_dir != nullptr, "spec_path/out_dir");
    auto specs = siatext::load_synthetic_spec(spec_path);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      throw siatext::Error(siatext::ErrorCategory::io,
                           "cannot create output directory: " + std::string(out_dir));
    }
    size_t written = 0;
    for (size_t i = 0; i < specs.size(); ++i) {
      siatext::LabeledCorpus corpus =
          siatext::generate_synthetic_corpus(specs[i].spec, siatext::mix_seed(seed, i));
      std::filesystem::path path = std::filesystem::path(out_dir) / (specs[i].name + ".tsv");
      siatext::save_labeled_corpus(corpus, path.string());
      ++written;
    }
    if (corpora_written != nullptr) *corpora_written = written;
  });
}

/* ---- vocabulary ---------------------------------------------------------- */

siatext_status siatext_vocab_build(const siatext_corpus* const* corpora, size_t corpus_count,
                                   uint32_t min_count, siatext_vocab** out) {
  return guarded([&] {
    require(corpora != nullptr && out != nullptr && corpus_count > 0, "corpora/out");
    std::vector<const siatext::LabeledCorpus*> inputs;
    inputs.reserve(corpus_count);
    for (size_t i = 0; i < corpus_count; ++i) {
      require(corpora[i] != nullptr, "corpora[i]");
      inputs.push_back(&corpora[i]->corpus);
    }
    *out = new siatext_vocab{siatext::build_vocabulary(inputs, min_count)};
  });
}

siatext_status siatext_vocab_save(const siatext_vocab* vocab, const char* path) {
  return guarded([&] {
    require(vocab != nullptr && path != nullptr, "vocab/path");
    siatext::save_vocabulary(vocab->vocab, path);
  });
}

siatext_status siatext_vocab_load(const char* path, siatext_vocab** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out");
    *out = new siatext_vocab{siatext::load_vocabulary(path)};
  });
}

size_t siatext_vocab_size(const siatext_vocab* vocab) {
  return vocab == nullptr ? 0 : vocab->vocab.size();
}

void siatext_vocab_free(siatext_vocab* vocab) { delete vocab; }

/* ---- model --------------------------------------------------------------- */

void siatext_net_options_init(siatext_net_options* options) {
  if (options == nullptr) return;
  options->embed_dim = 64;
  options->hidden_dim = 64;
  options->output_dim = 128;
  options->init_scale = 1.0f;
  options->seed = 0;
}

siatext_status siatext_model_create(const siatext_vocab* vocab,
                                    const siatext_net_options* options, siatext_model** out) {
  return guarded([&] {
    require(vocab != nullptr && out != nullptr, "vocab/out");
    siatext_net_options defaults;
    siatext_net_options_init(&defaults);
    const siatext_net_options* opt = options != nullptr ? options : &defaults;

    siatext::NetConfig net;
    net.vocab_size = static_cast<uint32_t>(vocab->vocab.size());
    net.embed_dim = opt->embed_dim;
    net.hidden_dim = opt->hidden_dim;
    net.output_dim = opt->output_dim;
    net.init_scale = opt->init_scale;
    net.seed = opt->seed;

    auto* model = new siatext_model;
    model->params = siatext::init_params<float>(net);
    model->vocab = vocab->vocab;
    model->net = net;
    *out = model;
  });
}

siatext_status siatext_model_save(const siatext_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "model/path");
    siatext::Checkpoint ckpt{model->params, model->vocab, model->net, model->margin};
    siatext::save_checkpoint(ckpt, path);
  });
}

siatext_status siatext_model_load(const char* path, siatext_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out");
    siatext::Checkpoint ckpt = siatext::load_checkpoint(path);
    auto* model = new siatext_model;
    model->params = std::move(ckpt.params);
    model->vocab = std::move(ckpt.vocab);
    model->net = ckpt.net;
    model->margin = ckpt.margin;
    *out = model;
  });
}

void siatext_model_free(siatext_model* model) { delete model; }

void siatext_train_options_init(siatext_train_options* options) {
  if (options == nullptr) return;
  options->batch_size = 32;
  options->epochs = 20;
  options->learning_rate = 1e-3f;
  options->use_sgd = 0;
  options->clip_norm = 5.0f;
  options->margin = 0.5f;
  options->seed = 0;
  options->negatives_per_positive = 1;
  options->positives_per_left = 1;
  options->threads = 1;
}

siatext_status siatext_model_train(siatext_model* model, const siatext_corpus* left,
                                   const siatext_corpus* right,
                                   const siatext_train_options* options,
                                   const char* loss_log_path) {
  return guarded([&] {
    require(model != nullptr && left != nullptr && right != nullptr, "model/left/right");
    siatext_train_options defaults;
    siatext_train_options_init(&defaults);
    const siatext_train_options* opt = options != nullptr ? options : &defaults;

    siatext::EncodedCorpus left_enc = siatext::encode_corpus(left->corpus, model->vocab);
    siatext::PairOptions pair_opt;
    pair_opt.negatives_per_positive = opt->negatives_per_positive;
    pair_opt.positives_per_left = opt->positives_per_left;
    pair_opt.seed = siatext::mix_seed(opt->seed, 1);

    siatext::PairDataset dataset;
    if (left == right) {
      // monolingual mode: pairing within one corpus, self-pairs excluded
      dataset = siatext::build_pairs(left_enc, left_enc, pair_opt);
    } else {
      siatext::EncodedCorpus right_enc = siatext::encode_corpus(right->corpus, model->vocab);
      dataset = siatext::build_pairs(left_enc, right_enc, pair_opt);
    }

    siatext::TrainConfig cfg;
    cfg.batch_size = opt->batch_size;
    cfg.epochs = opt->epochs;
    cfg.learning_rate = opt->learning_rate;
    cfg.optimizer = opt->use_sgd != 0 ? siatext::OptimizerKind::sgd : siatext::OptimizerKind::adam;
    cfg.clip_norm = opt->clip_norm;
    cfg.seed = siatext::mix_seed(opt->seed, 2);
    cfg.loss.margin = opt->margin;
    cfg.threads = opt->threads;

    siatext::TrainReport report = siatext::train(model->params, dataset, cfg);
    model->margin = opt->margin;

    if (loss_log_path != nullptr) {
      std::ofstream log(loss_log_path, std::ios::binary | std::ios::trunc);
      if (!log) {
        throw siatext::Error(siatext::ErrorCategory::io,
                             "cannot open loss log for writing: " + std::string(loss_log_path));
      }
      char line[96];
      for (size_t e = 0; e < report.epoch_sum_loss.size(); ++e) {
        std::snprintf(line, sizeof(line), "%zu\t%.9g\t%.9g\n", e + 1, report.epoch_sum_loss[e],
                      report.epoch_mean_loss[e]);
        log << line;
      }
      if (!log.flush()) {
        throw siatext::Error(siatext::ErrorCategory::io,
                             "failed writing loss log: " + std::string(loss_log_path));
      }
    }
  });
}

/* ---- classification ------------------------------------------------------ */

siatext_status siatext_refset_build(const siatext_model* model, const siatext_corpus* refs,
                                    uint32_t per_class, uint64_t seed, siatext_refset** out) {
  return guarded([&] {
    require(model != nullptr && refs != nullptr && out != nullptr, "model/refs/out");
    siatext::EncodedCorpus enc = siatext::encode_corpus(refs->corpus, model->vocab);
    *out = new siatext_refset{
        siatext::build_reference_set(model->params, enc, per_class, seed)};
  });
}

void siatext_refset_free(siatext_refset* refs) { delete refs; }

siatext_status siatext_predict(const siatext_model* model, const siatext_refset* refs,
                               const char* text, double tau, int vote_mode, char** label_out,
                               char** diagnostics_out) {
  return guarded([&] {
    require(model != nullptr && refs != nullptr && text != nullptr && label_out != nullptr,
            "model/refs/text/label_out");
    if (siatext::trim_whitespace(text).empty()) {
      throw siatext::Error(siatext::ErrorCategory::invalid_argument,
                           "cannot predict on empty text");
    }
    siatext::SentenceEncoding enc = siatext::encode(text, model->vocab);
    siatext::Classification result =
        siatext::classify(model->params, refs->refs, enc, tau, vote_mode_of(vote_mode));
    *label_out = dup_string(result.label);
    if (diagnostics_out != nullptr) {
      *diagnostics_out = dup_string(siatext::render_classification(result));
    }
  });
}

siatext_status siatext_evaluate(const siatext_model* model, const siatext_refset* refs,
                                const siatext_corpus* test, double tau, int vote_mode,
                                siatext_metrics** out) {
  return guarded([&] {
    require(model != nullptr && refs != nullptr && test != nullptr && out != nullptr,
            "model/refs/test/out");
    siatext::EncodedCorpus enc = siatext::encode_corpus(test->corpus, model->vocab);
    *out = new siatext_metrics{
        siatext::evaluate(model->params, refs->refs, enc, tau, vote_mode_of(vote_mode))};
  });
}

double siatext_metrics_accuracy(const siatext_metrics* metrics) {
  return metrics == nullptr ? 0.0 : metrics->metrics.accuracy;
}

siatext_status siatext_metrics_render_table(const siatext_metrics* metrics, char** out) {
  return guarded([&] {
    require(metrics != nullptr && out != nullptr, "metrics/out");
    *out = dup_string(siatext::render_metrics_table(metrics->metrics));
  });
}

siatext_status siatext_metrics_write_file(const siatext_metrics* metrics, const char* path) {
  return guarded([&] {
    require(metrics != nullptr && path != nullptr, "metrics/path");
    siatext::write_metrics_file(metrics->metrics, path);
  });
}

void siatext_metrics_free(siatext_metrics* metrics) { delete metrics; }

} /* extern "C" */
