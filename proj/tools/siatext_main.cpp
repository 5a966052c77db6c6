// Command-line front end for the siatext shared library. Every subcommand is
// reproducible from its flags alone; all state travels through files.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <siatext/siatext.h>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int report_failure(siatext_status status) {
  std::cerr << "error (" << siatext_status_name(status) << "): " << siatext_last_error()
            << std::endl;
  return status == SIATEXT_ERR_NUMERIC ? kExitNumeric : kExitData;
}

#define CHECK_OK(call)                        \
  do {                                        \
    siatext_status status_ = (call);          \
    if (status_ != SIATEXT_OK) {              \
      return report_failure(status_);         \
    }                                         \
  } while (0)

using CorpusPtr = std::unique_ptr<siatext_corpus, decltype(&siatext_corpus_free)>;
using VocabPtr = std::unique_ptr<siatext_vocab, decltype(&siatext_vocab_free)>;
using ModelPtr = std::unique_ptr<siatext_model, decltype(&siatext_model_free)>;
using RefsetPtr = std::unique_ptr<siatext_refset, decltype(&siatext_refset_free)>;
using MetricsPtr = std::unique_ptr<siatext_metrics, decltype(&siatext_metrics_free)>;
using StringPtr = std::unique_ptr<char, decltype(&siatext_string_free)>;

struct SynthArgs {
  std::string spec;
  std::string out_dir;
  uint64_t seed = 0;
};

struct FeaturizeArgs {
  std::vector<std::string> train_paths;
  std::string out;
  uint32_t min_count = 1;
};

struct TrainArgs {
  std::string left, right, vocab, out;
  std::string loss_log;
  double margin = 0.5;
  double lr = 1e-3;
  uint32_t epochs = 20;
  uint32_t batch = 32;
  uint64_t seed = 0;
  uint32_t negatives = 1;
  uint32_t positives = 1;
  uint32_t embed_dim = 64;
  uint32_t hidden_dim = 64;
  uint32_t output_dim = 128;
  double init_scale = 1.0;
  double clip = 5.0;
  std::string optimizer = "adam";
  uint32_t threads = 1;
};

struct EvalArgs {
  std::string model, refs, test, metrics_out;
  uint32_t per_class = 100;
  double tau = 0.0;
  uint64_t seed = 0;
  std::string vote = "count";
};

struct PredictArgs {
  std::string model, refs, text;
  uint32_t per_class = 100;
  double tau = 0.0;
  uint64_t seed = 0;
  std::string vote = "count";
};

int vote_mode_of(const std::string& vote) {
  return vote == "mean" ? SIATEXT_VOTE_MEAN_SIMILARITY : SIATEXT_VOTE_MATCH_COUNT;
}

int run_synth(const SynthArgs& args) {
  size_t written = 0;
  CHECK_OK(siatext_synth_run(args.spec.c_str(), args.out_dir.c_str(), args.seed, &written));
  std::cout << "wrote " << written << " corpora to " << args.out_dir << std::endl;
  return kExitOk;
}

int run_featurize(const FeaturizeArgs& args) {
  std::vector<CorpusPtr> corpora;
  std::vector<const siatext_corpus*> raw;
  for (const std::string& path : args.train_paths) {
    siatext_corpus* corpus = nullptr;
    CHECK_OK(siatext_corpus_load(path.c_str(), &corpus));
    corpora.emplace_back(corpus, &siatext_corpus_free);
    raw.push_back(corpus);
  }
  siatext_vocab* vocab = nullptr;
  CHECK_OK(siatext_vocab_build(raw.data(), raw.size(), args.min_count, &vocab));
  VocabPtr vocab_guard(vocab, &siatext_vocab_free);
  CHECK_OK(siatext_vocab_save(vocab, args.out.c_str()));
  std::cout << "vocabulary of " << siatext_vocab_size(vocab) << " entries (incl. unk) -> "
            << args.out << std::endl;
  return kExitOk;
}

int run_train(const TrainArgs& args) {
  siatext_vocab* vocab = nullptr;
  CHECK_OK(siatext_vocab_load(args.vocab.c_str(), &vocab));
  VocabPtr vocab_guard(vocab, &siatext_vocab_free);

  siatext_corpus* left = nullptr;
  CHECK_OK(siatext_corpus_load(args.left.c_str(), &left));
  CorpusPtr left_guard(left, &siatext_corpus_free);

  // Same path on both sides = monolingual training on one corpus; pass the
  // same handle so the library never pairs a sentence with itself.
  CorpusPtr right_guard(nullptr, &siatext_corpus_free);
  const siatext_corpus* right = left;
  if (args.right != args.left) {
    siatext_corpus* loaded = nullptr;
    CHECK_OK(siatext_corpus_load(args.right.c_str(), &loaded));
    right_guard.reset(loaded);
    right = loaded;
  }

  siatext_net_options net;
  siatext_net_options_init(&net);
  net.embed_dim = args.embed_dim;
  net.hidden_dim = args.hidden_dim;
  net.output_dim = args.output_dim;
  net.init_scale = static_cast<float>(args.init_scale);
  net.seed = args.seed;

  siatext_model* model = nullptr;
  CHECK_OK(siatext_model_create(vocab, &net, &model));
  ModelPtr model_guard(model, &siatext_model_free);

  siatext_train_options train;
  siatext_train_options_init(&train);
  train.batch_size = args.batch;
  train.epochs = args.epochs;
  train.learning_rate = static_cast<float>(args.lr);
  train.use_sgd = args.optimizer == "sgd" ? 1 : 0;
  train.clip_norm = static_cast<float>(args.clip);
  train.margin = static_cast<float>(args.margin);
  train.seed = args.seed;
  train.negatives_per_positive = args.negatives;
  train.positives_per_left = args.positives;
  train.threads = args.threads;

  const std::string loss_log = args.loss_log.empty() ? args.out + ".loss" : args.loss_log;
  CHECK_OK(siatext_model_train(model, left, right, &train, loss_log.c_str()));
  CHECK_OK(siatext_model_save(model, args.out.c_str()));
  std::cout << "model -> " << args.out << "\nloss log -> " << loss_log << std::endl;
  return kExitOk;
}

int run_eval(const EvalArgs& args) {
  siatext_model* model = nullptr;
  CHECK_OK(siatext_model_load(args.model.c_str(), &model));
  ModelPtr model_guard(model, &siatext_model_free);

  siatext_corpus* refs_corpus = nullptr;
  CHECK_OK(siatext_corpus_load(args.refs.c_str(), &refs_corpus));
  CorpusPtr refs_guard(refs_corpus, &siatext_corpus_free);

  siatext_corpus* test_corpus = nullptr;
  CHECK_OK(siatext_corpus_load(args.test.c_str(), &test_corpus));
  CorpusPtr test_guard(test_corpus, &siatext_corpus_free);

  siatext_refset* refs = nullptr;
  CHECK_OK(siatext_refset_build(model, refs_corpus, args.per_class, args.seed, &refs));
  RefsetPtr refs_set_guard(refs, &siatext_refset_free);

  siatext_metrics* metrics = nullptr;
  CHECK_OK(siatext_evaluate(model, refs, test_corpus, args.tau, vote_mode_of(args.vote),
                            &metrics));
  MetricsPtr metrics_guard(metrics, &siatext_metrics_free);

  char* table = nullptr;
  CHECK_OK(siatext_metrics_render_table(metrics, &table));
  StringPtr table_guard(table, &siatext_string_free);
  std::cout << table;

  if (!args.metrics_out.empty()) {
    CHECK_OK(siatext_metrics_write_file(metrics, args.metrics_out.c_str()));
    std::cout << "metrics -> " << args.metrics_out << std::endl;
  }
  return kExitOk;
}

int run_predict(const PredictArgs& args) {
  siatext_model* model = nullptr;
  CHECK_OK(siatext_model_load(args.model.c_str(), &model));
  ModelPtr model_guard(model, &siatext_model_free);

  siatext_corpus* refs_corpus = nullptr;
  CHECK_OK(siatext_corpus_load(args.refs.c_str(), &refs_corpus));
  CorpusPtr refs_guard(refs_corpus, &siatext_corpus_free);

  siatext_refset* refs = nullptr;
  CHECK_OK(siatext_refset_build(model, refs_corpus, args.per_class, args.seed, &refs));
  RefsetPtr refs_set_guard(refs, &siatext_refset_free);

  char* label = nullptr;
  char* diagnostics = nullptr;
  CHECK_OK(siatext_predict(model, refs, args.text.c_str(), args.tau,
                           vote_mode_of(args.vote), &label, &diagnostics));
  StringPtr label_guard(label, &siatext_string_free);
  StringPtr diag_guard(diagnostics, &siatext_string_free);
  std::cout << diagnostics;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"siamese trigram text classifier"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic corpora from a spec file");
  synth_cmd->add_option("--spec", synth.spec, "synthetic spec file")->required();
  synth_cmd->add_option("--out", synth.out_dir, "output directory for <name>.tsv files")
      ->required();
  synth_cmd->add_option("--seed", synth.seed, "generation seed")->capture_default_str();

  FeaturizeArgs feat;
  CLI::App* feat_cmd = app.add_subcommand("featurize", "build the joint trigram vocabulary");
  feat_cmd->add_option("--train", feat.train_paths, "training corpora (one or more TSV files)")
      ->required()
      ->expected(1, -1);
  feat_cmd->add_option("--out", feat.out, "vocabulary file to write")->required();
  feat_cmd->add_option("--min-count", feat.min_count, "minimum trigram count")
      ->capture_default_str();

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train the shared encoder on sentence pairs");
  train_cmd->add_option("--left", train.left, "left (anchor) corpus TSV")->required();
  train_cmd->add_option("--right", train.right, "right (partner) corpus TSV")->required();
  train_cmd->add_option("--vocab", train.vocab, "vocabulary file")->required();
  train_cmd->add_option("--out", train.out, "checkpoint file to write")->required();
  train_cmd->add_option("--loss-log", train.loss_log, "loss log path (default: <out>.loss)");
  train_cmd->add_option("--margin", train.margin, "contrastive margin in [0,1]")
      ->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "learning rate")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
  train_cmd->add_option("--batch", train.batch, "batch size")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "seed for init, pairing and shuffling")
      ->capture_default_str();
  train_cmd->add_option("--negatives", train.negatives, "negative pairs per positive")
      ->capture_default_str();
  train_cmd->add_option("--positives", train.positives, "positive pairs per left sentence")
      ->capture_default_str();
  train_cmd->add_option("--embed-dim", train.embed_dim, "trigram embedding width")
      ->capture_default_str();
  train_cmd->add_option("--hidden-dim", train.hidden_dim, "LSTM hidden width per direction")
      ->capture_default_str();
  train_cmd->add_option("--output-dim", train.output_dim, "projection width d")
      ->capture_default_str();
  train_cmd->add_option("--init-scale", train.init_scale, "uniform init scale")
      ->capture_default_str();
  train_cmd->add_option("--clip", train.clip, "global-norm gradient clip (<= 0 disables)")
      ->capture_default_str();
  train_cmd->add_option("--optimizer", train.optimizer, "adam or sgd")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  train_cmd->add_option("--threads", train.threads, "worker threads (1 = bitwise deterministic)")
      ->capture_default_str();

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model with a reference-set vote");
  eval_cmd->add_option("--model", eval.model, "checkpoint file")->required();
  eval_cmd->add_option("--refs", eval.refs, "reference corpus TSV")->required();
  eval_cmd->add_option("--test", eval.test, "test corpus TSV")->required();
  eval_cmd->add_option("--per-class", eval.per_class, "references sampled per class")
      ->capture_default_str();
  eval_cmd->add_option("--tau", eval.tau, "match threshold on cosine similarity")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "reference sampling seed")->capture_default_str();
  eval_cmd->add_option("--vote", eval.vote, "count or mean")
      ->check(CLI::IsMember({"count", "mean"}))
      ->capture_default_str();
  eval_cmd->add_option("--metrics-out", eval.metrics_out, "machine-readable metrics file");

  PredictArgs predict;
  CLI::App* predict_cmd = app.add_subcommand("predict", "predict the label of one sentence");
  predict_cmd->add_option("--model", predict.model, "checkpoint file")->required();
  predict_cmd->add_option("--refs", predict.refs, "reference corpus TSV")->required();
  predict_cmd->add_option("--text", predict.text, "sentence to classify")->required();
  predict_cmd->add_option("--per-class", predict.per_class, "references sampled per class")
      ->capture_default_str();
  predict_cmd->add_option("--tau", predict.tau, "match threshold on cosine similarity")
      ->capture_default_str();
  predict_cmd->add_option("--seed", predict.seed, "reference sampling seed")
      ->capture_default_str();
  predict_cmd->add_option("--vote", predict.vote, "count or mean")
      ->check(CLI::IsMember({"count", "mean"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (synth_cmd->parsed()) return run_synth(synth);
  if (feat_cmd->parsed()) return run_featurize(feat);
  if (train_cmd->parsed()) return run_train(train);
  if (eval_cmd->parsed()) return run_eval(eval);
  if (predict_cmd->parsed()) return run_predict(predict);
  return kExitUsage;
}
