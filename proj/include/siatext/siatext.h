/* siatext — siamese recurrent text classifier, C API.
 *
 * Every function returns a siatext_status; on failure siatext_last_error()
 * carries a human-readable message for the calling thread. Handles are opaque
 * and owned by the caller through the matching _free function.
 */
#ifndef SIATEXT_H
#define SIATEXT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SIATEXT_API_VERSION 1

typedef enum siatext_status {
  SIATEXT_OK = 0,
  SIATEXT_ERR_INVALID_ARGUMENT = 1, /* bad values or preconditions */
  SIATEXT_ERR_IO = 2,               /* file system failures */
  SIATEXT_ERR_PARSE = 3,            /* malformed corpus/spec/vocabulary files */
  SIATEXT_ERR_FORMAT = 4,           /* malformed checkpoint */
  SIATEXT_ERR_NUMERIC = 5,          /* non-finite values during training */
} siatext_status;

typedef struct siatext_corpus siatext_corpus;
typedef struct siatext_vocab siatext_vocab;
typedef struct siatext_model siatext_model;
typedef struct siatext_refset siatext_refset;
typedef struct siatext_metrics siatext_metrics;

uint32_t siatext_api_version(void);

/* Name of a status code, e.g. "invalid_argument". Never NULL. */
const char* siatext_status_name(siatext_status status);

/* Message of the last failure on this thread; empty string if none. */
const char* siatext_last_error(void);

/* Frees any string returned through a char** out-parameter. */
void siatext_string_free(char* s);

/* ---- corpora ------------------------------------------------------------ */
/* TSV file: one `text<TAB>label` record per line, blank lines ignored. */
siatext_status siatext_corpus_load(const char* path, siatext_corpus** out);
siatext_status siatext_corpus_save(const siatext_corpus* corpus, const char* path);
size_t siatext_corpus_size(const siatext_corpus* corpus);
size_t siatext_corpus_label_count(const siatext_corpus* corpus);
void siatext_corpus_free(siatext_corpus* corpus);

/* Stratified split into train/test halves, deterministic per seed. */
siatext_status siatext_corpus_split(const siatext_corpus* corpus, double test_fraction,
                                    uint64_t seed, siatext_corpus** train_out,
                                    siatext_corpus** test_out);

/* Generates every corpus defined in a synthetic spec file into
 * `<out_dir>/<name>.tsv`. See the README for the spec format. */
siatext_status siatext_synth_run(const char* spec_path, const char* out_dir, uint64_t seed,
                                 size_t* corpora_written);

/* ---- vocabulary ---------------------------------------------------------- */
siatext_status siatext_vocab_build(const siatext_corpus* const* corpora, size_t corpus_count,
                                   uint32_t min_count, siatext_vocab** out);
siatext_status siatext_vocab_save(const siatext_vocab* vocab, const char* path);
siatext_status siatext_vocab_load(const char* path, siatext_vocab** out);
size_t siatext_vocab_size(const siatext_vocab* vocab);
void siatext_vocab_free(siatext_vocab* vocab);

/* ---- model --------------------------------------------------------------- */
typedef struct siatext_net_options {
  uint32_t embed_dim;   /* default 64 */
  uint32_t hidden_dim;  /* default 64 */
  uint32_t output_dim;  /* default 128 */
  float init_scale;     /* default 1.0 */
  uint64_t seed;
} siatext_net_options;

void siatext_net_options_init(siatext_net_options* options);

siatext_status siatext_model_create(const siatext_vocab* vocab,
                                    const siatext_net_options* options, siatext_model** out);
siatext_status siatext_model_save(const siatext_model* model, const char* path);
siatext_status siatext_model_load(const char* path, siatext_model** out);
void siatext_model_free(siatext_model* model);

typedef struct siatext_train_options {
  uint32_t batch_size;    /* default 32 */
  uint32_t epochs;        /* default 20 */
  float learning_rate;    /* default 1e-3 */
  int use_sgd;            /* 0 = adam (default), 1 = plain sgd */
  float clip_norm;        /* default 5.0; <= 0 disables */
  float margin;           /* default 0.5 */
  uint64_t seed;
  uint32_t negatives_per_positive; /* default 1 */
  uint32_t positives_per_left;     /* default 1 */
  uint32_t threads;       /* default 1 = bitwise-deterministic */
} siatext_train_options;

void siatext_train_options_init(siatext_train_options* options);

/* Builds cross-corpus pairs (left anchored) and trains the shared parameters.
 * Passing the same handle as left and right enables monolingual mode, which
 * never pairs a sentence with itself. loss_log_path, when non-NULL, receives
 * one `epoch<TAB>sum_loss<TAB>mean_loss` line per epoch. */
siatext_status siatext_model_train(siatext_model* model, const siatext_corpus* left,
                                   const siatext_corpus* right,
                                   const siatext_train_options* options,
                                   const char* loss_log_path);

/* ---- classification ------------------------------------------------------ */
siatext_status siatext_refset_build(const siatext_model* model, const siatext_corpus* refs,
                                    uint32_t per_class, uint64_t seed, siatext_refset** out);
void siatext_refset_free(siatext_refset* refs);

#define SIATEXT_VOTE_MATCH_COUNT 0
#define SIATEXT_VOTE_MEAN_SIMILARITY 1

/* Predicts one label. label_out receives the class; diagnostics_out, when
 * non-NULL, receives a per-class match/similarity table. Both strings are
 * released with siatext_string_free. */
siatext_status siatext_predict(const siatext_model* model, const siatext_refset* refs,
                               const char* text, double tau, int vote_mode, char** label_out,
                               char** diagnostics_out);

siatext_status siatext_evaluate(const siatext_model* model, const siatext_refset* refs,
                                const siatext_corpus* test, double tau, int vote_mode,
                                siatext_metrics** out);
double siatext_metrics_accuracy(const siatext_metrics* metrics);
siatext_status siatext_metrics_render_table(const siatext_metrics* metrics, char** out);
siatext_status siatext_metrics_write_file(const siatext_metrics* metrics, const char* path);
void siatext_metrics_free(siatext_metrics* metrics);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SIATEXT_H */
