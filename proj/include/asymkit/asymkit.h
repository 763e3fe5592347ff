#ifndef ASYMKIT_H
#define ASYMKIT_H

/* C interface to the asymkit library. Every call returns an ak_status; on
 * failure ak_last_error() describes the problem (per thread). Handles are
 * opaque and released with the matching *_free function. Strings returned
 * through char** are owned by the caller and released with ak_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ASYMKIT_BUILDING)
#    define AK_API __declspec(dllexport)
#  else
#    define AK_API __declspec(dllimport)
#  endif
#else
#  define AK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ak_status {
  AK_OK = 0,
  AK_ERR_VALIDATION = 1, /* bad input data or arguments */
  AK_ERR_IO = 2,         /* missing, unreadable or unwritable files */
  AK_ERR_INTERNAL = 3
} ak_status;

AK_API const char* ak_last_error(void);
AK_API const char* ak_version(void);
AK_API void ak_string_free(char* s);

/* Minimal-pair suites */

typedef struct ak_suite ak_suite;

typedef struct ak_pair_view {
  const char* id;
  const char* good;
  const char* bad;
  const char* paradigm;
  const char* suite;
} ak_pair_view;

/* subtask: "addition" or "multiplication"; default bounds and glyph. */
AK_API ak_status ak_suite_gen_arithmetic(const char* subtask, int count, uint64_t seed, ak_suite** out);
AK_API ak_status ak_suite_gen_dyck(int k, int length, int count, uint64_t seed, ak_suite** out);
AK_API ak_status ak_suite_gen_agreement(int count, uint64_t seed, ak_suite** out);
AK_API ak_status ak_suite_load(const char* path, ak_suite** out);
AK_API ak_status ak_suite_save(const ak_suite* suite, const char* path);
AK_API size_t ak_suite_size(const ak_suite* suite);
/* Views stay valid until the suite is freed. */
AK_API ak_status ak_suite_pair(const ak_suite* suite, size_t index, ak_pair_view* out);
AK_API void ak_suite_free(ak_suite* suite);

AK_API ak_status ak_validate_dyck(const char* symbols, int k, int* is_valid);

/* n-gram scorer */

typedef struct ak_ngram ak_ngram;

AK_API ak_status ak_ngram_train(const char* const* sentences, size_t n_sentences, int order, double alpha,
                                ak_ngram** out);
/* Sum of per-token natural-log probabilities. */
AK_API ak_status ak_ngram_sentence_logprob(const ak_ngram* model, const char* sentence, double* out);
AK_API ak_status ak_ngram_suite_accuracy(const ak_ngram* model, const ak_suite* suite, double* accuracy);
AK_API void ak_ngram_free(ak_ngram* model);

/* Numerics */

typedef struct ak_sigmoid {
  double y_min;
  double y_max;
  double x0;   /* log10 tokens; NaN when degenerate */
  double beta; /* 0 when degenerate */
  double mse;
  int degenerate;
} ak_sigmoid;

AK_API ak_status ak_fit_sigmoid(const double* tokens, const double* values, size_t n, ak_sigmoid* out);
AK_API ak_status ak_transition_distance(const ak_sigmoid* a, const ak_sigmoid* b, double* out);

/* Row-major x (n x p) and y (n x t); writes p x t row-major weights. */
AK_API ak_status ak_ridge_fit(const double* x, size_t n, size_t p, const double* y, size_t t, double lambda,
                              double* weights);

/* Commands. Requests and reports are JSON documents. */

AK_API ak_status ak_run_gen(const char* request_json, char** report_json);
AK_API ak_status ak_run_score(const char* request_json, char** report_json);
AK_API ak_status ak_run_brainscore(const char* request_json, char** report_json);
AK_API ak_status ak_run_transition(const char* request_json, char** report_json);
AK_API ak_status ak_run_synth(const char* request_json, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* ASYMKIT_H */
