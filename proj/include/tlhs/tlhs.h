#ifndef TLHS_TLHS_H
#define TLHS_TLHS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TLHS_BUILDING)
#    define TLHS_API __declspec(dllexport)
#  else
#    define TLHS_API __declspec(dllimport)
#  endif
#else
#  define TLHS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; on failure the message is
   available from tlhs_last_error_message() on the same thread. */
typedef enum tlhs_status {
  TLHS_OK = 0,
  TLHS_ERR_INVALID_ARGUMENT = 1,
  TLHS_ERR_ZERO_VECTOR = 2,
  TLHS_ERR_DIMENSION_MISMATCH = 3,
  TLHS_ERR_SIZE_LIMIT = 4,
  TLHS_ERR_EMPTY_DATASET = 5,
  TLHS_ERR_NON_POSITIVE_STEP = 6,
  TLHS_ERR_ODD_K = 7,
  TLHS_ERR_INSUFFICIENT_BAND_SAMPLES = 8,
  TLHS_ERR_THETA_OUT_OF_RANGE = 9,
  TLHS_ERR_NOT_SYMMETRIC = 10,
  TLHS_ERR_NO_CONVERGENCE = 11,
  TLHS_ERR_EMPTY_CANDIDATE_LIST = 12,
  TLHS_ERR_MODE_MISMATCH = 13,
  TLHS_ERR_WRONG_DIMENSION = 14,
  TLHS_ERR_IO = 15,
  TLHS_ERR_INTERNAL = 99
} tlhs_status;

/* Opaque labeled dataset: n points in R^d with labels in {-1, +1}. */
typedef struct tlhs_dataset tlhs_dataset;

TLHS_API const char* tlhs_version(void);
TLHS_API const char* tlhs_status_name(tlhs_status status);
/* Message of the last failed call on this thread; "" if none. */
TLHS_API const char* tlhs_last_error_message(void);

/* Copies n*d row-major coordinates and n labels. */
TLHS_API tlhs_status tlhs_dataset_create(size_t d, size_t n, const double* points,
                                         const int* labels, tlhs_dataset** out);
TLHS_API tlhs_status tlhs_dataset_read_csv(const char* path, tlhs_dataset** out);
TLHS_API tlhs_status tlhs_dataset_write_csv(const tlhs_dataset* ds, const char* path);
TLHS_API size_t tlhs_dataset_size(const tlhs_dataset* ds);
TLHS_API size_t tlhs_dataset_dim(const tlhs_dataset* ds);
/* Copies out; either pointer may be NULL. */
TLHS_API tlhs_status tlhs_dataset_copy(const tlhs_dataset* ds, double* points, int* labels);
TLHS_API void tlhs_dataset_free(tlhs_dataset* ds);

/* Samples a dataset from a JSON generation spec. The planted direction is
   returned as a JSON array when planted_json is non-NULL. */
TLHS_API tlhs_status tlhs_generate(const char* spec_json, uint64_t seed, tlhs_dataset** out,
                                   char** planted_json);

/* Runs one tester. *accepted is 1 or 0; the report is a JSON object. */
TLHS_API tlhs_status tlhs_run_tester(const tlhs_dataset* ds, const char* request_json,
                                     char** report_json, int* accepted);

/* Runs a tester-learner. *rejected is 1 or 0; the result is a JSON object. */
TLHS_API tlhs_status tlhs_learn(const tlhs_dataset* train, const tlhs_dataset* holdout,
                                const char* config_json, char** result_json, int* rejected);

/* Error metrics of the hypothesis w (length d) on ds. */
TLHS_API tlhs_status tlhs_evaluate(const tlhs_dataset* ds, const double* w, size_t d,
                                   const char* options_json, char** metrics_json);

TLHS_API double tlhs_ramp_value(double t, double sigma);
TLHS_API double tlhs_ramp_derivative(double t, double sigma);

/* Re-serializes a JSON document with 17-significant-digit floats; indent < 0
   gives a single line. */
TLHS_API tlhs_status tlhs_format_json(const char* json, int indent, char** out);

/* Releases strings returned by this library. */
TLHS_API void tlhs_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
