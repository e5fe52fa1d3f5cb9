#ifndef CAS_H
#define CAS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum CasStatus {
  CAS_STATUS_OK = 0,
  CAS_STATUS_NULL_POINTER = 1,
  CAS_STATUS_INVALID_UTF8 = 2,
  CAS_STATUS_PARSE_ERROR = 3,
  CAS_STATUS_VALIDATION_ERROR = 4,
  CAS_STATUS_SCHEMA_VERSION = 5,
  CAS_STATUS_UNDEFINED_RATE = 6,
  CAS_STATUS_UNSUPPORTED_FORMAT = 7,
  CAS_STATUS_INTERNAL = 8,
} CasStatus;

/**
 * Contestation ledger handle.
 */
typedef struct CasLedger CasLedger;

/**
 * Answer sheet handle.
 */
typedef struct CasSheet CasSheet;

/**
 * Weight configuration handle.
 */
typedef struct CasWeights CasWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cas_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next library call on the same thread.
 */
const char *cas_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void cas_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum CasStatus cas_weights_default(struct CasWeights **out);

/**
 * Parses a weight configuration document. The result is not validated; see
 * `cas_weights_validate`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CasStatus cas_weights_from_json(const char *json, struct CasWeights **out);

/**
 * Checks the configuration. Returns `CAS_STATUS_VALIDATION_ERROR` when it has
 * violations; if `report_json` is not null it receives the violation list.
 *
 * # Safety
 * `weights` must be a live handle; `report_json` may be null.
 */
enum CasStatus cas_weights_validate(const struct CasWeights *weights, char **report_json);

/**
 * # Safety
 * `weights` must come from this library and not have been freed. Null is ignored.
 */
void cas_weights_free(struct CasWeights *weights);

/**
 * Parses and checks an answer sheet.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CasStatus cas_sheet_from_json(const char *json, struct CasSheet **out);

/**
 * # Safety
 * `sheet` must come from this library and not have been freed. Null is ignored.
 */
void cas_sheet_free(struct CasSheet *sheet);

/**
 * Composite score of a sheet. A null `weights` uses the default configuration.
 *
 * # Safety
 * `sheet` must be a live handle, `weights` a live handle or null, `out_total` valid.
 */
enum CasStatus cas_score(const struct CasSheet *sheet,
                         const struct CasWeights *weights,
                         double *out_total);

/**
 * Full scored assessment (per-property contributions, total, provenance) as JSON.
 *
 * # Safety
 * As for `cas_score`; `out_json` must be valid.
 */
enum CasStatus cas_score_json(const struct CasSheet *sheet,
                              const struct CasWeights *weights,
                              char **out_json);

/**
 * Renders a report; `format` is "markdown", "json" or "csv".
 *
 * # Safety
 * As for `cas_score`; `format` must be a NUL-terminated string and `out` valid.
 */
enum CasStatus cas_report(const struct CasSheet *sheet,
                          const struct CasWeights *weights,
                          const char *format,
                          char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CasStatus cas_ledger_from_json(const char *json, struct CasLedger **out);

/**
 * Evaluates the contestability predicates and the weighted aggregate.
 * `alpha + beta + gamma` must be 1. The JSON result reports an undefined
 * aggregate through its `aggregate_error` field rather than a failure status.
 *
 * # Safety
 * `ledger` must be a live handle and `out_json` valid.
 */
enum CasStatus cas_ledger_evaluate(const struct CasLedger *ledger,
                                   double alpha,
                                   double beta,
                                   double gamma,
                                   char **out_json);

/**
 * Aggregate value only. Fails with `CAS_STATUS_UNDEFINED_RATE` when some
 * stakeholder has no contestation attempts.
 *
 * # Safety
 * `ledger` must be a live handle and `out_value` valid.
 */
enum CasStatus cas_ledger_aggregate(const struct CasLedger *ledger,
                                    double alpha,
                                    double beta,
                                    double gamma,
                                    double *out_value);

/**
 * # Safety
 * `ledger` must come from this library and not have been freed. Null is ignored.
 */
void cas_ledger_free(struct CasLedger *ledger);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CAS_H */
