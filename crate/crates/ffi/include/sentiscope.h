/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SENTISCOPE_H
#define SENTISCOPE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  // A required pointer argument was NULL.
  SS_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  SS_STATUS_INVALID_UTF8 = 2,
  // Arguments were well-formed but unusable (too short, constant, out of range).
  SS_STATUS_INVALID_INPUT = 3,
  // A file could not be opened or read.
  SS_STATUS_IO = 4,
  // A file was read but its contents are malformed.
  SS_STATUS_PARSE = 5,
  // The library panicked; the handle arguments should be considered lost.
  SS_STATUS_PANIC = 6,
} SsStatus;

// Test selection for [`ss_mann_whitney`].
typedef enum SsMwMode {
  SS_MW_MODE_AUTO = 0,
  SS_MW_MODE_EXACT = 1,
  SS_MW_MODE_APPROX = 2,
} SsMwMode;

// Token valences.
typedef struct SsLexicon SsLexicon;

// BIC-selected breakpoint segmentation of one series.
typedef struct SsSegmentation SsSegmentation;

// Negators, amplifiers and deamplifiers.
typedef struct SsShifters SsShifters;

typedef struct SsOlsFit {
  double alpha;
  double beta;
  double beta_std;
  double r2;
  double se_beta;
  double t_stat;
  double p_value;
  size_t n;
} SsOlsFit;

typedef struct SsMwResult {
  double u_a;
  double u_b;
  double p_value;
  // Whether the exact null distribution was used rather than the normal approximation.
  bool exact;
  bool degenerate;
} SsMwResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *ss_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ss_version(void);

// Cleans `raw` (lowercase, drop URLs, mentions and hashtags, strip
// punctuation). The result must be released with [`ss_string_free`].
//
// # Safety
// `raw` must be a NUL-terminated string and `out` a valid pointer.
enum SsStatus ss_clean_text(const char *raw, char **out);

// # Safety
// `s` must come from this library or be NULL.
void ss_string_free(char *s);

// Loads a `token<TAB>score` lexicon file.
//
// # Safety
// `path` and `name` must be NUL-terminated strings and `out` a valid pointer.
enum SsStatus ss_lexicon_load(const char *path, const char *name, struct SsLexicon **out);

// # Safety
// `lex` must come from [`ss_lexicon_load`] or be NULL.
void ss_lexicon_free(struct SsLexicon *lex);

// Number of entries in the lexicon.
//
// # Safety
// `lex` must be a live handle.
size_t ss_lexicon_len(const struct SsLexicon *lex);

// Sum of valences of the tokens of cleaned `text`.
//
// # Safety
// `lex` must be a live handle, `text` a NUL-terminated string and `out` a
// valid pointer.
enum SsStatus ss_score_unigram(const struct SsLexicon *lex, const char *text, double *out);

// Loads a `token<TAB>role<TAB>weight` shifter file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SsStatus ss_shifters_load(const char *path, struct SsShifters **out);

// # Safety
// `sh` must come from [`ss_shifters_load`] or be NULL.
void ss_shifters_free(struct SsShifters *sh);

// Shifter-aware score of cleaned `text`, looking `window` tokens back.
//
// # Safety
// Handles must be live, `text` a NUL-terminated string and `out` a valid
// pointer.
enum SsStatus ss_score_shifted(const struct SsLexicon *lex,
                               const struct SsShifters *shifters,
                               size_t window,
                               const char *text,
                               double *out);

// Fits 0..=`m_max` breaks to `y` and picks the count by BIC. `h_min` of 0
// uses the default trimming.
//
// # Safety
// `y` must point to `n` doubles and `out` be a valid pointer.
enum SsStatus ss_segment(const double *y,
                         size_t n,
                         size_t m_max,
                         size_t h_min,
                         struct SsSegmentation **out);

// # Safety
// `seg` must come from [`ss_segment`] or be NULL.
void ss_segmentation_free(struct SsSegmentation *seg);

// Break count chosen by BIC.
//
// # Safety
// `seg` must be a live handle.
size_t ss_segmentation_chosen_m(const struct SsSegmentation *seg);

// Largest break count that was fitted.
//
// # Safety
// `seg` must be a live handle.
size_t ss_segmentation_max_m(const struct SsSegmentation *seg);

// RSS and BIC of the fit with `m` breaks. BIC is negative infinity for a
// perfect fit.
//
// # Safety
// `seg` must be a live handle; `rss` and `bic` valid pointers.
enum SsStatus ss_segmentation_fit(const struct SsSegmentation *seg,
                                  size_t m,
                                  double *rss,
                                  double *bic);

// Copies the `m` breakpoints of the fit with `m` breaks into `out`, which
// must hold at least `m` entries. A breakpoint is the 1-based index of the
// last observation of a segment.
//
// # Safety
// `seg` must be a live handle and `out` point to `cap` writable entries.
enum SsStatus ss_segmentation_breakpoints(const struct SsSegmentation *seg,
                                          size_t m,
                                          size_t *out,
                                          size_t cap);

// Simple least squares of `y` on `x`.
//
// # Safety
// `x` and `y` must point to `n` doubles and `out` be a valid pointer.
enum SsStatus ss_ols(const double *x, const double *y, size_t n, struct SsOlsFit *out);

// Two-sided Mann-Whitney test of `a` against `b`.
//
// # Safety
// `a` and `b` must point to `na` and `nb` doubles and `out` be valid.
enum SsStatus ss_mann_whitney(const double *a,
                              size_t na,
                              const double *b,
                              size_t nb,
                              enum SsMwMode mode,
                              struct SsMwResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENTISCOPE_H */
