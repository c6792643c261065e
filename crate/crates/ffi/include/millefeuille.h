#ifndef MILLEFEUILLE_H
#define MILLEFEUILLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes.
typedef enum MfStatus {
  MF_STATUS_OK = 0,
  MF_STATUS_NULL_POINTER = 1,
  MF_STATUS_INVALID_UTF8 = 2,
  MF_STATUS_PARSE = 3,
  // Input outside the domain of the operation.
  MF_STATUS_DOMAIN = 4,
  // Dimensions or bases of the arguments do not match.
  MF_STATUS_MISMATCH = 5,
  MF_STATUS_PANIC = 6,
} MfStatus;

// Opaque expanding structure.
typedef struct MfStructure MfStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy of the last error message of this thread, or null when there is
// none. Release with [`mf_string_free`].
char *mf_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void mf_string_free(char *s);

// Library version as a static string.
const char *mf_version(void);

// Parses a structure from JSON, e.g.
// `{"layers":[{"alpha":1.0,"size":1}],"snowflake":1.0}`.
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum MfStatus mf_structure_from_json(const char *json, struct MfStructure **out);

// # Safety
// `s` must come from this library and not be freed twice.
void mf_structure_free(struct MfStructure *s);

// Dimension `n` of the structure, 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t mf_structure_dim(const struct MfStructure *s);

// Rescales the structure so that `alpha_1 = ln m`; writes the new handle
// and the factor applied.
//
// # Safety
// `s` must be a live handle; `out` and `factor` valid pointers.
enum MfStatus mf_structure_normalize(const struct MfStructure *s,
                                     uint32_t m,
                                     struct MfStructure **out,
                                     double *factor);

// `base^{t0}` for m-adic points in text form; `base <= 0` selects the
// valence `m`.
//
// # Safety
// `a`, `b` must be valid C strings and `out` a valid pointer.
enum MfStatus mf_madic_distance(const char *a, const char *b, double base, double *out);

// Agreement height of two m-adic points. `*equal` is set to 1 when the
// points coincide, in which case `*out` is left untouched.
//
// # Safety
// `a`, `b` must be valid C strings; `out`, `equal` valid pointers.
enum MfStatus mf_agreement_height(const char *a, const char *b, int64_t *out, int32_t *equal);

// # Safety
// `s` must be a live handle; `x`, `y` arrays of length `n`.
enum MfStatus mf_unit_height(const struct MfStructure *s,
                             const double *x,
                             const double *y,
                             size_t n,
                             double *out);

// # Safety
// `s` must be a live handle; `x`, `y` arrays of length `n`.
enum MfStatus mf_visual_distance(const struct MfStructure *s,
                                 const double *x,
                                 const double *y,
                                 size_t n,
                                 double *out);

// Tent distance between `(x, tx)` and `(y, ty)`.
//
// # Safety
// `s` must be a live handle; `x`, `y` arrays of length `n`.
enum MfStatus mf_tent_distance(const struct MfStructure *s,
                               const double *x,
                               double tx,
                               const double *y,
                               double ty,
                               size_t n,
                               double *out);

// Millefeuille distance between `(x, xi, tx)` and `(y, eta, ty)`.
//
// # Safety
// `s` must be a live handle; `x`, `y` arrays of length `n`; `xi`, `eta`
// valid C strings.
enum MfStatus mf_mille_distance(const struct MfStructure *s,
                                uint32_t m,
                                const double *x,
                                const char *xi,
                                double tx,
                                const double *y,
                                const char *eta,
                                double ty,
                                size_t n,
                                double *out);

// `max(D_M, m^{agreement height})` for boundary points given as JSON.
//
// # Safety
// `s` must be a live handle; `a`, `b` valid C strings.
enum MfStatus mf_dmax_formula(const struct MfStructure *s,
                              uint32_t m,
                              const char *a,
                              const char *b,
                              double *out);

// Visual distance on `R^n x Q_m`; the structure must be normalized
// (see [`mf_structure_normalize`]).
//
// # Safety
// `s` must be a live handle; `a`, `b` valid C strings.
enum MfStatus mf_boundary_visual(const struct MfStructure *s,
                                 uint32_t m,
                                 const char *a,
                                 const char *b,
                                 double *out);

// Quasi-isometry verdict as a JSON string; release with
// [`mf_string_free`]. `*verdict_code` receives 0 for equivalent, 1 for
// not equivalent and 2 for inconclusive.
//
// # Safety
// `s`, `sp` must be live handles; `json`, `verdict_code` valid pointers.
enum MfStatus mf_classify(const struct MfStructure *s,
                          uint64_t m,
                          const struct MfStructure *sp,
                          uint64_t mp,
                          int32_t *verdict_code,
                          char **json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MILLEFEUILLE_H */
