/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef RESIDUA_H
#define RESIDUA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Which files [`residua_specialization_write`] produces.
#define RESIDUA_EMIT_PROGRAM 1

#define RESIDUA_EMIT_JSON 2

#define RESIDUA_EMIT_HTML 4

// Result code of every call.
enum ResiduaStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  RESIDUA_STATUS_OK = 0,
  RESIDUA_STATUS_NULL_ARGUMENT = 1,
  RESIDUA_STATUS_INVALID_UTF8 = 2,
  RESIDUA_STATUS_IO = 3,
  RESIDUA_STATUS_SYNTAX = 4,
  RESIDUA_STATUS_CONSTRAINT = 5,
  RESIDUA_STATUS_POLICY = 6,
  RESIDUA_STATUS_SPECIALIZE = 7,
  // The residual disagreed with the original under differential testing.
  RESIDUA_STATUS_VERIFICATION_FAILED = 8,
  RESIDUA_STATUS_PANIC = 99,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum ResiduaStatus ResiduaStatus;
#else
typedef int32_t ResiduaStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Parsed constraint file.
typedef struct ResiduaConstraints ResiduaConstraints;

// Parsed source program.
typedef struct ResiduaProgram ResiduaProgram;

// A finished specialization together with the program it came from.
typedef struct ResiduaSpecialization ResiduaSpecialization;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next call into the library on the same thread.
const char *residua_last_error(void);

// Library version as a static string.
const char *residua_version(void);

// Releases a string returned by the library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void residua_string_free(char *s);

// Parses `n` in-memory source files.
//
// # Safety
// `names` and `texts` must point to `n` valid NUL-terminated strings.
ResiduaStatus residua_program_parse(const char *const *names,
                                    const char *const *texts,
                                    size_t n,
                                    struct ResiduaProgram **out);

// Loads source files; directories expand to their `.f` files.
//
// # Safety
// `paths` must point to `n` valid NUL-terminated strings.
ResiduaStatus residua_program_load(const char *const *paths, size_t n, struct ResiduaProgram **out);

// # Safety
// `p` must be NULL or a handle from this library not yet freed.
void residua_program_free(struct ResiduaProgram *p);

// Parses constraint text (`GLOBAL:` / `UNIT name:` sections).
//
// # Safety
// `text` must be a valid NUL-terminated string.
ResiduaStatus residua_constraints_parse(const char *text, struct ResiduaConstraints **out);

// Reads and parses a constraint file.
//
// # Safety
// `path` must be a valid NUL-terminated string.
ResiduaStatus residua_constraints_load(const char *path, struct ResiduaConstraints **out);

// # Safety
// `c` must be NULL or a handle from this library not yet freed.
void residua_constraints_free(struct ResiduaConstraints *c);

// Specializes `program`. `constraints` may be NULL (no bindings);
// `policy` is `all`, `none` or `keep:<file>` (NULL means `all`);
// `variant_cap` 0 selects the default.
//
// # Safety
// Handles must be live; `policy` NULL or a valid NUL-terminated string.
ResiduaStatus residua_specialize(const struct ResiduaProgram *program,
                                 const struct ResiduaConstraints *constraints,
                                 const char *policy,
                                 size_t variant_cap,
                                 struct ResiduaSpecialization **out);

// # Safety
// `s` must be NULL or a handle from this library not yet freed.
void residua_specialization_free(struct ResiduaSpecialization *s);

// The report as JSON. Free the result with [`residua_string_free`].
//
// # Safety
// `s` must be a live handle.
ResiduaStatus residua_specialization_report_json(const struct ResiduaSpecialization *s, char **out);

// All residual source files concatenated in file-name order. Free the
// result with [`residua_string_free`].
//
// # Safety
// `s` must be a live handle.
ResiduaStatus residua_specialization_source(const struct ResiduaSpecialization *s, char **out);

// Differential test of the residual against the original. Returns
// `VerificationFailed` (with the counterexample as the error message)
// when they disagree.
//
// # Safety
// `s` must be a live handle.
ResiduaStatus residua_specialization_verify(const struct ResiduaSpecialization *s,
                                            size_t trials,
                                            uint64_t seed);

// Writes the selected outputs (`RESIDUA_EMIT_*` flags) under `dir`.
//
// # Safety
// `s` must be a live handle; `dir` a valid NUL-terminated string.
ResiduaStatus residua_specialization_write(const struct ResiduaSpecialization *s,
                                           const char *dir,
                                           uint32_t what);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESIDUA_H */
