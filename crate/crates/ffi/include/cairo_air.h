#ifndef CAIRO_AIR_H
#define CAIRO_AIR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every FFI call.
 */
typedef enum CairoAirStatus {
  CAIRO_AIR_STATUS_OK = 0,
  /**
   * Null pointer, non UTF-8 string or unknown name.
   */
  CAIRO_AIR_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed JSON or field element.
   */
  CAIRO_AIR_STATUS_PARSE = 2,
  /**
   * The machine could not execute the program.
   */
  CAIRO_AIR_STATUS_EXECUTION = 3,
  /**
   * Columns satisfy every constraint but extraction or re-validation failed.
   */
  CAIRO_AIR_STATUS_CONSISTENCY = 4,
  /**
   * Constraint violations or a challenge mismatch.
   */
  CAIRO_AIR_STATUS_VERIFICATION = 5,
  /**
   * Column shapes do not match the statement.
   */
  CAIRO_AIR_STATUS_FORMAT = 6,
  /**
   * A panic was caught at the boundary.
   */
  CAIRO_AIR_STATUS_PANIC = 7,
} CairoAirStatus;

/**
 * A loaded program: memory, initial registers and public memory.
 */
typedef struct CairoAirProgram CairoAirProgram;

/**
 * A public statement with its column set.
 */
typedef struct CairoAirProof CairoAirProof;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *cairo_air_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void cairo_air_string_free(char *s);

/**
 * Parses a program file. `modulus` is `goldilocks`, `cairo`, a decimal
 * prime, or null for goldilocks.
 *
 * # Safety
 * Pointers must be null or valid; `out` receives a handle to free with
 * `cairo_air_program_free`.
 */
enum CairoAirStatus cairo_air_program_from_json(const char *program_json,
                                                const char *modulus_name,
                                                struct CairoAirProgram **out);

/**
 * One of the built-in sample programs.
 *
 * # Safety
 * As for `cairo_air_program_from_json`.
 */
enum CairoAirStatus cairo_air_program_corpus(const char *name,
                                             const char *modulus_name,
                                             struct CairoAirProgram **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, not yet freed.
 */
void cairo_air_program_free(struct CairoAirProgram *p);

/**
 * Serializes the program back to its file format.
 *
 * # Safety
 * `program` must be a live handle; `out` receives a string to free.
 */
enum CairoAirStatus cairo_air_program_to_json(const struct CairoAirProgram *program, char **out);

/**
 * Executes `steps` steps (negative: until the final self-jump) and writes
 * the register trace as JSON.
 *
 * # Safety
 * `program` must be a live handle; `out` receives a string to free.
 */
enum CairoAirStatus cairo_air_program_run(const struct CairoAirProgram *program,
                                          int64_t steps_or_negative,
                                          char **out);

/**
 * Runs, pads and builds the statement and column set.
 *
 * # Safety
 * `program` must be a live handle; `out` receives a handle to free with
 * `cairo_air_proof_free`.
 */
enum CairoAirStatus cairo_air_prove(const struct CairoAirProgram *program,
                                    int64_t steps_or_negative,
                                    struct CairoAirProof **out);

/**
 * Loads a statement and column set from their JSON files.
 *
 * # Safety
 * As for `cairo_air_prove`.
 */
enum CairoAirStatus cairo_air_proof_from_json(const char *statement_json,
                                              const char *columns_json,
                                              struct CairoAirProof **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, not yet freed.
 */
void cairo_air_proof_free(struct CairoAirProof *p);

/**
 * # Safety
 * `proof` must be a live handle; `out` receives a string to free.
 */
enum CairoAirStatus cairo_air_proof_statement_json(const struct CairoAirProof *proof, char **out);

/**
 * # Safety
 * `proof` must be a live handle; `out` receives a string to free.
 */
enum CairoAirStatus cairo_air_proof_columns_json(const struct CairoAirProof *proof, char **out);

/**
 * Re-derives the challenges and evaluates every constraint. Returns `Ok`
 * when accepted and `Verification` otherwise. `violations`, if not null,
 * receives the number of violated constraint instances.
 *
 * # Safety
 * `proof` must be a live handle; `violations` null or writable.
 */
enum CairoAirStatus cairo_air_proof_verify(const struct CairoAirProof *proof, uint64_t *violations);

/**
 * Reconstructs memory and the register trace and writes them as JSON.
 *
 * # Safety
 * `proof` must be a live handle; `out` receives a string to free.
 */
enum CairoAirStatus cairo_air_proof_extract(const struct CairoAirProof *proof, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAIRO_AIR_H */
