/*
 * C interface to the padme library.
 *
 * Every function returns a padme_status. On failure, padme_last_error()
 * returns a message for the calling thread that stays valid until the next
 * call into the library from that thread. Handles are opaque and must be
 * released with their matching *_free function.
 */
#ifndef PADME_PADME_H
#define PADME_PADME_H

#include <stddef.h>
#include <stdint.h>

#if defined(PADME_BUILDING_LIBRARY)
#define PADME_API __attribute__((visibility("default")))
#else
#define PADME_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum padme_status {
  PADME_OK = 0,
  PADME_ERR_INVALID_ARGUMENT = 1,
  PADME_ERR_PARSE = 2,   /* SMILES syntax */
  PADME_ERR_IO = 3,
  PADME_ERR_DATA = 4,    /* input violates a data contract */
  PADME_ERR_NUMERIC = 5, /* divergence, non-finite values */
  PADME_ERR_FORMAT = 6,  /* undecodable artifact */
  PADME_ERR_CONFIG = 7,
  PADME_ERR_INTERNAL = 8
} padme_status;

typedef enum padme_log_level {
  PADME_LOG_DEBUG = 0,
  PADME_LOG_INFO = 1,
  PADME_LOG_WARN = 2,
  PADME_LOG_ERROR = 3
} padme_log_level;

typedef void (*padme_log_fn)(padme_log_level level, const char* message, void* user);

PADME_API const char* padme_version(void);
PADME_API const char* padme_last_error(void);
PADME_API const char* padme_status_name(padme_status status);
/* NULL callback silences logging. The default writes to stderr. */
PADME_API void padme_set_log_callback(padme_log_fn fn, void* user);

/* Molecules */
typedef struct padme_molecule padme_molecule;

/* error_offset, if not NULL, receives the character offset of a parse error. */
PADME_API padme_status padme_molecule_parse(const char* smiles, padme_molecule** out, size_t* error_offset);
PADME_API void padme_molecule_free(padme_molecule* mol);
PADME_API padme_status padme_molecule_atom_count(const padme_molecule* mol, size_t* out);
PADME_API padme_status padme_molecule_bond_count(const padme_molecule* mol, size_t* out);
/* Writes n_bits/8 bytes; bit i is (bytes[i/8] >> (i%8)) & 1. */
PADME_API padme_status padme_molecule_ecfp(const padme_molecule* mol, uint32_t radius, uint32_t n_bits,
                                           uint8_t* bytes, size_t n_bytes);
PADME_API padme_status padme_tanimoto(const uint8_t* a, const uint8_t* b, size_t n_bytes, double* out);

/* Protein descriptor; out must hold padme_psc_width() doubles. */
PADME_API size_t padme_psc_width(void);
PADME_API padme_status padme_psc(const char* sequence, int phosphorylated, double* out, size_t n_out);

/* Run configuration */
typedef struct padme_config padme_config;

PADME_API padme_status padme_config_create(padme_config** out);
PADME_API padme_status padme_config_load(const char* path, padme_config** out);
PADME_API padme_status padme_config_parse(const char* text, padme_config** out);
PADME_API void padme_config_free(padme_config* cfg);
PADME_API padme_status padme_config_set(padme_config* cfg, const char* key, const char* value);
/* Copies the value with a terminating NUL; *needed receives the full size. */
PADME_API padme_status padme_config_get(const padme_config* cfg, const char* key, char* buf, size_t size,
                                        size_t* needed);
PADME_API padme_status padme_config_write(const padme_config* cfg, const char* path);

/* Trained models */
typedef struct padme_model padme_model;

PADME_API padme_status padme_model_load(const char* checkpoint, padme_model** out);
PADME_API void padme_model_free(padme_model* model);
PADME_API padme_status padme_model_task_count(const padme_model* model, size_t* out);
/* Predicts all tasks for one pair; out holds task_count doubles. The protein
 * sequence is used by proteochemometric variants; compound-only variants look
 * the protein up by id. */
PADME_API padme_status padme_model_predict(const padme_model* model, const char* smiles, const char* protein_id,
                                           const char* sequence, int phosphorylated, double* out, size_t n_out);

/* Pipeline. Paths are files or directories as named. */
PADME_API padme_status padme_featurize(const padme_config* cfg, const char* data_dir, const char* out_dir);
/* scheme: warm, cold-drug, cold-target, cold-cluster or random. The fold file
 * path is copied into path_buf when it is not NULL. */
PADME_API padme_status padme_split(const padme_config* cfg, const char* data_dir, const char* out_dir,
                                   const char* scheme, size_t k, uint64_t seed, char* path_buf, size_t path_size);
PADME_API padme_status padme_train(const padme_config* cfg, const char* data_dir, const char* out_dir);
/* sequences may be NULL for compound-only models; ad_from may be NULL. */
PADME_API padme_status padme_predict(const char* checkpoint, const char* input, const char* output,
                                     const char* sequences, const char* ad_from);
/* Writes a CSV report and, if table is not NULL, a readable summary. */
PADME_API padme_status padme_evaluate(const char* predictions, const char* report, char* table, size_t table_size);
PADME_API padme_status padme_cv(const padme_config* cfg, const char* data_dir, const char* out_dir);
PADME_API padme_status padme_tune(const padme_config* cfg, const char* data_dir, const char* out_dir,
                                  const char* space_file);
/* *passed is 1 when every stage succeeded. */
PADME_API padme_status padme_smoke(const char* data_dir, const char* out_dir, uint64_t seed, int* passed);

#ifdef __cplusplus
}
#endif

#endif
