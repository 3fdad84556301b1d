#ifndef LEXDIV_LEXDIV_H
#define LEXDIV_LEXDIV_H

/* C interface to the lexdiv pipeline. Handles are opaque; functions return
   ldv_status unless noted, and ldv_last_error() describes the most recent
   failure on the calling thread. Strings returned through char** belong to
   the caller and are released with ldv_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(LEXDIV_BUILDING_LIBRARY)
#define LDV_API __attribute__((visibility("default")))
#else
#define LDV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  LDV_OK = 0,
  LDV_E_INVALID = 1,  /* bad argument or configuration */
  LDV_E_MISSING = 2,  /* required file or upstream artifact absent */
  LDV_E_PARSE = 3,
  LDV_E_IO = 4,
  LDV_E_STATE = 5,    /* e.g. repeat rating, incomplete session */
  LDV_E_RUNTIME = 6,
  LDV_E_NOT_FOUND = 7 /* unknown session */
} ldv_status;

/* Process exit codes returned by the run functions. */
enum { LDV_EXIT_OK = 0, LDV_EXIT_USAGE = 1, LDV_EXIT_MISSING = 2, LDV_EXIT_RUNTIME = 3 };

LDV_API const char* ldv_last_error(void);
LDV_API const char* ldv_version(void);
LDV_API void ldv_string_free(char* s);

typedef void (*ldv_log_fn)(const char* line, void* user);
/* Progress lines from the run functions; NULL restores stderr. */
LDV_API void ldv_set_log_callback(ldv_log_fn fn, void* user);

/* Configuration: defaults, then the file (path may be NULL), then
   overrides added with ldv_config_set. */
typedef struct ldv_config ldv_config;
LDV_API ldv_status ldv_config_load(const char* path, ldv_config** out);
LDV_API ldv_status ldv_config_set(ldv_config* cfg, const char* key, const char* value);
LDV_API ldv_status ldv_config_get(const ldv_config* cfg, const char* key, char** out);
LDV_API ldv_status ldv_config_emit(const ldv_config* cfg, char** out);
LDV_API void ldv_config_free(ldv_config* cfg);

/* Stage names, NULL-terminated. */
LDV_API const char* const* ldv_stages(void);
/* stage is a stage name or "all"; returns an LDV_EXIT_* code. */
LDV_API int ldv_run(const ldv_config* cfg, const char* stage);
/* Comma-separated lists; NULL or "" means every annotator / target. */
LDV_API int ldv_annotate_score(const ldv_config* cfg, const char* annotators);
LDV_API int ldv_annotate_agreement(const ldv_config* cfg, const char* annotators, const char* targets);
LDV_API int ldv_annotate_llm(const ldv_config* cfg);

/* Annotation HTTP server over <root>/<session>/. static_dir may be NULL. */
typedef struct ldv_server ldv_server;
LDV_API ldv_status ldv_server_new(const char* root, const char* static_dir, const char* host, int port,
                                  ldv_server** out);
LDV_API int ldv_server_port(const ldv_server* s);
LDV_API ldv_status ldv_server_run(ldv_server* s);   /* blocks until stopped */
LDV_API ldv_status ldv_server_start(ldv_server* s); /* background thread */
LDV_API void ldv_server_stop(ldv_server* s);
LDV_API void ldv_server_free(ldv_server* s);

/* Direct session access with the same JSON shapes as the HTTP API. */
typedef struct ldv_session ldv_session;
LDV_API ldv_status ldv_session_open(const char* dir, ldv_session** out);
LDV_API ldv_status ldv_session_next(ldv_session* s, const char* annotator, char** json_out);
LDV_API ldv_status ldv_session_rate(ldv_session* s, const char* pair_id, const char* annotator, int value);
LDV_API ldv_status ldv_session_scores_json(ldv_session* s, const char* annotators, char** json_out);
LDV_API void ldv_session_free(ldv_session* s);

/* Synthetic corpus with one planted homonym and twenty controls. */
LDV_API ldv_status ldv_make_fixture(const char* dir, uint64_t seed, size_t users_per_side, size_t tweets_per_side);

LDV_API ldv_status ldv_clean_text(const char* raw, char** out);

typedef struct ldv_sentiment ldv_sentiment;
/* NULL lexicon path: bundled lexicon. */
LDV_API ldv_status ldv_sentiment_new(const char* lexicon_path, const char* emoji_path, ldv_sentiment** out);
LDV_API ldv_status ldv_sentiment_score(const ldv_sentiment* s, const char* text, double* compound);
LDV_API void ldv_sentiment_free(ldv_sentiment* s);

LDV_API double ldv_log2_fold(double left_rate, double right_rate);

#ifdef __cplusplus
}
#endif

#endif
