#ifndef COMBRAMAN_H
#define COMBRAMAN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Error codes mirror the process exit codes of the CLI. */
typedef enum {
  CR_OK = 0,
  CR_ERR_CONFIG = 1, /* usage / configuration problems */
  CR_ERR_COMPUTE = 2 /* runtime computation failures   */
} cr_status;

typedef struct cr_session cr_session;

/* Creates a session bound to one configuration file. Returns NULL and
 * fills *err (when non-NULL) with a malloc'd message on failure. */
cr_session* cr_session_open(const char* config_path, char** err);

void cr_session_close(cr_session* session);

typedef struct {
  const char* out_dir;    /* NULL: use config / default        */
  const char* theta_scan; /* "start:stop:count" degrees or NULL */
  double theta_deg;       /* used when has_theta != 0          */
  int has_theta;
  uint64_t seed;          /* used when has_seed != 0           */
  int has_seed;
  int invert;             /* dynamics presentation flag        */
} cr_run_options;

/* Runs one subcommand (rabi, stark, magic-pol, bandwidth-scan, dynamics,
 * lineshape, fit, extrapolate, budget, phase-fit, pipeline). On success
 * *result_json receives a malloc'd JSON document; on failure *err (when
 * non-NULL) receives a malloc'd message. Free both with cr_string_free. */
cr_status cr_session_run(cr_session* session, const char* command,
                         const cr_run_options* options, char** result_json,
                         char** err);

void cr_string_free(char* s);

const char* cr_version(void);

#ifdef __cplusplus
}
#endif

#endif /* COMBRAMAN_H */
