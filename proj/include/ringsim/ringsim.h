/* C interface to the ring-road simulator. All functions are safe to call
 * concurrently on distinct handles. Error details for the calling thread are
 * available from ringsim_last_error(). */
#ifndef RINGSIM_RINGSIM_H
#define RINGSIM_RINGSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RINGSIM_BUILDING)
#    define RINGSIM_API __declspec(dllexport)
#  else
#    define RINGSIM_API __declspec(dllimport)
#  endif
#else
#  define RINGSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum ringsim_status {
  RINGSIM_OK = 0,
  RINGSIM_ERR_IO = 1,
  RINGSIM_ERR_CONFIG = 2,
  RINGSIM_ERR_COLLISION = 3,
  RINGSIM_ERR_SOLVER = 4,
  RINGSIM_ERR_INVALID_ARGUMENT = 5,
  RINGSIM_ERR_NOT_EXECUTED = 6,
  RINGSIM_ERR_INTERNAL = 7
} ringsim_status;

typedef struct ringsim_run ringsim_run;

typedef struct ringsim_summary {
  int outcome;             /* RINGSIM_OK, RINGSIM_ERR_COLLISION or RINGSIM_ERR_SOLVER */
  int has_lyapunov;        /* 0 when the series was too short */
  int lyapunov_degenerate;
  double lambda_max;       /* 1/s */
  size_t embed_dim;
  size_t lag;              /* samples */
  double max_density;      /* cars/m */
  double median_density;   /* cars/m */
  double min_gap;          /* m */
  size_t stop_count;
  double first_stop_time;  /* s; negative when no vehicle stopped */
  double final_v_std;      /* m/s, max over the last 100 s */
  double t_final;          /* s */
  size_t samples;
  size_t vehicles;
  size_t accepted_steps;
} ringsim_summary;

RINGSIM_API const char* ringsim_version(void);
RINGSIM_API const char* ringsim_status_string(ringsim_status status);
/* Message for the most recent failure on this thread ("" if none). */
RINGSIM_API const char* ringsim_last_error(void);

/* preset: "idm", "idm_delayed", "mixed" or "mixed_delayed". */
RINGSIM_API ringsim_status ringsim_run_create_preset(const char* preset,
                                                     ringsim_run** out);
RINGSIM_API ringsim_status ringsim_run_create_from_json(const char* json,
                                                        ringsim_run** out);
RINGSIM_API ringsim_status ringsim_run_create_from_file(const char* path,
                                                        ringsim_run** out);
RINGSIM_API void ringsim_run_destroy(ringsim_run* run);

RINGSIM_API ringsim_status ringsim_run_set_seed(ringsim_run* run, uint64_t seed);
RINGSIM_API ringsim_status ringsim_run_set_tolerances(ringsim_run* run,
                                                      double rel_tol,
                                                      double abs_tol);
RINGSIM_API ringsim_status ringsim_run_set_duration(ringsim_run* run, double t_end);

/* Integrates and analyzes. Returns RINGSIM_ERR_COLLISION or
 * RINGSIM_ERR_SOLVER for runs that ended early; results remain available. */
RINGSIM_API ringsim_status ringsim_run_execute(ringsim_run* run);

RINGSIM_API ringsim_status ringsim_run_summary(const ringsim_run* run,
                                               ringsim_summary* out);
/* Number of stop onsets strictly after time t. */
RINGSIM_API ringsim_status ringsim_run_stops_after(const ringsim_run* run,
                                                   double t, size_t* out);

/* Copies the NUL-terminated manifest JSON into buf when capacity allows;
 * *needed always receives the required size including the terminator. */
RINGSIM_API ringsim_status ringsim_run_manifest(const ringsim_run* run, char* buf,
                                                size_t capacity, size_t* needed);

RINGSIM_API ringsim_status ringsim_run_write_artifacts(const ringsim_run* run,
                                                       const char* dir);

/* Runs a comma-separated preset list concurrently with a shared seed and
 * tolerances (non-positive tolerances keep the defaults). Per-run artifacts
 * go to out_dir/<index>_<preset>/ and the table to out_dir/compare.csv unless
 * out_dir is NULL. *table receives the CSV table; release it with
 * ringsim_string_free. Returns RINGSIM_ERR_SOLVER if any member failed to
 * run; the table then carries failure markers. */
RINGSIM_API ringsim_status ringsim_compare_presets(const char* presets,
                                                   uint64_t seed, double rel_tol,
                                                   double abs_tol,
                                                   const char* out_dir,
                                                   char** table);
RINGSIM_API void ringsim_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* RINGSIM_RINGSIM_H */
