/* C interface to the measurement core, for foreign-function loaders. */
#ifndef POWERMETER_C_API_H
#define POWERMETER_C_API_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pm_session pm_session;

/* methods: comma-separated method specs ("synthetic,gh:/root"). Returns NULL
 * on failure; pm_last_error() then describes it. The session is running. */
pm_session* pm_session_start(const char* methods, long interval_ms);

/* Stops the session. Returns 0 on success, -1 on error (e.g. double stop). */
int pm_session_stop(pm_session* s);

/* Blocks until all methods are exhausted (replay) or timeout; 1 if exhausted. */
int pm_session_wait_exhausted(pm_session* s, long timeout_ms);

/* CSV renderings identical to the files the CLI exports. The returned
 * pointer stays valid until the session is freed. NULL before stop. */
const char* pm_session_power_csv(pm_session* s);
const char* pm_session_energy_csv(pm_session* s);

void pm_session_free(pm_session* s);

/* Message of the last failure on this thread, "" if none. */
const char* pm_last_error(void);

#ifdef __cplusplus
}
#endif

#endif
