#ifndef CHP_H
#define CHP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum ChpStatus {
  CHP_STATUS_OK = 0,
  CHP_STATUS_NULL_ARGUMENT = 1,
  CHP_STATUS_INVALID_UTF8 = 2,
  CHP_STATUS_IO = 3,
  CHP_STATUS_SCHEMA = 4,
  CHP_STATUS_INVALID_INSTANCE = 5,
  CHP_STATUS_INFEASIBLE = 6,
  CHP_STATUS_SOLVER_FAILURE = 7,
  CHP_STATUS_UNSUPPORTED = 8,
  CHP_STATUS_OUT_OF_RANGE = 9,
  CHP_STATUS_PANIC = 10,
} ChpStatus;

// Pricing schemes.
typedef enum ChpMode {
  CHP_MODE_EXACT = 0,
  CHP_MODE_ACHP1 = 1,
  CHP_MODE_EXTENDED = 2,
  CHP_MODE_SINGLE_PERIOD = 3,
  CHP_MODE_LMP = 4,
} ChpMode;

// A validated market instance.
typedef struct ChpInstance ChpInstance;

// A settled pricing report.
typedef struct ChpReport ChpReport;

// Report totals.
typedef struct ChpTotals {
  double total_uplift;
  double v_d;
  double dual_obj;
  double gap_abs;
  double gap_rel;
} ChpTotals;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last error on this thread, or null. The string stays
// valid until the next failing call on the same thread.
const char *chp_last_error(void);

// Loads an instance document from `path`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum ChpStatus chp_instance_load(const char *path, struct ChpInstance **out);

// Parses an instance document from a JSON string.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum ChpStatus chp_instance_parse(const char *json, struct ChpInstance **out);

// Releases an instance; null is ignored.
//
// # Safety
// `inst` must come from this library and not be used afterwards.
void chp_instance_free(struct ChpInstance *inst);

// Periods of the instance.
//
// # Safety
// `inst` must be a live handle.
size_t chp_instance_horizon(const struct ChpInstance *inst);

// Commits the instance and prices it under `mode`, a [`ChpMode`]. With `qualified`
// nonzero, the hull model covers and pays the qualified units only.
// `mipgap` and `tol` of zero or less select the defaults.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum ChpStatus chp_price(const struct ChpInstance *inst,
                         int32_t mode,
                         bool qualified,
                         double mipgap,
                         double tol,
                         struct ChpReport **out);

// Releases a report; null is ignored.
//
// # Safety
// `report` must come from this library and not be used afterwards.
void chp_report_free(struct ChpReport *report);

// Number of buses priced by the report.
//
// # Safety
// `report` must be a live handle.
size_t chp_report_buses(const struct ChpReport *report);

// Number of units in the report.
//
// # Safety
// `report` must be a live handle.
size_t chp_report_units(const struct ChpReport *report);

// Price at 0-based `period` and `bus`.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum ChpStatus chp_report_price(const struct ChpReport *report,
                                size_t period,
                                size_t bus,
                                double *out);

// Uplift of the 0-based unit `unit`; zero for units not paid uplift.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum ChpStatus chp_report_uplift(const struct ChpReport *report, size_t unit, double *out);

// Totals of the report.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum ChpStatus chp_report_totals(const struct ChpReport *report, struct ChpTotals *out);

// The report as a JSON document, to be released with [`chp_string_free`].
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum ChpStatus chp_report_json(const struct ChpReport *report, char **out);

// Releases a string returned by this library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void chp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHP_H */
