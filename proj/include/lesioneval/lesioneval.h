/*
 * lesioneval.h - C interface to the lesion-wise segmentation evaluator.
 *
 * All objects are opaque handles created by a *_create / *_load / *_build
 * function and released with the matching *_destroy. Every fallible call
 * returns le_status; on failure a message is available from le_last_error()
 * on the same thread. Strings returned through char** are heap-allocated and
 * must be released with le_string_free(). Handles are immutable after
 * creation (except le_config setters) and may be shared between threads.
 */
#ifndef LESIONEVAL_H
#define LESIONEVAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LESIONEVAL_BUILDING_LIBRARY)
#    define LE_API __declspec(dllexport)
#  else
#    define LE_API __declspec(dllimport)
#  endif
#else
#  define LE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum le_status {
  LE_OK = 0,
  LE_ERR_INVALID_ARGUMENT = 1,
  LE_ERR_IO = 2,
  LE_ERR_FORMAT = 3,
  LE_ERR_UNSUPPORTED_SHAPE = 4,
  LE_ERR_LABEL_DOMAIN = 5,
  LE_ERR_GEOMETRY = 6,
  LE_ERR_EMPTY_MASK = 7,
  LE_ERR_ARITY = 8,
  LE_ERR_MISSING_TEAM = 9,
  LE_ERR_COVERAGE = 10,
  LE_ERR_DEGENERATE = 11,
  LE_ERR_WINDOW = 12,
  LE_ERR_EMPTY_INPUT = 13,
  LE_ERR_PLACEMENT = 14,
  LE_ERR_OUT_OF_RANGE = 15,
  LE_ERR_INTERNAL = 99
} le_status;

typedef enum le_region { LE_REGION_ET = 0, LE_REGION_TC = 1, LE_REGION_WT = 2 } le_region;
typedef enum le_metric { LE_METRIC_DICE = 0, LE_METRIC_HD95 = 1 } le_metric;
typedef enum le_lesion_parent { LE_PARENT_REGION = 0, LE_PARENT_WT = 1 } le_lesion_parent;
typedef enum le_rank_mode { LE_RANK_AGGREGATE = 0, LE_RANK_PER_CASE = 1 } le_rank_mode;
typedef enum le_volume_kind { LE_VOLUME_LABELS = 0, LE_VOLUME_INTENSITY = 1 } le_volume_kind;

typedef struct le_volume le_volume;
typedef struct le_config le_config;
typedef struct le_case_result le_case_result;
typedef struct le_ranking le_ranking;
typedef struct le_phantom le_phantom;

/* ---- library ---------------------------------------------------------- */

LE_API const char *le_version(void);
LE_API const char *le_status_string(le_status status);
LE_API const char *le_last_error(void);
LE_API void le_string_free(char *s);

/* Receives non-fatal diagnostics. Pass NULL to silence them. */
typedef void (*le_warning_fn)(const char *message, void *user);
LE_API void le_set_warning_callback(le_warning_fn fn, void *user);

/* ---- configuration ---------------------------------------------------- */

/* Defaults: labels E=3 N=1 S=2, dice penalty 0, hd penalty 374 mm, minimum
 * lesion size 50 voxels, percentile 0.95, filtered lesions excluded from
 * global metrics, whole-grid per-lesion metrics, per-region lesions. */
LE_API le_status le_config_create(le_config **out);
LE_API void le_config_destroy(le_config *cfg);
LE_API le_status le_config_set_label_map(le_config *cfg, int32_t enhancing,
                                         int32_t nonenhancing, int32_t snfh);
LE_API le_status le_config_set_dice_penalty(le_config *cfg, double value);
LE_API le_status le_config_set_hd_penalty(le_config *cfg, double mm);
LE_API le_status le_config_set_hd_percentile(le_config *cfg, double q);
LE_API le_status le_config_set_min_lesion_voxels(le_config *cfg, size_t n);
LE_API le_status le_config_set_exclude_filtered_from_global(le_config *cfg, int on);
LE_API le_status le_config_set_roi_restricted(le_config *cfg, int on);
/* `parent` is an le_lesion_parent value; anything else is LE_ERR_INVALID_ARGUMENT. */
LE_API le_status le_config_set_lesion_parent(le_config *cfg, int parent);
/* JSON object echoing every setting, for report metadata. */
LE_API le_status le_config_describe_json(const le_config *cfg, char **json);

/* ---- volumes ---------------------------------------------------------- */

LE_API le_status le_volume_load_labels(const char *path, le_volume **out);
LE_API le_status le_volume_load_intensity(const char *path, le_volume **out);
LE_API le_status le_volume_create_labels(const size_t dims[3], const double spacing[3],
                                         const int32_t *data, le_volume **out);
LE_API le_status le_volume_write(const le_volume *v, const char *path);
LE_API void le_volume_destroy(le_volume *v);
LE_API le_volume_kind le_volume_get_kind(const le_volume *v);
LE_API le_status le_volume_geometry(const le_volume *v, size_t dims[3], double spacing[3]);
/* Copies label codes (x fastest) into `out`, which holds `n` entries. */
LE_API le_status le_volume_copy_labels(const le_volume *v, int32_t *out, size_t n);

/* ---- case evaluation -------------------------------------------------- */

typedef struct le_region_metrics {
  double lesionwise_dice;
  double lesionwise_hd95;
  double global_dice;
  double global_hd95;
  double sensitivity; /* valid only if has_sensitivity */
  int has_sensitivity;
  size_t tp, fn, fp;
  size_t ignored;          /* predicted components touching only excluded lesions */
  size_t lesion_count;     /* retained ground-truth lesions */
  size_t excluded_count;   /* lesions below the size threshold */
  size_t gt_region_voxels; /* full region mask */
  size_t gt_voxels;        /* retained lesion voxels */
  size_t pred_voxels;
  double gt_volume_mm3;
} le_region_metrics;

typedef struct le_lesion_metrics {
  uint32_t gt_lesion;
  double dice;
  double hd95;
  size_t gt_voxels;
  size_t pred_voxels;
  int detected;
} le_lesion_metrics;

/* `pred` may be NULL for a missing prediction, scored as all background. */
LE_API le_status le_evaluate_case(const le_volume *gt, const le_volume *pred,
                                  const le_config *cfg, le_case_result **out);
LE_API void le_case_result_destroy(le_case_result *r);
LE_API le_status le_case_result_region(const le_case_result *r, le_region region,
                                       le_region_metrics *out);
LE_API le_status le_case_result_lesion(const le_case_result *r, le_region region,
                                       size_t index, le_lesion_metrics *out);
LE_API le_status le_case_result_excluded(const le_case_result *r, le_region region,
                                         size_t index, uint32_t *lesion_id,
                                         size_t *voxels);

/* ---- ranking ---------------------------------------------------------- */

typedef struct le_team_record {
  const char *team;
  const char *case_id;
  le_region region;
  double lesionwise_dice;
  double lesionwise_hd95;
} le_team_record;

#define LE_RANK_COLUMNS 6

typedef struct le_standing {
  const char *team; /* owned by the ranking handle */
  double aggregates[LE_RANK_COLUMNS];
  double ranks[LE_RANK_COLUMNS];
  double score;
  int tied;
} le_standing;

/* Column c in 0..5: ET_DSC, TC_DSC, WT_DSC, ET_HD95, TC_HD95, WT_HD95. */
LE_API const char *le_rank_column_name(size_t column);
LE_API le_status le_ranking_build(const le_team_record *records, size_t n,
                                  le_rank_mode mode, le_ranking **out);
/* aggregates holds n_teams rows of LE_RANK_COLUMNS values. */
LE_API le_status le_ranking_from_aggregates(const char *const *teams,
                                            const double *aggregates,
                                            size_t n_teams, le_ranking **out);
LE_API void le_ranking_destroy(le_ranking *r);
LE_API size_t le_ranking_team_count(const le_ranking *r);
LE_API le_status le_ranking_standing(const le_ranking *r, size_t position,
                                     le_standing *out);
LE_API le_status le_rank_metric(const double *values, size_t n, le_metric metric,
                                double *ranks);
LE_API le_status le_segmentation_score(const double *ranks, size_t n, double *out);

/* ---- statistics ------------------------------------------------------- */

typedef struct le_summary {
  size_t n;
  double mean;
  double std; /* valid only if has_std (n >= 2) */
  int has_std;
  double median, q1, q3, min, max;
} le_summary;

typedef struct le_correlation {
  double r;
  double r_squared;
  double p_value;
  size_t n;
} le_correlation;

LE_API le_status le_summarize(const double *values, size_t n, le_summary *out);
LE_API const char *le_quartile_method(void);
LE_API size_t le_default_window(size_t n);
/* Writes n - window + 1 points into out_volume / out_metric. */
LE_API le_status le_sliding_window(const double *volume, const double *metric,
                                   size_t n, size_t window, double *out_volume,
                                   double *out_metric);
LE_API le_status le_pearson(const double *x, const double *y, size_t n,
                            le_correlation *out);
/* Per-team, per-region, per-metric case values as JSON. */
LE_API le_status le_distribution_export_json(const le_team_record *records,
                                             size_t n, char **json);

/* ---- brain-edge abutment ---------------------------------------------- */

typedef struct le_abutment {
  size_t abutting_voxels;
  size_t abutting_enhancing;
  size_t abutting_nonenhancing;
  size_t abutting_snfh;
  size_t wt_voxels;
  double wt_volume_mm3;
} le_abutment;

typedef struct le_abutment_summary {
  size_t cases;
  size_t cases_with_abutment;
  double fraction;
  double mean;   /* valid only if has_mean */
  double median; /* valid only if has_mean */
  int has_mean;
} le_abutment_summary;

/* The brain mask is the union of the nonzero voxels of all channels.
 * adjacency is 6 or 26; labels come from cfg. */
LE_API le_status le_count_abutting(const le_volume *tumor,
                                   const le_volume *const *channels,
                                   size_t n_channels, const le_config *cfg,
                                   int adjacency, le_abutment *out);
LE_API le_status le_abutment_summarize(const le_abutment *reports, size_t n,
                                       le_abutment_summary *out);
/* log_volume != 0 correlates against log10 of WT volume in mm^3. */
LE_API le_status le_abutment_correlate(const le_abutment *reports, size_t n,
                                       int log_volume, le_correlation *out);

/* ---- phantoms --------------------------------------------------------- */

/* spec_json keys (all optional): dims [x,y,z], spacing [x,y,z],
 * lesions [min,max], radius [min,max], composition [e,n,s],
 * calcified_probability, brain_center [..], brain_semi_axes [..],
 * label_map [E,N,S], seed, max_attempts. */
LE_API le_status le_phantom_generate(const char *spec_json, le_phantom **out);
LE_API void le_phantom_destroy(le_phantom *p);
LE_API size_t le_phantom_lesion_count(const le_phantom *p);
LE_API le_status le_phantom_labels(const le_phantom *p, le_volume **out);
LE_API le_status le_phantom_brain(const le_phantom *p, le_volume **out);
/* Lesion centres, radii and calcified flags as JSON. */
LE_API le_status le_phantom_describe_json(const le_phantom *p, char **json);
/* Steps such as "drop:0", "fp:3", "dilate:1", "erode:1", "translate:1,0,0".
 * provenance_json may be NULL. */
LE_API le_status le_phantom_perturb(const le_phantom *p, const char *const *steps,
                                    size_t n_steps, uint64_t seed, le_volume **out,
                                    char **provenance_json);

#ifdef __cplusplus
}
#endif

#endif /* LESIONEVAL_H */
