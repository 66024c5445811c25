#ifndef TSSP_TSSP_H
#define TSSP_TSSP_H

#include <stddef.h>
#include <stdint.h>

#if defined(TSSP_BUILDING_LIBRARY)
#define TSSP_API __attribute__((visibility("default")))
#else
#define TSSP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tssp_status {
  TSSP_OK = 0,
  TSSP_ERR_DOMAIN,
  TSSP_ERR_INPUT,
  TSSP_ERR_CONVERGENCE,
  TSSP_ERR_DEGENERATE_SAMPLE,
  TSSP_ERR_INFEASIBLE_ALLOCATION,
  TSSP_ERR_ZERO_SEPARATION,
  TSSP_ERR_NULL_EVENT,
  TSSP_ERR_DEPENDENCE_OUT_OF_RANGE,
  TSSP_ERR_DEGENERATE_PAIRS,
  TSSP_ERR_INFEASIBLE_SPEC,
  TSSP_ERR_DEGENERATE_ESTIMATE,
  TSSP_ERR_TOO_MANY_FAILURES,
  TSSP_ERR_NULL_ARGUMENT,
  TSSP_ERR_INTERNAL
} tssp_status;

TSSP_API const char* tssp_version(void);
TSSP_API const char* tssp_status_name(tssp_status status);
/* Message of the last failing call on this thread; "" after a success. */
TSSP_API const char* tssp_last_error(void);

/* ---- samples ---------------------------------------------------------- */

typedef struct tssp_sample tssp_sample;

TSSP_API tssp_status tssp_sample_create(const double* values, size_t n, tssp_sample** out);
/* One value per line; blank lines, '#' comments and a leading header are skipped. */
TSSP_API tssp_status tssp_sample_load_csv(const char* path, tssp_sample** out);
TSSP_API void tssp_sample_destroy(tssp_sample* sample);
TSSP_API size_t tssp_sample_size(const tssp_sample* sample);
/* Mean and (m - 1)-denominator standard deviation. */
TSSP_API tssp_status tssp_sample_moments(const tssp_sample* sample, double* mean, double* stddev);

/* ---- standardized quantile estimators --------------------------------- */

typedef enum tssp_method {
  TSSP_METHOD_EMPIRICAL = 0,
  TSSP_METHOD_KDE_BCV,
  TSSP_METHOD_KDE_SJ,
  TSSP_METHOD_BD
} tssp_method;

TSSP_API tssp_status tssp_method_parse(const char* text, tssp_method* out);
TSSP_API const char* tssp_method_name(tssp_method method);

typedef struct tssp_estimator_options {
  double bandwidth;      /* > 0 fixes the KDE bandwidth, otherwise it is selected */
  int bd_degree;         /* > 0 fixes the polynomial degree, otherwise it is selected */
  int bd_has_support;    /* nonzero: use bd_support_lo / bd_support_hi */
  double bd_support_lo;
  double bd_support_hi;
  int bd_mode_budget;
} tssp_estimator_options;

TSSP_API void tssp_estimator_options_default(tssp_estimator_options* out);

typedef struct tssp_estimator tssp_estimator;

TSSP_API tssp_status tssp_estimator_create(const tssp_sample* sample, tssp_method method,
                                           const tssp_estimator_options* options,
                                           tssp_estimator** out);
/* Exact standard normal quantile, moments (0, 1). */
TSSP_API tssp_status tssp_estimator_normal_reference(tssp_estimator** out);
TSSP_API void tssp_estimator_destroy(tssp_estimator* estimator);
TSSP_API tssp_status tssp_estimator_evaluate(const tssp_estimator* estimator, double p,
                                             double* out);
TSSP_API tssp_status tssp_estimator_raw_quantile(const tssp_estimator* estimator, double p,
                                                 double* out);

typedef struct tssp_estimator_info {
  double mean;
  double stddev;
  int has_bandwidth;
  double bandwidth;
  int has_degree;
  int degree;
  int certified; /* -1 unknown */
} tssp_estimator_info;

TSSP_API tssp_status tssp_estimator_info_get(const tssp_estimator* estimator,
                                             tssp_estimator_info* out);

/* ---- risks and quality specification ---------------------------------- */

typedef struct tssp_risks {
  double alpha1, beta1;
  double alpha2, beta2;
  double alpha, beta; /* implied global pair */
} tssp_risks;

TSSP_API tssp_status tssp_allocate_risks(double alpha, double beta, double alpha1, int symmetric,
                                         tssp_risks* out);
TSSP_API tssp_status tssp_equal_split_risks(double alpha, double beta, tssp_risks* out);

typedef struct tssp_quality_spec {
  double aql, rql;
  double alpha, beta;
  double alpha1, beta1;
  double alpha2, beta2;
} tssp_quality_spec;

TSSP_API tssp_status tssp_quality_spec_from_risks(double aql, double rql, const tssp_risks* risks,
                                                  tssp_quality_spec* out);

typedef struct tssp_plan {
  double n;
  double c;
} tssp_plan;

typedef struct tssp_quadrature_config {
  double rel_tol;
  double abs_tol;
  double truncation_radius;
  int max_subdivisions;
} tssp_quadrature_config;

TSSP_API void tssp_quadrature_config_default(tssp_quadrature_config* out);

typedef struct tssp_solver_config {
  double epsilon;
  int grid_n_max;
  double grid_c_max;
  int refine_max_iter;
  int enforce_lambda;
} tssp_solver_config;

TSSP_API void tssp_solver_config_default(tssp_solver_config* out);

typedef enum tssp_dependence_kind {
  TSSP_DEP_INDEPENDENT = 0,
  TSSP_DEP_PANEL,
  TSSP_DEP_SPATIAL_BATCH
} tssp_dependence_kind;

typedef struct tssp_dependence {
  tssp_dependence_kind kind;
  double rho_hat;
  double lambda;
  size_t batch_size;
  double r1, r2;
  double sigma_b2;
  double sigma_eps2;
  double rho_cap;
} tssp_dependence;

TSSP_API void tssp_dependence_default(tssp_dependence* out);

/* ---- plans ------------------------------------------------------------ */

TSSP_API tssp_status tssp_stage1_plan(const tssp_quality_spec* spec,
                                      const tssp_estimator* estimator, tssp_plan* out);

typedef struct tssp_stage2_result {
  tssp_plan plan;
  tssp_plan grid_minimizer;
  double continuous_n, continuous_c;
  double grid_deviation;
  double refined_deviation;
  double final_deviation;
  int within_tolerance;
  double oc_aql, oc_rql;
  double rho;
} tssp_stage2_result;

/* solver and quad may be NULL for defaults. */
TSSP_API tssp_status tssp_stage2_plan(const tssp_quality_spec* spec, const tssp_plan* plan1,
                                      const tssp_estimator* estimator,
                                      const tssp_dependence* dep,
                                      const tssp_solver_config* solver,
                                      const tssp_quadrature_config* quad,
                                      tssp_stage2_result* out);

/* ---- operating characteristics ---------------------------------------- */

TSSP_API tssp_status tssp_oc1(double p, const tssp_plan* plan1, const tssp_estimator* estimator,
                              double* out);
TSSP_API tssp_status tssp_oc2_independent(double p, const tssp_plan* plan1,
                                          const tssp_plan* plan2,
                                          const tssp_estimator* estimator,
                                          const tssp_quadrature_config* quad, double* out);
TSSP_API tssp_status tssp_oc2_dependent(double p, const tssp_plan* plan1, const tssp_plan* plan2,
                                        const tssp_estimator* estimator, double rho,
                                        double rho_cap, const tssp_quadrature_config* quad,
                                        double* out);
TSSP_API tssp_status tssp_oc2(double p, const tssp_plan* plan1, const tssp_plan* plan2,
                              const tssp_estimator* estimator, const tssp_dependence* dep,
                              const tssp_quadrature_config* quad, double* out);
TSSP_API tssp_status tssp_overall_oc(double p, const tssp_plan* plan1, const tssp_plan* plan2,
                                     const tssp_estimator* estimator, const tssp_dependence* dep,
                                     const tssp_quadrature_config* quad, double* out);

typedef enum tssp_stage { TSSP_STAGE_1 = 1, TSSP_STAGE_2 = 2, TSSP_STAGE_OVERALL = 3 } tssp_stage;

typedef struct tssp_validity {
  double oc_at_aql, oc_at_rql;
  double producer_target, consumer_target;
  double producer_margin, consumer_margin;
  int producer_ok, consumer_ok;
} tssp_validity;

/* plan2 and dep are ignored for TSSP_STAGE_1. */
TSSP_API tssp_status tssp_validate_plan(const tssp_quality_spec* spec, tssp_stage stage,
                                        const tssp_plan* plan1, const tssp_plan* plan2,
                                        const tssp_estimator* estimator,
                                        const tssp_dependence* dep,
                                        const tssp_quadrature_config* quad, double slack,
                                        tssp_validity* out);

/* ---- dependence ------------------------------------------------------- */

/* sqrt(n1/n2) * correlation of the pairs; fails when |rho| >= rho_cap. */
TSSP_API tssp_status tssp_estimate_rho(const double* x1, const double* x2, size_t pairs,
                                       size_t n1, size_t n2, double rho_cap, double* out);
/* Pairs from a two-column file, scaled by sqrt(lambda) with lambda = n1/n2. */
TSSP_API tssp_status tssp_estimate_rho_csv(const char* path, double lambda, double rho_cap,
                                           double* out);
TSSP_API tssp_status tssp_spatial_batch_rho(size_t b, double r1, double r2, double sigma_b2,
                                            double sigma_eps2, double rho_cap,
                                            double* covariance, double* coefficient);
TSSP_API tssp_status tssp_round_batch(size_t n, size_t b, size_t* out);

/* ---- simulation ------------------------------------------------------- */

typedef enum tssp_scale_interp { TSSP_SCALE_VARIANCE = 0, TSSP_SCALE_STDDEV } tssp_scale_interp;

typedef struct tssp_sim_config {
  int model; /* 1..4 */
  tssp_scale_interp scale_interp;
  double d;
  size_t m;
  size_t reps;
  uint64_t seed;
  uint64_t stream_id;
  int exact_quantile; /* nonzero: bypass estimation with the model's true quantile */
  tssp_method method;
  unsigned threads; /* 0 = all cores */
} tssp_sim_config;

TSSP_API void tssp_sim_config_default(tssp_sim_config* out);

typedef struct tssp_sim_result {
  double e_n1, sd_n1, e_c1, sd_c1;
  double e_n2, sd_n2, e_c2, sd_c2;
  size_t reps;
  size_t failures;
} tssp_sim_result;

/* options, dep, solver and quad may be NULL for defaults. */
TSSP_API tssp_status tssp_simulate_plan_distribution(const tssp_sim_config* config,
                                                     const tssp_quality_spec* spec,
                                                     const tssp_estimator_options* options,
                                                     const tssp_dependence* dep,
                                                     const tssp_solver_config* solver,
                                                     const tssp_quadrature_config* quad,
                                                     tssp_sim_result* out);

typedef struct tssp_acceptance {
  double rate;
  double se;
  double stage1_rate;
} tssp_acceptance;

/* Lots from the configured model with tau at its true p-quantile; S_m is the model sd. */
TSSP_API tssp_status tssp_simulate_acceptance(const tssp_sim_config* config, double p,
                                              const tssp_plan* plan1, const tssp_plan* plan2,
                                              const tssp_dependence* dep, tssp_acceptance* out);

TSSP_API tssp_status tssp_mc_oc_oracle(double a, double b, double rho, size_t draws,
                                       uint64_t seed, uint64_t stream_id, double* value,
                                       double* se);

#ifdef __cplusplus
}
#endif

#endif
