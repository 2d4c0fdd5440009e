#ifndef MODLAB_H
#define MODLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Result codes.
 */
typedef enum ModlabStatus {
  MODLAB_STATUS_OK = 0,
  MODLAB_STATUS_INVALID_ARGUMENT = 1,
  MODLAB_STATUS_NULL_POINTER = 2,
  MODLAB_STATUS_DISCONNECTED = 3,
  MODLAB_STATUS_SCALE_TOO_FINE = 4,
  MODLAB_STATUS_TOO_LARGE = 5,
  MODLAB_STATUS_DEGENERATE_CONTINUUM = 6,
  MODLAB_STATUS_NON_BIJECTIVE = 7,
  MODLAB_STATUS_SOLVE_FAILED = 8,
  MODLAB_STATUS_PARSE = 9,
  MODLAB_STATUS_IO = 10,
  MODLAB_STATUS_PANIC = 11,
} ModlabStatus;

/*
 Opaque graph handle.
 */
typedef struct ModlabGraph ModlabGraph;

/*
 Outcome of a modulus computation.
 */
typedef struct ModlabModulusSummary {
  double value;
  double dual_bound;
  double gap;
  double min_rho_length;
  size_t iterations;
  size_t active_paths;
  /*
   1 when the duality certificate met the tolerance.
   */
  int32_t converged;
  /*
   1 when the family has no curves.
   */
  int32_t vacuous;
} ModlabModulusSummary;

typedef struct ModlabAhlforsSummary {
  double q_hat;
  double c_hat;
  double r_min;
  double r_max;
  double residual;
} ModlabAhlforsSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next call into the library on the same thread.
 */
const char *modlab_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *modlab_version(void);

/*
 Parses a graph from the text format.

 # Safety
 `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum ModlabStatus modlab_graph_from_text(const char *text, struct ModlabGraph **out);

/*
 Loads a graph file.

 # Safety
 `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum ModlabStatus modlab_graph_load(const char *path, struct ModlabGraph **out);

/*
 Cubical grid with `side^dim` nodes and unit-free spacing `spacing`.

 # Safety
 `out` must be a writable pointer.
 */
enum ModlabStatus modlab_graph_grid(size_t dim,
                                    size_t side,
                                    double spacing,
                                    struct ModlabGraph **out);

/*
 Releases a graph. Null is ignored.

 # Safety
 `g` must come from a `modlab_graph_*` constructor and not be used again.
 */
void modlab_graph_free(struct ModlabGraph *g);

/*
 Node count, or 0 for a null handle.

 # Safety
 `g` must be null or a live handle.
 */
size_t modlab_graph_node_count(const struct ModlabGraph *g);

/*
 Edge count, or 0 for a null handle.

 # Safety
 `g` must be null or a live handle.
 */
size_t modlab_graph_edge_count(const struct ModlabGraph *g);

/*
 Shortest-path distance between two nodes.

 # Safety
 `g` must be a live handle and `out` writable.
 */
enum ModlabStatus modlab_graph_distance(const struct ModlabGraph *g,
                                        size_t a,
                                        size_t b,
                                        double *out);

/*
 p-modulus of the curves joining `e` to `f`, optionally inside `domain`
 (pass null and 0 for the whole graph). When `rho` is non-null it
 receives the extremal density, one value per edge; `rho_len` must then
 equal the edge count. An iteration limit is not an error: check
 `converged`.

 # Safety
 Arrays must hold the stated number of elements; `out` must be writable.
 */
enum ModlabStatus modlab_compute_modulus(const struct ModlabGraph *g,
                                         const size_t *e,
                                         size_t e_len,
                                         const size_t *f,
                                         size_t f_len,
                                         const size_t *domain,
                                         size_t domain_len,
                                         double p,
                                         double tol,
                                         size_t max_iter,
                                         struct ModlabModulusSummary *out,
                                         double *rho,
                                         size_t rho_len);

/*
 Ahlfors regularity fit over `n_radii` geometric radii in
 `[r_min, r_max]`, with balls centered at `samples`.

 # Safety
 `samples` must hold `n_samples` indices; `out` must be writable.
 */
enum ModlabStatus modlab_ahlfors_fit(const struct ModlabGraph *g,
                                     const size_t *samples,
                                     size_t n_samples,
                                     double r_min,
                                     double r_max,
                                     size_t n_radii,
                                     struct ModlabAhlforsSummary *out);

/*
 Annulus porosity test at `x` against `n_points` points of dimension
 `dim` stored row by row. `passed[k]` is set to 1 when no point lies in
 `[scales[k]/t, t·scales[k])` around `x`, else 0.

 # Safety
 `points` must hold `n_points·dim` values, `x` `dim` values, and
 `scales` and `passed` `n_scales` values each.
 */
enum ModlabStatus modlab_porosity_check(const double *points,
                                        size_t n_points,
                                        size_t dim,
                                        const double *x,
                                        double t,
                                        const double *scales,
                                        size_t n_scales,
                                        uint8_t *passed);

/*
 Poincare ratio of the node field `u` over the closed ball `B(center, r)`
 with gradient averaged on `B(center, tau·r)`. `grad` holds one value per
 edge; pass null to use the minimal upper gradient of `u`.

 # Safety
 `u` must hold one value per node, `grad` (when non-null) one per edge,
 and `out` must be writable.
 */
enum ModlabStatus modlab_poincare_ratio(const struct ModlabGraph *g,
                                        size_t center,
                                        double r,
                                        const double *u,
                                        size_t u_len,
                                        const double *grad,
                                        double p,
                                        double tau,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODLAB_H */
