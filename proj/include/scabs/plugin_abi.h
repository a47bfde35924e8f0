/* C interface of a system plugin (shared object loaded with dlopen).
 *
 * Required symbols:
 *   int  scabs_plugin_abi(void);        returns SCABS_PLUGIN_ABI
 *   int  scabs_plugin_state_dim(void);  n
 *   int  scabs_plugin_input_dim(void);  m, components of one input value
 *   void scabs_plugin_eval(const double* x, const double* u, double* out);
 *        out = G(x, u) for discrete systems, F(x, u) for sampled ones
 *   void scabs_plugin_jacobian(const double* x, const double* u, double* J);
 *        J = D1 of the above, n x n row-major
 * Optional:
 *   void scabs_plugin_hessian(const double* x, const double* u, double* H);
 *        H[i*n*n + j*n + k] = d2 out_i / dx_j dx_k (sampled systems)
 */
#ifndef SCABS_PLUGIN_ABI_H
#define SCABS_PLUGIN_ABI_H

#define SCABS_PLUGIN_ABI 1

#ifdef __cplusplus
extern "C" {
#endif

typedef int (*scabs_plugin_int_fn)(void);
typedef void (*scabs_plugin_eval_fn)(const double* x, const double* u, double* out);

#ifdef __cplusplus
}
#endif

#endif
