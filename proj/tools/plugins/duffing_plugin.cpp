// Damped Duffing oscillator x1' = x2, x2' = -x1 - d x2 - k x1^3 + u.
#include "scabs/plugin_abi.h"

namespace {
constexpr double kD = 0.5;
constexpr double kK = 0.2;
}  // namespace

extern "C" {

int scabs_plugin_abi(void) { return SCABS_PLUGIN_ABI; }
int scabs_plugin_state_dim(void) { return 2; }
int scabs_plugin_input_dim(void) { return 1; }

void scabs_plugin_eval(const double* x, const double* u, double* out) {
  out[0] = x[1];
  out[1] = -x[0] - kD * x[1] - kK * x[0] * x[0] * x[0] + u[0];
}

void scabs_plugin_jacobian(const double* x, const double*, double* J) {
  J[0] = 0.0;
  J[1] = 1.0;
  J[2] = -1.0 - 3.0 * kK * x[0] * x[0];
  J[3] = -kD;
}

void scabs_plugin_hessian(const double* x, const double*, double* H) {
  for (int i = 0; i < 8; ++i) H[i] = 0.0;
  H[4] = -6.0 * kK * x[0];
}

}
