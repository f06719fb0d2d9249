#pragma once

namespace ecm {

// Worker count used by the OpenMP kernels. Resolution order: explicit cap set
// via set_thread_cap, then the ECM_THREADS environment variable, then the
// OpenMP default. All kernels produce output independent of this value.
int thread_count();

// Override for tests; 0 restores environment-based resolution.
void set_thread_cap(int n);

}  // namespace ecm
