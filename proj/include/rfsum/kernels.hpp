#pragma once

#include <cstddef>

// Dense numeric kernels behind the tensor ops. Every kernel has a serial
// reference implementation and an OpenMP-parallel one; the active mode is a
// process-wide switch. Parallel variants split work over output rows only,
// keeping each inner accumulation in the exact serial order, so both modes
// produce bit-identical results regardless of thread count.
namespace rfsum::kernels {

enum class Mode { Serial, Parallel };

Mode mode();
void set_mode(Mode m);
int thread_count();

// c[m x n] = a[m x k] * b[k x n]            (accumulate: c +=)
void mm_nn(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate = false);
// c[m x n] = a[m x k] * b[n x k]^T
void mm_nt(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate = false);
// c[m x n] = a[k x m]^T * b[k x n]
void mm_tn(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate = false);

void mm_nn_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool accumulate = false);
void mm_nt_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool accumulate = false);
void mm_tn_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool accumulate = false);

// Elementwise maps (y may alias x).
void vtanh(const double* x, double* y, int n);
void vsigmoid(const double* x, double* y, int n);
void vadd(const double* a, const double* b, double* y, int n);
void vmul(const double* a, const double* b, double* y, int n);
void vscale(const double* x, double c, double* y, int n);

void vtanh_serial(const double* x, double* y, int n);
void vsigmoid_serial(const double* x, double* y, int n);
void vadd_serial(const double* a, const double* b, double* y, int n);
void vmul_serial(const double* a, const double* b, double* y, int n);
void vscale_serial(const double* x, double c, double* y, int n);

double sigmoid_scalar(double x);

}  // namespace rfsum::kernels
