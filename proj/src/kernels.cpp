#include "rfsum/kernels.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rfsum::kernels {

namespace {

std::atomic<Mode> g_mode{Mode::Parallel};

// Row counts below this are not worth a parallel region.
constexpr int kMinParallelRows = 32;
constexpr long long kMinParallelWork = 16 * 1024;

inline bool go_parallel(int rows, long long work) {
#ifdef _OPENMP
  return g_mode.load(std::memory_order_relaxed) == Mode::Parallel &&
         rows >= kMinParallelRows && work >= kMinParallelWork;
#else
  (void)rows;
  (void)work;
  return false;
#endif
}

}  // namespace

Mode mode() { return g_mode.load(std::memory_order_relaxed); }
void set_mode(Mode m) { g_mode.store(m, std::memory_order_relaxed); }

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void mm_nn_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = accumulate ? ci[j] : 0.0;
      for (int l = 0; l < k; ++l) acc += ai[l] * b[static_cast<size_t>(l) * n + j];
      ci[j] = acc;
    }
  }
}

void mm_nt_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      double acc = accumulate ? ci[j] : 0.0;
      for (int l = 0; l < k; ++l) acc += ai[l] * bj[l];
      ci[j] = acc;
    }
  }
}

void mm_tn_serial(const double* a, const double* b, double* c, int m, int k,
                  int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = accumulate ? ci[j] : 0.0;
      for (int l = 0; l < k; ++l)
        acc += a[static_cast<size_t>(l) * m + i] * b[static_cast<size_t>(l) * n + j];
      ci[j] = acc;
    }
  }
}

#define RFSUM_MM_PARALLEL(INNER)                                            \
  _Pragma("omp parallel for schedule(static)")                              \
  for (int i = 0; i < m; ++i) {                                             \
    INNER                                                                   \
  }

void mm_nn(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate) {
  if (!go_parallel(m, 1LL * m * k * n)) {
    mm_nn_serial(a, b, c, m, k, n, accumulate);
    return;
  }
  RFSUM_MM_PARALLEL({
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = accumulate ? ci[j] : 0.0;
      for (int l = 0; l < k; ++l) acc += ai[l] * b[static_cast<size_t>(l) * n + j];
      ci[j] = acc;
    }
  })
}

void mm_nt(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate) {
  if (!go_parallel(m, 1LL * m * k * n)) {
    mm_nt_serial(a, b, c, m, k, n, accumulate);
    return;
  }
  RFSUM_MM_PARALLEL({
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      double acc = accumulate ? ci[j] : 0.0;
      for (int l = 0; l < k; ++l) acc += ai[l] * bj[l];
      ci[j] = acc;
    }
  })
}

void mm_tn(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate) {
  if (!go_parallel(m, 1LL * m * k * n)) {
    mm_tn_serial(a, b, c, m, k, n, accumulate);
    return;
  }
  RFSUM_MM_PARALLEL({
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = accumulate ? ci[j] : 0.0;
      for (int l = 0; l < k; ++l)
        acc += a[static_cast<size_t>(l) * m + i] * b[static_cast<size_t>(l) * n + j];
      ci[j] = acc;
    }
  })
}

#undef RFSUM_MM_PARALLEL

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void vtanh_serial(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}
void vsigmoid_serial(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = sigmoid_scalar(x[i]);
}
void vadd_serial(const double* a, const double* b, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = a[i] + b[i];
}
void vmul_serial(const double* a, const double* b, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = a[i] * b[i];
}
void vscale_serial(const double* x, double c, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = c * x[i];
}

#define RFSUM_MAP(NAME, SERIAL, EXPR)                         \
  void NAME {                                                 \
    if (!go_parallel(n, n)) {                                 \
      SERIAL;                                                 \
      return;                                                 \
    }                                                         \
    _Pragma("omp parallel for schedule(static)")              \
    for (int i = 0; i < n; ++i) EXPR;                         \
  }

RFSUM_MAP(vtanh(const double* x, double* y, int n), vtanh_serial(x, y, n),
          y[i] = std::tanh(x[i]))
RFSUM_MAP(vsigmoid(const double* x, double* y, int n), vsigmoid_serial(x, y, n),
          y[i] = sigmoid_scalar(x[i]))
RFSUM_MAP(vadd(const double* a, const double* b, double* y, int n),
          vadd_serial(a, b, y, n), y[i] = a[i] + b[i])
RFSUM_MAP(vmul(const double* a, const double* b, double* y, int n),
          vmul_serial(a, b, y, n), y[i] = a[i] * b[i])
RFSUM_MAP(vscale(const double* x, double c, double* y, int n),
          vscale_serial(x, c, y, n), y[i] = c * x[i])

#undef RFSUM_MAP

}  // namespace rfsum::kernels
