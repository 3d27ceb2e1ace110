#include "vlimit/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace vlimit::fft {

namespace {

// FFTW planning is not thread-safe; executions via the new-array interface
// are.  Plans are cached per (kind, size) and created with FFTW_ESTIMATE so
// planning does not touch the input array.
std::mutex g_mutex;

fftw_plan plan_1d(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lk(g_mutex);
  auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> tmp(n);
  auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_plan plan = fftw_plan_dft_1d(n, p, p, sign, FFTW_ESTIMATE);
  cache.emplace(key, plan);
  return plan;
}

fftw_plan plan_2d(int n0, int n1, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lk(g_mutex);
  auto key = std::make_tuple(n0, n1, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> tmp(static_cast<std::size_t>(n0) * n1);
  auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_plan plan = fftw_plan_dft_2d(n0, n1, p, p, sign, FFTW_ESTIMATE);
  cache.emplace(key, plan);
  return plan;
}

fftw_plan plan_dst1(int n) {
  static std::map<int, fftw_plan> cache;
  std::lock_guard<std::mutex> lk(g_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> tmp(n);
  fftw_plan plan = fftw_plan_r2r_1d(n, tmp.data(), tmp.data(), FFTW_RODFT00, FFTW_ESTIMATE);
  cache.emplace(n, plan);
  return plan;
}

}  // namespace

void forward(cplx* data, int n) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_1d(n, FFTW_FORWARD), p, p);
  const double s = 1.0 / n;
  for (int i = 0; i < n; ++i) data[i] *= s;
}

void inverse(cplx* data, int n) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_1d(n, FFTW_BACKWARD), p, p);
}

void forward2d(cplx* data, int n0, int n1) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_2d(n0, n1, FFTW_FORWARD), p, p);
  const double s = 1.0 / (static_cast<double>(n0) * n1);
  const std::size_t total = static_cast<std::size_t>(n0) * n1;
  for (std::size_t i = 0; i < total; ++i) data[i] *= s;
}

void inverse2d(cplx* data, int n0, int n1) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_2d(n0, n1, FFTW_BACKWARD), p, p);
}

void dst1(double* data, int n) {
  // FFTW's RODFT00 computes 2 * sum_j f_j sin(pi m j/(n+1)); halve to match
  // the documented convention.
  fftw_execute_r2r(plan_dst1(n), data, data);
  for (int i = 0; i < n; ++i) data[i] *= 0.5;
}

}  // namespace vlimit::fft
