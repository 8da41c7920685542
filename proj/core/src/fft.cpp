#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace xfl::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (plan_ == nullptr) throw Error("FFTW failed to create a plan");
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

}  // namespace

std::size_t half_spectrum_size(const Index3& dims) {
  return (dims[0] / 2 + 1) * dims[1] * dims[2];
}

std::vector<cplx> forward_3d(const Index3& dims, std::span<const double> in) {
  std::vector<double> work(in.begin(), in.end());
  std::vector<cplx> spectrum(half_spectrum_size(dims));
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft_r2c_3d(static_cast<int>(dims[2]), static_cast<int>(dims[1]),
                               static_cast<int>(dims[0]), work.data(), as_fftw(spectrum.data()),
                               FFTW_ESTIMATE);
  }
  Plan plan(raw);
  plan.execute();
  return spectrum;
}

void inverse_3d(const Index3& dims, std::vector<cplx>& spectrum, std::span<double> out) {
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft_c2r_3d(static_cast<int>(dims[2]), static_cast<int>(dims[1]),
                               static_cast<int>(dims[0]), as_fftw(spectrum.data()), out.data(),
                               FFTW_ESTIMATE);
  }
  Plan plan(raw);
  plan.execute();
}

void complex_nd(const std::vector<int>& shape, std::span<cplx> data, int sign) {
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), as_fftw(data.data()),
                        as_fftw(data.data()), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                        FFTW_ESTIMATE);
  }
  Plan plan(raw);
  plan.execute();
}

void complex_batch(int n, int howmany, std::span<cplx> data, int sign) {
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_many_dft(1, &n, howmany, as_fftw(data.data()), nullptr, 1, n,
                             as_fftw(data.data()), nullptr, 1, n,
                             sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  Plan plan(raw);
  plan.execute();
}

}  // namespace xfl::fft
