#include "ifspec/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace ifspec::fft {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// One plan plus its aligned scratch buffer per (size, direction) and thread.
class PlanCache {
 public:
  ~PlanCache() {
    std::lock_guard lock(planner_mutex());
    for (auto& [key, entry] : entries_) fftw_destroy_plan(entry.plan);
  }

  void execute(std::span<cplx> data, int sign) {
    auto& entry = lookup(data.size(), sign);
    auto* buf = entry.buffer.get();
    std::memcpy(static_cast<void*>(buf), data.data(), data.size_bytes());
    fftw_execute(entry.plan);
    std::memcpy(static_cast<void*>(data.data()), buf, data.size_bytes());
  }

 private:
  struct Entry {
    std::unique_ptr<fftw_complex, FftwFree> buffer;
    fftw_plan plan{};
  };

  Entry& lookup(std::size_t n, int sign) {
    const auto key = std::make_pair(n, sign);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    Entry e;
    e.buffer.reset(fftw_alloc_complex(n));
    {
      std::lock_guard lock(planner_mutex());
      e.plan = fftw_plan_dft_1d(static_cast<int>(n), e.buffer.get(), e.buffer.get(), sign,
                                FFTW_ESTIMATE);
    }
    if (e.plan == nullptr) throw GridError("FFTW failed to create a plan");
    return entries_.emplace(key, std::move(e)).first->second;
  }

  std::map<std::pair<std::size_t, int>, Entry> entries_;
};

PlanCache& cache() {
  thread_local PlanCache c;
  return c;
}

}  // namespace

void forward(std::span<cplx> data) {
  if (data.empty()) return;
  cache().execute(data, FFTW_FORWARD);
}

void inverse(std::span<cplx> data) {
  if (data.empty()) return;
  cache().execute(data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

}  // namespace ifspec::fft
