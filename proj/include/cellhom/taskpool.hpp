#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cellhom {

// Fixed-size pool running an indexed task list. Tasks write into
// caller-owned slots keyed by index, so results are identical for any
// thread count; the first failing slot's exception (by index, not by time)
// is rethrown after all workers join.
class TaskPool {
 public:
  explicit TaskPool(int threads) : m_threads(threads < 1 ? 1 : threads) {}

  int threads() const { return m_threads; }

  void run(const std::vector<std::function<void()>>& tasks) const {
    if (tasks.empty()) return;
    std::vector<std::exception_ptr> errors(tasks.size());
    if (m_threads == 1 || tasks.size() == 1) {
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        try {
          tasks[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    } else {
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          try {
            tasks[i]();
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      };
      std::vector<std::thread> ts;
      int n = m_threads;
      if (static_cast<std::size_t>(n) > tasks.size()) n = static_cast<int>(tasks.size());
      ts.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) ts.emplace_back(worker);
      for (auto& t : ts) t.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

 private:
  int m_threads;
};

}  // namespace cellhom
