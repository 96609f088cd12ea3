#pragma once

#include <thread>

#include "assoc/error.hpp"

namespace assoc {

template <typename F>
auto with_retries(const RetryPolicy& policy, F&& attempt) -> decltype(attempt()) {
  auto backoff = policy.initial_backoff;
  for (int i = 1;; ++i) {
    try {
      return attempt();
    } catch (const TransportError&) {
      if (i >= policy.attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace assoc
