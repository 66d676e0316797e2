#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evovox/wire.hpp"

namespace evovox {

struct ServerPool {
  std::vector<std::string> endpoints;  // base URLs, e.g. http://host:port
  int retry_limit = 3;                 // total attempts per request
  double timeout_seconds = 120.0;
};

struct EndpointHealth {
  std::string base_url;
  bool alive = false;
  int worker_count = 0;
  int queue_depth = 0;
  int peak_in_flight = 0;
  std::string server_id;
};

// Raised when more than half of a generation's evaluations fail; the caller
// is expected to checkpoint and abort.
struct EvaluationAborted : std::runtime_error {
  EvaluationAborted(std::size_t failed, std::size_t total)
      : std::runtime_error("evaluation aborted: " + std::to_string(failed) + " of " +
                           std::to_string(total) + " requests failed"),
        failed_count(failed),
        total_count(total) {}
  std::size_t failed_count;
  std::size_t total_count;
};

std::optional<EndpointHealth> fetch_health(const std::string& base_url,
                                           double timeout_seconds = 5.0);

// Dispatches a generation across the pool: endpoint choice is round-robin
// weighted by each server's advertised worker count, per-endpoint concurrency
// never exceeds that count, failed or timed-out requests are retried on the
// next live endpoint, and results come back in request order. Requests that
// exhaust retries resolve to status "error" with fitness 0; if more than 50%
// of the generation fails, throws EvaluationAborted.
std::vector<EvaluationResponse> dispatch_generation(
    const ServerPool& pool, const std::vector<EvaluationRequest>& requests);

class RequestEvaluator {
 public:
  virtual ~RequestEvaluator() = default;
  virtual std::vector<EvaluationResponse> evaluate_all(
      const std::vector<EvaluationRequest>& requests) = 0;
};

// In-process evaluation; value-identical to the remote path because both call
// the same evaluate_request core. thread_count 0 means hardware parallelism.
class LocalEvaluator : public RequestEvaluator {
 public:
  explicit LocalEvaluator(int thread_count = 0);
  std::vector<EvaluationResponse> evaluate_all(
      const std::vector<EvaluationRequest>& requests) override;

 private:
  int thread_count_;
};

class RemoteEvaluator : public RequestEvaluator {
 public:
  explicit RemoteEvaluator(ServerPool pool);
  std::vector<EvaluationResponse> evaluate_all(
      const std::vector<EvaluationRequest>& requests) override;

 private:
  ServerPool pool_;
};

}  // namespace evovox
