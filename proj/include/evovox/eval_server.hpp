#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "evovox/wire.hpp"

namespace evovox {

inline constexpr const char* kProtocolVersion = "1";
inline constexpr const char* kEvaluatePath = "/api/v1/evaluate";
inline constexpr const char* kHealthPath = "/api/v1/health";

struct EvalServerConfig {
  std::string bind_address = "127.0.0.1";
  int port = 0;  // 0 -> pick a free port
  int worker_count = 1;
  std::string server_id;  // defaults to "<bind>:<port>"
  // Injection point so tests can substitute a slow or failing evaluator; the
  // default runs evaluate_request against the real simulator.
  std::function<EvaluationResponse(const EvaluationRequest&, const std::string&)> evaluator;
};

// HTTP evaluation service: POST /api/v1/evaluate, GET /api/v1/health.
// At most worker_count simulations run concurrently; excess requests wait in
// a queue bounded at 4x worker_count, beyond which the server answers 503.
class EvalServer {
 public:
  explicit EvalServer(EvalServerConfig config);
  ~EvalServer();

  EvalServer(const EvalServer&) = delete;
  EvalServer& operator=(const EvalServer&) = delete;

  // Binds and starts serving; throws on bind failure. Returns the bound port.
  int start();
  // Stops accepting new connections and drains in-flight work.
  void stop();

  bool running() const;
  int port() const;
  std::string base_url() const;
  const std::string& server_id() const;
  int peak_in_flight() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evovox
