#include "evovox/eval_server.hpp"

#include <condition_variable>
#include <mutex>
#include <stdexcept>

#include <httplib.h>

#include "evovox/util.hpp"

namespace evovox {

struct EvalServer::Impl {
  EvalServerConfig config;
  httplib::Server server;
  std::thread listen_thread;
  int bound_port = -1;
  std::atomic<bool> started{false};

  mutable std::mutex mutex;
  std::condition_variable slot_free;
  int in_flight = 0;
  int waiting = 0;
  int peak = 0;

  int queue_bound() const { return 4 * config.worker_count; }

  void handle_health(httplib::Response& res) {
    nlohmann::json body;
    {
      std::lock_guard<std::mutex> lock(mutex);
      body = {{"status", "ok"},
              {"worker_count", config.worker_count},
              {"queue_depth", waiting},
              {"peak_in_flight", peak},
              {"server_id", config.server_id},
              {"version", kProtocolVersion}};
    }
    res.status = 200;
    res.set_content(canonical_json(body), "application/json");
  }

  void handle_evaluate(const httplib::Request& req, httplib::Response& res) {
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& err) {
      res.status = 400;
      res.set_content(canonical_json({{"error", err.what()}}), "application/json");
      return;
    }
    EvaluationRequest request;
    try {
      request = request_from_json(parsed);
    } catch (const std::exception& err) {
      res.status = 422;
      res.set_content(canonical_json({{"error", err.what()}}), "application/json");
      return;
    }

    {
      std::unique_lock<std::mutex> lock(mutex);
      if (waiting >= queue_bound()) {
        res.status = 503;
        res.set_content(canonical_json({{"error", "evaluation queue full"}}),
                        "application/json");
        return;
      }
      ++waiting;
      slot_free.wait(lock, [&] { return in_flight < config.worker_count; });
      --waiting;
      ++in_flight;
      peak = std::max(peak, in_flight);
    }

    EvaluationResponse response;
    std::string failure;
    try {
      response = config.evaluator(request, config.server_id);
    } catch (const std::exception& err) {
      failure = err.what();
    }

    {
      std::lock_guard<std::mutex> lock(mutex);
      --in_flight;
    }
    slot_free.notify_one();

    if (!failure.empty()) {
      res.status = 500;
      res.set_content(canonical_json({{"error", failure}}), "application/json");
      return;
    }
    res.status = 200;
    res.set_content(canonical_json(response_to_json(response)), "application/json");
  }
};

EvalServer::EvalServer(EvalServerConfig config) : impl_(std::make_unique<Impl>()) {
  if (config.worker_count < 1)
    throw std::invalid_argument("EvalServer: worker_count must be >= 1");
  if (!config.evaluator) config.evaluator = evaluate_request;
  impl_->config = std::move(config);

  // Enough pool threads to hold every running + queued evaluation plus
  // headroom for health checks and queue-full rejections.
  const int pool_threads = impl_->config.worker_count + impl_->queue_bound() + 4;
  impl_->server.new_task_queue = [pool_threads] {
    return new httplib::ThreadPool(static_cast<std::size_t>(pool_threads));
  };
  // SO_REUSEADDR only: httplib's default adds SO_REUSEPORT, which would let a
  // second server bind an already-occupied port instead of failing fast.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes),
               sizeof(yes));
  });
  impl_->server.Get(kHealthPath, [this](const httplib::Request&, httplib::Response& res) {
    impl_->handle_health(res);
  });
  impl_->server.Post(kEvaluatePath,
                     [this](const httplib::Request& req, httplib::Response& res) {
                       impl_->handle_evaluate(req, res);
                     });
}

EvalServer::~EvalServer() {
  try {
    stop();
  } catch (...) {
  }
}

int EvalServer::start() {
  if (impl_->started.load()) return impl_->bound_port;
  auto& server = impl_->server;
  const auto& cfg = impl_->config;
  if (cfg.port == 0) {
    impl_->bound_port = server.bind_to_any_port(cfg.bind_address);
    if (impl_->bound_port < 0)
      throw std::runtime_error("EvalServer: failed to bind " + cfg.bind_address);
  } else {
    if (!server.bind_to_port(cfg.bind_address, cfg.port))
      throw std::runtime_error("EvalServer: failed to bind " + cfg.bind_address + ":" +
                               std::to_string(cfg.port));
    impl_->bound_port = cfg.port;
  }
  if (impl_->config.server_id.empty())
    impl_->config.server_id = cfg.bind_address + ":" + std::to_string(impl_->bound_port);
  impl_->listen_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  while (!impl_->server.is_running()) std::this_thread::yield();
  impl_->started.store(true);
  return impl_->bound_port;
}

void EvalServer::stop() {
  if (!impl_->started.exchange(false)) return;
  // httplib's stop closes the listener; its task queue shutdown finishes
  // handlers already accepted, draining in-flight evaluations.
  impl_->server.stop();
  if (impl_->listen_thread.joinable()) impl_->listen_thread.join();
}

bool EvalServer::running() const { return impl_->started.load(); }

int EvalServer::port() const { return impl_->bound_port; }

std::string EvalServer::base_url() const {
  return "http://" + impl_->config.bind_address + ":" + std::to_string(impl_->bound_port);
}

const std::string& EvalServer::server_id() const { return impl_->config.server_id; }

int EvalServer::peak_in_flight() const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  return impl_->peak;
}

}  // namespace evovox
