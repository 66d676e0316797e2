#include "evovox/eval_client.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "evovox/eval_server.hpp"
#include "evovox/util.hpp"

namespace evovox {

namespace {

httplib::Client make_client(const std::string& base_url, double timeout_seconds) {
  httplib::Client client(base_url);
  const auto seconds = static_cast<time_t>(timeout_seconds);
  const auto micros =
      static_cast<time_t>((timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  return client;
}

EvaluationResponse error_response(const EvaluationRequest& request) {
  EvaluationResponse r;
  r.request_id = request.request_id;
  r.status = "error";
  r.voxel_count = voxel_count(request.morphology);
  return r;
}

}  // namespace

std::optional<EndpointHealth> fetch_health(const std::string& base_url,
                                           double timeout_seconds) {
  httplib::Client client = make_client(base_url, timeout_seconds);
  auto res = client.Get(kHealthPath);
  if (!res || res->status != 200) return std::nullopt;
  try {
    const nlohmann::json j = nlohmann::json::parse(res->body);
    EndpointHealth health;
    health.base_url = base_url;
    health.alive = j.at("status").get<std::string>() == "ok";
    health.worker_count = j.at("worker_count").get<int>();
    health.queue_depth = j.at("queue_depth").get<int>();
    health.peak_in_flight = j.value("peak_in_flight", 0);
    health.server_id = j.value("server_id", base_url);
    return health;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<EvaluationResponse> dispatch_generation(
    const ServerPool& pool, const std::vector<EvaluationRequest>& requests) {
  if (pool.endpoints.empty())
    throw std::invalid_argument("dispatch_generation: server pool has no endpoints");
  if (pool.retry_limit < 1)
    throw std::invalid_argument("dispatch_generation: retry_limit must be >= 1");
  if (requests.empty()) return {};

  const std::size_t n_endpoints = pool.endpoints.size();
  std::vector<int> weight(n_endpoints, 0);
  for (std::size_t e = 0; e < n_endpoints; ++e) {
    if (auto health = fetch_health(pool.endpoints[e]); health && health->alive)
      weight[e] = std::max(1, health->worker_count);
  }

  std::vector<EvaluationResponse> results(requests.size());
  std::vector<bool> resolved(requests.size(), false);

  const bool any_alive = std::any_of(weight.begin(), weight.end(), [](int w) { return w > 0; });
  if (!any_alive) throw EvaluationAborted(requests.size(), requests.size());

  struct Job {
    std::size_t index;
    int attempts = 0;
  };
  std::mutex mutex;
  std::condition_variable wake;
  std::vector<std::deque<Job>> queues(n_endpoints);
  std::size_t remaining = requests.size();
  std::size_t failed = 0;
  bool done = false;

  // Weighted round-robin interleaving: each cycle visits an endpoint once per
  // advertised worker.
  std::vector<std::size_t> schedule;
  const int max_weight = *std::max_element(weight.begin(), weight.end());
  for (int turn = 0; turn < max_weight; ++turn)
    for (std::size_t e = 0; e < n_endpoints; ++e)
      if (weight[e] > turn) schedule.push_back(e);
  for (std::size_t i = 0; i < requests.size(); ++i)
    queues[schedule[i % schedule.size()]].push_back({i, 0});

  auto next_live = [&](std::size_t e) {
    for (std::size_t step = 1; step <= n_endpoints; ++step) {
      const std::size_t candidate = (e + step) % n_endpoints;
      if (weight[candidate] > 0) return candidate;
    }
    return e;
  };

  auto finish = [&](std::size_t index, std::optional<EvaluationResponse> response) {
    // Called under the lock. request_id dedupe: first resolution wins.
    if (!resolved[index]) {
      resolved[index] = true;
      results[index] = response ? std::move(*response) : error_response(requests[index]);
      if (!response) ++failed;
      if (--remaining == 0) {
        done = true;
        wake.notify_all();
      }
    }
  };

  auto worker = [&](std::size_t endpoint) {
    httplib::Client client = make_client(pool.endpoints[endpoint], pool.timeout_seconds);
    while (true) {
      Job job;
      {
        std::unique_lock<std::mutex> lock(mutex);
        wake.wait(lock, [&] { return done || !queues[endpoint].empty(); });
        if (queues[endpoint].empty()) {
          if (done) return;
          continue;
        }
        job = queues[endpoint].front();
        queues[endpoint].pop_front();
      }

      const std::string body = canonical_json(request_to_json(requests[job.index]));
      auto res = client.Post(kEvaluatePath, body, "application/json");
      std::optional<EvaluationResponse> response;
      if (res && res->status == 200) {
        try {
          response = response_from_json(nlohmann::json::parse(res->body));
        } catch (const std::exception&) {
          response.reset();
        }
      }

      std::unique_lock<std::mutex> lock(mutex);
      if (response) {
        finish(job.index, std::move(response));
        continue;
      }
      if (job.attempts + 1 >= pool.retry_limit) {
        finish(job.index, std::nullopt);
        continue;
      }
      const std::size_t target = next_live(endpoint);
      queues[target].push_back({job.index, job.attempts + 1});
      lock.unlock();
      wake.notify_all();
    }
  };

  std::vector<std::thread> threads;
  for (std::size_t e = 0; e < n_endpoints; ++e)
    for (int t = 0; t < weight[e]; ++t) threads.emplace_back(worker, e);
  for (auto& t : threads) t.join();

  if (failed * 2 > requests.size()) throw EvaluationAborted(failed, requests.size());
  return results;
}

LocalEvaluator::LocalEvaluator(int thread_count) : thread_count_(thread_count) {
  if (thread_count_ <= 0)
    thread_count_ = std::max(1u, std::thread::hardware_concurrency());
}

std::vector<EvaluationResponse> LocalEvaluator::evaluate_all(
    const std::vector<EvaluationRequest>& requests) {
  std::vector<EvaluationResponse> results(requests.size());
  const int threads = std::min<int>(thread_count_, static_cast<int>(requests.size()));
  auto run_slice = [&](int offset, int stride) {
    for (std::size_t i = static_cast<std::size_t>(offset); i < requests.size();
         i += static_cast<std::size_t>(stride)) {
      try {
        results[i] = evaluate_request(requests[i], "local");
      } catch (const std::exception&) {
        results[i] = error_response(requests[i]);
      }
    }
  };
  if (threads <= 1) {
    run_slice(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(run_slice, t, threads);
    for (auto& t : pool) t.join();
  }
  return results;
}

RemoteEvaluator::RemoteEvaluator(ServerPool pool) : pool_(std::move(pool)) {}

std::vector<EvaluationResponse> RemoteEvaluator::evaluate_all(
    const std::vector<EvaluationRequest>& requests) {
  return dispatch_generation(pool_, requests);
}

}  // namespace evovox
