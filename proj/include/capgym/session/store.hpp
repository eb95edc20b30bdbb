#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "capgym/core/hash.hpp"
#include "capgym/session/session.hpp"

namespace capgym {

// Thread-safe collection of live sessions. Each session has its own mutex, so
// batches on one session are serialized while different sessions proceed in
// parallel.
class SessionStore {
 public:
  explicit SessionStore(Environment env, std::uint64_t id_salt = 0) : env_(std::move(env)), salt_(id_salt) {}

  const Environment& environment() const { return env_; }

  std::string create(ChallengeType type, std::uint64_t seed, Clock::time_point now = Clock::now()) {
    return create_with(env_, type, seed, now);
  }

  // Creates a session under a different configuration (per-request overrides).
  std::string create_with(const Environment& env, ChallengeType type, std::uint64_t seed,
                          Clock::time_point now = Clock::now()) {
    const auto n = counter_.fetch_add(1) + 1;
    std::string id = to_hex(splitmix64(n ^ splitmix64(salt_)));
    auto entry = std::make_shared<Entry>(Session(id, env.generate(type, seed), env, now));
    std::unique_lock lock(map_mutex_);
    sessions_.emplace(id, std::move(entry));
    return id;
  }

  // Runs `fn(Session&)` while holding the session's lock.
  template <class Fn>
  auto with(const std::string& id, Fn&& fn) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return fn(entry->session);
  }

  bool contains(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    return sessions_.count(id) != 0;
  }

  std::size_t size() const {
    std::shared_lock lock(map_mutex_);
    return sessions_.size();
  }

  // Expires in-progress sessions older than the configured lifetime.
  int expire_stale(Clock::time_point now = Clock::now()) {
    std::vector<std::shared_ptr<Entry>> entries;
    {
      std::shared_lock lock(map_mutex_);
      for (const auto& [id, e] : sessions_) entries.push_back(e);
    }
    int expired = 0;
    for (auto& e : entries) {
      std::lock_guard lock(e->mutex);
      if (e->session.expire_if_stale(now)) ++expired;
    }
    return expired;
  }

  // Drops terminal sessions created before `cutoff`.
  std::size_t purge_terminal(Clock::time_point cutoff) {
    std::unique_lock lock(map_mutex_);
    return std::erase_if(sessions_, [&](const auto& kv) {
      std::lock_guard l(kv.second->mutex);
      return kv.second->session.status() != SessionStatus::InProgress && kv.second->session.created_at() < cutoff;
    });
  }

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown challenge id '" + id + "'");
    return it->second;
  }

  Environment env_;
  std::uint64_t salt_;
  std::atomic<std::uint64_t> counter_{0};
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace capgym
