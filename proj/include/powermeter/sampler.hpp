#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "powermeter/method.hpp"
#include "powermeter/series.hpp"

namespace powermeter {

struct SessionConfig {
    std::vector<MethodPtr> methods;
    std::chrono::milliseconds interval{100};
};

enum class SessionState { created, running, stopped };

/// A measurement session. start() takes the first poll on the calling thread
/// and then runs a sampling thread on absolute deadlines
/// (t0 + k * interval). stop() requests a final poll, joins the thread and
/// summarizes every channel.
///
/// A poll that throws, returns a gap, or would break timestamp ordering is
/// counted as a gap for the affected channels; the session keeps running.
class Session {
public:
    /// Throws ConfigError for interval < 1 ms and NoChannels when the methods
    /// expose no channel at all (or a channel id is duplicated).
    explicit Session(SessionConfig config);
    ~Session();

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    /// Throws InvalidState unless created; StartupFailure when a method throws
    /// on the first poll.
    void start();
    /// Throws InvalidState unless running.
    EnergyReport stop();

    /// Blocks until every method reports exhausted() or the timeout expires.
    bool wait_exhausted(std::chrono::milliseconds timeout);

    SessionState state() const;
    std::chrono::milliseconds interval() const { return interval_; }
    std::vector<std::string> method_names() const;
    const std::vector<ChannelId>& channels() const { return channels_; }
    std::chrono::system_clock::time_point started_at() const { return started_at_; }

    // Available once stopped; throw InvalidState before.
    const std::vector<PowerSeries>& series() const;
    const std::vector<std::size_t>& gaps() const;
    const EnergyReport& report() const;

private:
    void tick();
    void run(std::stop_token stop);

    std::vector<MethodPtr> methods_;
    std::chrono::milliseconds interval_;
    std::vector<ChannelId> channels_;
    std::vector<std::size_t> first_channel_;  // per method, index into channels_

    std::vector<PowerSeries> series_;
    std::vector<std::size_t> gaps_;
    EnergyReport report_;
    std::uint64_t round_ = 0;

    std::chrono::steady_clock::time_point t0_;
    std::chrono::system_clock::time_point started_at_;

    mutable std::mutex mutex_;
    std::condition_variable_any wake_;
    std::condition_variable exhausted_cv_;
    bool all_exhausted_ = false;
    SessionState state_ = SessionState::created;
    std::jthread worker_;
};

/// Validates and starts a session in one step.
std::unique_ptr<Session> session_start(SessionConfig config);
/// stop() on an owned session.
EnergyReport session_stop(Session& session);

} // namespace powermeter
