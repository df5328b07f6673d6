#include "powermeter/sampler.hpp"

#include <set>

#include "powermeter/errors.hpp"

namespace powermeter {

using Clock = std::chrono::steady_clock;

Session::Session(SessionConfig config) : methods_(std::move(config.methods)), interval_(config.interval) {
    if (interval_ < std::chrono::milliseconds(1))
        throw ConfigError("sampling interval must be >= 1 ms, got " + std::to_string(interval_.count()));

    std::set<ChannelId> unique;
    for (const auto& m : methods_) {
        first_channel_.push_back(channels_.size());
        for (const auto& c : m->channels()) {
            if (!unique.insert(c).second) throw NoChannels("duplicate channel " + c.str());
            channels_.push_back(c);
        }
    }
    if (channels_.empty()) throw NoChannels("no method exposes a power channel");

    for (const auto& c : channels_) series_.emplace_back(c);
    gaps_.assign(channels_.size(), 0);
}

Session::~Session() {
    if (worker_.joinable()) {
        worker_.request_stop();
        worker_.join();
    }
}

void Session::tick() {
    bool exhausted = true;
    for (std::size_t m = 0; m < methods_.size(); ++m) {
        auto& method = *methods_[m];
        const std::size_t first = first_channel_[m];
        const std::size_t count = method.channels().size();
        const double now = std::chrono::duration<double>(Clock::now() - t0_).count();

        std::vector<Reading> readings;
        try {
            readings = method.poll(now);
        } catch (const std::exception& e) {
            if (round_ == 0) throw StartupFailure("method '" + method.name() + "' failed on first poll: " + e.what());
            readings.clear();
        } catch (...) {
            if (round_ == 0) throw StartupFailure("method '" + method.name() + "' failed on first poll");
            readings.clear();
        }
        for (std::size_t c = 0; c < count; ++c) {
            const Reading r = c < readings.size() ? readings[c] : Reading{};
            const bool ok = r.watts && series_[first + c].try_append({r.t.value_or(now), *r.watts, round_});
            if (!ok) ++gaps_[first + c];
        }
        exhausted = exhausted && method.exhausted();
    }
    ++round_;

    {
        std::lock_guard lock(mutex_);
        all_exhausted_ = exhausted;
    }
    if (exhausted) exhausted_cv_.notify_all();
}

void Session::start() {
    {
        std::lock_guard lock(mutex_);
        if (state_ != SessionState::created) throw InvalidState("session already started");
    }
    t0_ = Clock::now();
    started_at_ = std::chrono::system_clock::now();
    tick();
    {
        std::lock_guard lock(mutex_);
        state_ = SessionState::running;
    }
    worker_ = std::jthread([this](std::stop_token st) { run(st); });
}

void Session::run(std::stop_token stop) {
    std::uint64_t k = 1;
    for (;;) {
        const auto deadline = t0_ + k * interval_;
        {
            std::unique_lock lock(mutex_);
            wake_.wait_until(lock, stop, deadline, [] { return false; });
        }
        if (stop.stop_requested()) break;
        tick();
        // Skip deadlines already missed rather than bursting to catch up.
        const auto behind = (Clock::now() - t0_) / interval_;
        k = std::max<std::uint64_t>(k + 1, static_cast<std::uint64_t>(behind) + 1);
    }
    tick();
}

EnergyReport Session::stop() {
    {
        std::lock_guard lock(mutex_);
        if (state_ != SessionState::running)
            throw InvalidState(state_ == SessionState::stopped ? "session already stopped" : "session not started");
    }
    worker_.request_stop();
    worker_.join();

    EnergyReport report;
    for (std::size_t c = 0; c < series_.size(); ++c) report.push_back(summarize_or_absent(series_[c], gaps_[c]));

    std::lock_guard lock(mutex_);
    report_ = report;
    state_ = SessionState::stopped;
    all_exhausted_ = true;
    exhausted_cv_.notify_all();
    return report;
}

bool Session::wait_exhausted(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    return exhausted_cv_.wait_for(lock, timeout, [&] { return all_exhausted_; });
}

SessionState Session::state() const {
    std::lock_guard lock(mutex_);
    return state_;
}

std::vector<std::string> Session::method_names() const {
    std::vector<std::string> out;
    for (const auto& m : methods_) out.push_back(m->name());
    return out;
}

const std::vector<PowerSeries>& Session::series() const {
    if (state() != SessionState::stopped) throw InvalidState("series are available after stop");
    return series_;
}

const std::vector<std::size_t>& Session::gaps() const {
    if (state() != SessionState::stopped) throw InvalidState("gap counts are available after stop");
    return gaps_;
}

const EnergyReport& Session::report() const {
    if (state() != SessionState::stopped) throw InvalidState("report is available after stop");
    return report_;
}

std::unique_ptr<Session> session_start(SessionConfig config) {
    auto s = std::make_unique<Session>(std::move(config));
    s->start();
    return s;
}

EnergyReport session_stop(Session& session) { return session.stop(); }

} // namespace powermeter
