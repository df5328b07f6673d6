#include "powermeter/wrap.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <iostream>
#include <sstream>

#include "powermeter/errors.hpp"
#include "powermeter/export.hpp"
#include "powermeter/sampler.hpp"

namespace fs = std::filesystem;

namespace powermeter {

namespace {

std::atomic<pid_t> g_child{0};

extern "C" void forward_to_child(int sig) {
    const pid_t child = g_child.load();
    if (child > 0) kill(child, sig);
}

constexpr int kForwarded[] = {SIGINT, SIGTERM, SIGHUP, SIGQUIT, SIGUSR1, SIGUSR2};

class SignalForwarder {
public:
    explicit SignalForwarder(bool enabled) : enabled_(enabled) {
        if (!enabled_) return;
        struct sigaction sa {};
        sa.sa_handler = forward_to_child;
        sigemptyset(&sa.sa_mask);
        sa.sa_flags = SA_RESTART;
        for (std::size_t i = 0; i < std::size(kForwarded); ++i) sigaction(kForwarded[i], &sa, &saved_[i]);
    }
    ~SignalForwarder() {
        if (!enabled_) return;
        for (std::size_t i = 0; i < std::size(kForwarded); ++i) sigaction(kForwarded[i], &saved_[i], nullptr);
    }
    SignalForwarder(const SignalForwarder&) = delete;
    SignalForwarder& operator=(const SignalForwarder&) = delete;

private:
    bool enabled_;
    struct sigaction saved_[std::size(kForwarded)] {};
};

struct SpawnOutcome {
    pid_t pid = -1;
    int exec_errno = 0;
};

SpawnOutcome spawn(const WrapOptions& o) {
    std::vector<char*> argv;
    for (const auto& a : o.command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    const std::string workdir = o.workdir ? o.workdir->string() : std::string();
    const std::string out_path = o.stdout_path ? o.stdout_path->string() : std::string();

    int fds[2];
    if (pipe2(fds, O_CLOEXEC) != 0) return {-1, errno};

    const pid_t pid = fork();
    if (pid < 0) {
        const int err = errno;
        close(fds[0]);
        close(fds[1]);
        return {-1, err};
    }
    if (pid == 0) {
        close(fds[0]);
        int err = 0;
        if (!workdir.empty() && chdir(workdir.c_str()) != 0) err = errno;
        if (!err && !out_path.empty()) {
            const int fd = open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
            if (fd < 0 || dup2(fd, STDOUT_FILENO) < 0 || dup2(fd, STDERR_FILENO) < 0) err = errno;
        }
        if (!err) {
            execvp(argv[0], argv.data());
            err = errno;
        }
        [[maybe_unused]] auto n = write(fds[1], &err, sizeof err);
        _exit(err == ENOENT ? kExitNotFound : kExitCannotExecute);
    }

    close(fds[1]);
    int err = 0;
    ssize_t n;
    do {
        n = read(fds[0], &err, sizeof err);
    } while (n < 0 && errno == EINTR);
    close(fds[0]);
    if (n == static_cast<ssize_t>(sizeof err)) {
        int status;
        while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {}
        return {-1, err};
    }
    return {pid, 0};
}

int wait_child(pid_t pid) {
    int status = 0;
    while (waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) return kExitWrapperFailure;
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return kExitWrapperFailure;
}

std::string fmt_opt(const std::optional<double>& v, const char* unit) {
    if (!v) return "n/a";
    std::ostringstream os;
    os.precision(6);
    os << *v << " " << unit;
    return os.str();
}

} // namespace

std::string format_summary(const EnergyReport& report) {
    std::ostringstream os;
    for (const auto& r : report) {
        os << "powermeter: " << r.channel.str() << " energy " << fmt_opt(r.energy_wh, "Wh") << ", mean "
           << fmt_opt(r.mean_w, "W") << ", max " << fmt_opt(r.max_w, "W") << ", duration "
           << fmt_opt(r.duration_s, "s") << ", " << r.samples << " samples, " << r.gaps << " gaps\n";
    }
    return os.str();
}

WrapResult run_wrapped(const WrapOptions& o, const MethodRegistry& registry) {
    WrapResult result;
    auto fail = [&](int code, std::string msg) {
        result.exit_code = code;
        result.error = std::move(msg);
        if (o.print_summary) std::cerr << "powermeter: " << result.error << "\n";
        return result;
    };

    if (o.command.empty()) return fail(kExitWrapperFailure, "no command given");

    std::unique_ptr<Session> session;
    std::string suffix;
    std::string host = local_hostname();
    try {
        auto methods = registry.resolve(o.methods);
        if (o.df_out) {
            if (o.df_filetype == "h5")
                throw UsageError("filetype 'h5' is not built in this configuration (supported: csv)");
            if (o.df_filetype != "csv")
                throw UsageError("unknown filetype '" + o.df_filetype + "' (supported: csv)");
            suffix = render_suffix(o.df_suffix, {host, static_cast<long>(getpid()),
                                                 std::chrono::system_clock::now()});
            if (!o.force)
                for (const char* stem : {"power", "energy"}) {
                    const auto p = *o.df_out / (stem + suffix + ".csv");
                    if (fs::exists(p)) throw CollisionError(p.string() + " exists (use --force to overwrite)");
                }
        }
        session = session_start({std::move(methods), std::chrono::milliseconds(o.interval_ms)});
    } catch (const Error& e) {
        return fail(kExitWrapperFailure, e.what());
    }

    int code;
    {
        SignalForwarder forwarder(o.forward_signals);
        const auto spawned = spawn(o);
        if (spawned.pid < 0) {
            session->stop();
            return fail(spawned.exec_errno == ENOENT ? kExitNotFound : kExitCannotExecute,
                        "cannot run '" + o.command.front() + "': " + std::strerror(spawned.exec_errno));
        }
        result.child_started = true;
        g_child.store(spawned.pid);
        code = wait_child(spawned.pid);
        g_child.store(0);
    }

    result.energy = session->stop();
    result.exit_code = code;
    if (o.print_summary) std::cerr << format_summary(result.energy);

    if (o.df_out) {
        try {
            result.exports = export_tables(make_export(*session, host), *o.df_out, o.df_filetype, suffix, o.force);
        } catch (const Error& e) {
            result.error = e.what();
            if (o.print_summary) std::cerr << "powermeter: export failed: " << e.what() << "\n";
            if (code == 0) result.exit_code = kExitWrapperFailure;
        }
    }
    return result;
}

WrapResult run_wrapped(const WrapOptions& options) {
    static const MethodRegistry builtins = MethodRegistry::with_builtins();
    return run_wrapped(options, builtins);
}

} // namespace powermeter
