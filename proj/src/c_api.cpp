#include "powermeter/c_api.h"

#include <memory>
#include <string>
#include <vector>

#include "powermeter/export.hpp"
#include "powermeter/registry.hpp"
#include "powermeter/sampler.hpp"

namespace {

thread_local std::string g_last_error;

} // namespace

struct pm_session {
    std::unique_ptr<powermeter::Session> session;
    std::string power_csv;
    std::string energy_csv;
};

extern "C" {

pm_session* pm_session_start(const char* methods, long interval_ms) {
    try {
        auto resolved = powermeter::registry_resolve(powermeter::split_method_list(methods ? methods : ""));
        auto s = std::make_unique<pm_session>();
        s->session = powermeter::session_start({std::move(resolved), std::chrono::milliseconds(interval_ms)});
        g_last_error.clear();
        return s.release();
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

int pm_session_stop(pm_session* s) {
    if (!s) {
        g_last_error = "null session";
        return -1;
    }
    try {
        s->session->stop();
        const auto ex = powermeter::make_export(*s->session, powermeter::local_hostname());
        s->power_csv = powermeter::power_table_csv(ex);
        s->energy_csv = powermeter::energy_table_csv(ex);
        g_last_error.clear();
        return 0;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return -1;
    }
}

int pm_session_wait_exhausted(pm_session* s, long timeout_ms) {
    if (!s) return 0;
    return s->session->wait_exhausted(std::chrono::milliseconds(timeout_ms)) ? 1 : 0;
}

const char* pm_session_power_csv(pm_session* s) {
    if (!s || s->session->state() != powermeter::SessionState::stopped) return nullptr;
    return s->power_csv.c_str();
}

const char* pm_session_energy_csv(pm_session* s) {
    if (!s || s->session->state() != powermeter::SessionState::stopped) return nullptr;
    return s->energy_csv.c_str();
}

void pm_session_free(pm_session* s) { delete s; }

const char* pm_last_error(void) { return g_last_error.c_str(); }

} // extern "C"
