#include "powermeter/registry.hpp"

#include <set>

#include "powermeter/errors.hpp"
#include "powermeter/hwmon.hpp"
#include "powermeter/replay.hpp"
#include "powermeter/synthetic.hpp"

namespace powermeter {

MethodRegistry MethodRegistry::with_builtins() {
    MethodRegistry r;
    r.add("synthetic", [](std::string_view arg) -> MethodPtr {
        return std::make_unique<SyntheticMethod>(parse_waveform(arg));
    });
    r.add("gh", [](std::string_view arg) -> MethodPtr {
        return std::make_unique<HwmonMethod>(arg.empty() ? std::filesystem::path(kDefaultHwmonRoot)
                                                         : std::filesystem::path(arg));
    });
    r.add("replay", [](std::string_view arg) -> MethodPtr {
        if (arg.empty()) throw ConfigError("replay needs a power table: replay:<path>");
        return std::make_unique<TraceReplay>(TraceReplay::from_file(std::filesystem::path(arg)));
    });
    for (const char* vendor : {"pynvml", "rocm", "gcipuinfo"})
        r.add_unavailable(vendor, "not built in this configuration");
    return r;
}

void MethodRegistry::add(std::string name, MethodFactory factory) {
    entries_[std::move(name)] = Entry{std::move(factory), {}};
}

void MethodRegistry::add_unavailable(std::string name, std::string reason) {
    entries_[std::move(name)] = Entry{{}, std::move(reason)};
}

std::vector<std::string> MethodRegistry::known() const {
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_)
        if (e.factory) out.push_back(name);
    return out;
}

bool MethodRegistry::contains(std::string_view name) const {
    const auto it = entries_.find(name);
    return it != entries_.end() && it->second.factory;
}

std::vector<MethodPtr> MethodRegistry::resolve(std::span<const std::string> specs) const {
    auto known_list = [&] {
        std::string s;
        for (const auto& n : known()) s += (s.empty() ? "" : ", ") + n;
        return s;
    };

    std::set<std::string, std::less<>> used;
    std::vector<MethodPtr> out;
    for (const auto& spec : specs) {
        const auto colon = spec.find(':');
        const std::string name = spec.substr(0, colon);
        const std::string_view arg =
            colon == std::string::npos ? std::string_view{} : std::string_view(spec).substr(colon + 1);

        const auto it = entries_.find(name);
        if (it == entries_.end())
            throw UnknownMethod("unknown method '" + name + "' (known: " + known_list() + ")");
        if (!it->second.factory)
            throw UnknownMethod("method '" + name + "' " + it->second.reason + " (known: " + known_list() + ")");
        if (!used.insert(name).second) throw UnknownMethod("method '" + name + "' given more than once");
        out.push_back(it->second.factory(arg));
    }
    return out;
}

std::vector<std::string> split_method_list(std::string_view list) {
    std::vector<std::string> out;
    while (!list.empty()) {
        const auto comma = list.find(',');
        const std::string item(list.substr(0, comma));
        list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
        if (item.empty()) continue;
        const bool continues = item.find('=') != std::string::npos && item.find(':') == std::string::npos;
        if (continues && !out.empty())
            out.back() += "," + item;
        else
            out.push_back(item);
    }
    return out;
}

std::vector<MethodPtr> registry_resolve(std::span<const std::string> specs) {
    static const MethodRegistry builtins = MethodRegistry::with_builtins();
    return builtins.resolve(specs);
}

} // namespace powermeter
