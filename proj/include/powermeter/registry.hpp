#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "powermeter/method.hpp"

namespace powermeter {

/// Builds a method from the text after ':' in "name:arg" (empty if none).
using MethodFactory = std::function<MethodPtr(std::string_view arg)>;

/// Name -> factory table. Entries may also be registered as unavailable,
/// which keeps vendor methods visible without an adapter behind them.
class MethodRegistry {
public:
    /// synthetic, gh, replay; plus unavailable slots pynvml, rocm, gcipuinfo.
    static MethodRegistry with_builtins();

    void add(std::string name, MethodFactory factory);
    void add_unavailable(std::string name, std::string reason);

    /// Names that can actually be instantiated, sorted.
    std::vector<std::string> known() const;
    bool contains(std::string_view name) const;

    /// Instantiates methods in the order given. Each spec is "name" or
    /// "name:arg". Throws UnknownMethod for unknown or unavailable names and
    /// for the same name given twice.
    std::vector<MethodPtr> resolve(std::span<const std::string> specs) const;

private:
    struct Entry {
        MethodFactory factory;   // empty when unavailable
        std::string reason;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

/// Splits "synthetic:kind=ramp,base=5,gh" into {"synthetic:kind=ramp,base=5", "gh"}:
/// a comma-separated item holding '=' but no ':' continues the previous
/// method's argument list.
std::vector<std::string> split_method_list(std::string_view list);

/// resolve() against the built-in registry.
std::vector<MethodPtr> registry_resolve(std::span<const std::string> specs);

} // namespace powermeter
