#pragma once

#include <stdexcept>
#include <string>

namespace powermeter {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define POWERMETER_DEFINE_ERROR(Name)          \
    class Name : public Error {                \
    public:                                    \
        using Error::Error;                    \
    }

// measure-core
POWERMETER_DEFINE_ERROR(EmptySeries);
POWERMETER_DEFINE_ERROR(InvalidSeries);

// backends
POWERMETER_DEFINE_ERROR(UnknownMethod);
POWERMETER_DEFINE_ERROR(IoError);

// sampler
POWERMETER_DEFINE_ERROR(NoChannels);
POWERMETER_DEFINE_ERROR(StartupFailure);
POWERMETER_DEFINE_ERROR(InvalidState);
POWERMETER_DEFINE_ERROR(ConfigError);

// export / cli
POWERMETER_DEFINE_ERROR(UsageError);
POWERMETER_DEFINE_ERROR(CollisionError);
POWERMETER_DEFINE_ERROR(MergeError);

// sweep
POWERMETER_DEFINE_ERROR(UnknownTag);
POWERMETER_DEFINE_ERROR(EmptySweep);
POWERMETER_DEFINE_ERROR(MissingBinding);
POWERMETER_DEFINE_ERROR(ParseError);
POWERMETER_DEFINE_ERROR(SpecError);

// metrics
POWERMETER_DEFINE_ERROR(DomainError);

#undef POWERMETER_DEFINE_ERROR

} // namespace powermeter
