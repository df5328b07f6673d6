#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "powermeter/series.hpp"

namespace powermeter {

/// One channel's answer to a poll. An absent `watts` is a gap: the sensor
/// could not be read or returned garbage. `t` is set only by methods that
/// carry their own clock (trace replay); otherwise the session clock is used.
struct Reading {
    std::optional<double> watts;
    std::optional<double> t;
};

/// A pluggable power backend. Channels are fixed at construction, and poll()
/// returns exactly one Reading per channel, in channels() order.
class MeasurementMethod {
public:
    virtual ~MeasurementMethod() = default;

    virtual std::string name() const = 0;
    virtual const std::vector<ChannelId>& channels() const = 0;
    /// `t` is the session time in seconds at which the poll happens.
    virtual std::vector<Reading> poll(double t) = 0;
    /// True once a finite source (a replayed trace) has nothing left to emit.
    virtual bool exhausted() const { return false; }
};

using MethodPtr = std::unique_ptr<MeasurementMethod>;

} // namespace powermeter
