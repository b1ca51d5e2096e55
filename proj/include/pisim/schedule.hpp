#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pisim {

class schedule_domain_error : public std::runtime_error {
public:
    explicit schedule_domain_error(const std::string& what) : std::runtime_error(what) {}
};

/// Time-dependent real coefficient gamma(t). Tabulated schedules interpolate
/// linearly and refuse to extrapolate. Values may be negative (canonical
/// Lindblad-like form with non-Markovian rates).
class Schedule {
public:
    enum class Kind { Constant, Sinusoidal, Tabulated };

    static Schedule constant(double value) {
        Schedule s;
        s.kind_ = Kind::Constant;
        s.value_ = value;
        return s;
    }

    /// offset + amplitude * sin(2*pi*frequency*t + phase)
    static Schedule sinusoidal(double amplitude, double frequency, double phase, double offset) {
        Schedule s;
        s.kind_ = Kind::Sinusoidal;
        s.amplitude_ = amplitude;
        s.frequency_ = frequency;
        s.phase_ = phase;
        s.value_ = offset;
        return s;
    }

    static Schedule tabulated(std::vector<double> times, std::vector<double> values) {
        if (times.size() != values.size() || times.size() < 2)
            throw std::invalid_argument("Schedule::tabulated: need >= 2 matching samples");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (times[i] <= times[i - 1])
                throw std::invalid_argument("Schedule::tabulated: times must be strictly increasing");
        Schedule s;
        s.kind_ = Kind::Tabulated;
        s.times_ = std::move(times);
        s.values_ = std::move(values);
        return s;
    }

    Kind kind() const { return kind_; }

    bool is_constant() const { return kind_ == Kind::Constant; }
    double constant_value() const { return value_; }

    double operator()(double t) const {
        switch (kind_) {
            case Kind::Constant:
                return value_;
            case Kind::Sinusoidal:
                return value_ + amplitude_ * std::sin(2.0 * M_PI * frequency_ * t + phase_);
            case Kind::Tabulated: {
                if (t < times_.front() - 1e-12 || t > times_.back() + 1e-12)
                    throw schedule_domain_error("schedule evaluated at t = " + std::to_string(t) +
                                                " outside tabulated range [" +
                                                std::to_string(times_.front()) + ", " +
                                                std::to_string(times_.back()) + "]");
                const double tc = std::min(std::max(t, times_.front()), times_.back());
                auto hi = std::upper_bound(times_.begin(), times_.end(), tc);
                if (hi == times_.end()) --hi;
                if (hi == times_.begin()) ++hi;
                const std::size_t i = static_cast<std::size_t>(hi - times_.begin());
                const double w = (tc - times_[i - 1]) / (times_[i] - times_[i - 1]);
                return (1.0 - w) * values_[i - 1] + w * values_[i];
            }
        }
        throw std::logic_error("Schedule: unreachable");
    }

    // for serialization
    double amplitude() const { return amplitude_; }
    double frequency() const { return frequency_; }
    double phase() const { return phase_; }
    double offset() const { return value_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

private:
    Kind kind_ = Kind::Constant;
    double value_ = 0.0;
    double amplitude_ = 0.0;
    double frequency_ = 0.0;
    double phase_ = 0.0;
    std::vector<double> times_;
    std::vector<double> values_;
};

} // namespace pisim
