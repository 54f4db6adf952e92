#ifndef DRIPSIM_UTIL_HPP
#define DRIPSIM_UTIL_HPP

#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>
#include <variant>

namespace dripsim {

/// Base class for all dripsim errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or non-finite configuration values.
struct ConfigError : Error {
    using Error::Error;
};

/// Fault-injection argument out of range.
struct FaultError : Error {
    using Error::Error;
};

/// Degenerate regression input.
struct FitError : Error {
    using Error::Error;
};

/// Out-of-range or malformed input to an otherwise pure operation.
struct InputError : Error {
    using Error::Error;
};

/// Frame violates wire-format invariants and cannot be encoded.
struct EncodeError : Error {
    using Error::Error;
};

/// Scenario file failed validation; message carries the offending field.
struct ScenarioError : Error {
    using Error::Error;
};

/// Minimal result type: holds either a value or an error code.
template <typename T, typename E>
class Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(E error) : v_(error) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& { return std::get<T>(v_); }
    T&& value() && { return std::get<T>(std::move(v_)); }
    E error() const { return std::get<E>(v_); }

private:
    std::variant<T, E> v_;
};

namespace log {

// Verbosity from DRIPSIM_LOG: unset/empty = warnings only, "info", "debug".
inline int level() {
    static const int lvl = [] {
        const char* env = std::getenv("DRIPSIM_LOG");
        if (env == nullptr) return 0;
        const std::string s(env);
        if (s == "debug") return 2;
        if (s == "info") return 1;
        return 0;
    }();
    return lvl;
}

inline void info(const std::string& msg) {
    if (level() >= 1) std::cerr << "[dripsim] " << msg << '\n';
}

inline void debug(const std::string& msg) {
    if (level() >= 2) std::cerr << "[dripsim] " << msg << '\n';
}

}  // namespace log

}  // namespace dripsim

#endif
