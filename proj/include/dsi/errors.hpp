#pragma once

#include <stdexcept>
#include <string>

namespace dsi {

/// Operation called in a state that forbids it (double admission, premature epoch end).
class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A caller broke the sampling protocol, e.g. requested a sample the job already saw this epoch.
class ProtocolViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed or incomplete profile document. Carries the dotted key path of the offending field.
class ProfileError : public std::runtime_error {
public:
    ProfileError(std::string key_path, const std::string& message)
        : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
          key_path_(std::move(key_path)) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

}  // namespace dsi
