#pragma once

#include <stdexcept>
#include <string>

namespace splitting {

/// Malformed or invalid splitting specification (schema or model rules).
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string path, const std::string& reason)
      : std::runtime_error(reason + " at " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// A configured memory, size or iteration bound would be exceeded.
class ResourceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A simulation exceeded its work budget (node count, walk steps, depth).
class BudgetError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace splitting
