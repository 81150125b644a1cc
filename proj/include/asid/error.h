#ifndef ASID_ERROR_H_
#define ASID_ERROR_H_

#include <stdexcept>
#include <string>

namespace asid {

// Bad or inconsistent configuration: unknown env_id, dimension mismatch,
// invalid config keys. Raised before any compute where possible.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical precondition was violated (non-finite state, sigma_w = 0 where
// the noise scale is required, non-positive episode count).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The single-episode protocol on the real environment was violated.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace asid

#endif  // ASID_ERROR_H_
