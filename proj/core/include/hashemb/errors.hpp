#pragma once

#include <stdexcept>
#include <string>

namespace hashemb {

// Error categories used across the library. Each maps to one failure class
// named in the module contracts so callers can branch on the type.

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class range_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class shape_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class contract_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hashemb
