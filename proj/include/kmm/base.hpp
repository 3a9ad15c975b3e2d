#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kmm {

using Index = std::int64_t;
using Value = std::int64_t;

// Characters are arbitrary 32-bit symbols; nothing assumes a dense alphabet.
using Symbol = std::uint32_t;
using SymString = std::vector<Symbol>;

// Contract violations surface as typed exceptions so callers can tell
// library misuse apart from I/O or configuration problems.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct OrderingError : std::logic_error {
  using std::logic_error::logic_error;
};
struct ArithmeticCapacityError : std::overflow_error {
  using std::overflow_error::overflow_error;
};
struct PipelineError : std::logic_error {
  using std::logic_error::logic_error;
};
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline SymString from_bytes(std::string_view s) {
  SymString out;
  out.reserve(s.size());
  for (unsigned char c : s) out.push_back(static_cast<Symbol>(c));
  return out;
}

}  // namespace kmm
