#pragma once

#include <stdexcept>
#include <string>

namespace stman {

/// Operand shapes do not satisfy an operation's contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition on values (not shapes) was violated.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external input: corpus lines, config files, checkpoints.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stman
