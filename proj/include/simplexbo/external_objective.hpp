#pragma once

#include "simplexbo/simplex_geometry.hpp"

#include <functional>
#include <stdexcept>
#include <string>

namespace simplexbo {

/// Failure of an external objective evaluation.
class ObjectiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ObjectiveTimeout : public ObjectiveError {
 public:
  using ObjectiveError::ObjectiveError;
};

class NonNumericReply : public ObjectiveError {
 public:
  using ObjectiveError::ObjectiveError;
};

class ProcessFailed : public ObjectiveError {
 public:
  using ObjectiveError::ObjectiveError;
};

/// Coordinates as one line of space-separated decimals with 17 significant
/// digits, newline-terminated.
std::string format_coordinates(const SimplexPoint& x);

/// Runs `command` through /bin/sh, writes format_coordinates(x) to its
/// standard input and parses one number from its standard output.
double evaluate_external(const std::string& command, const SimplexPoint& x, double timeout_seconds);

/// Runs the command and returns its complete standard output.
std::string run_external(const std::string& command, const std::string& input, double timeout_seconds);

std::function<double(const SimplexPoint&)> external_objective(std::string command, double timeout_seconds = 30.0);

}  // namespace simplexbo
