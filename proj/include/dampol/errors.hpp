#pragma once

#include <stdexcept>
#include <string>

namespace dampol {

/// Invalid input data or inconsistent configuration. CLI exit code 2.
class validation_error : public std::runtime_error {
public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical singularity was hit (resonance denominator, vanishing
/// Wronskian, singular linear system). CLI exit code 3.
class singularity_error : public std::runtime_error {
public:
  explicit singularity_error(const std::string& what) : std::runtime_error(what) {}
};

/// An identity that requires absorption was requested at a lossless point.
class lossless_point_error : public std::runtime_error {
public:
  explicit lossless_point_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dampol
