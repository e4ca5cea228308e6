#pragma once

#include <stdexcept>
#include <string>

namespace shiftbai {

// Invalid problem or experiment configuration (bad K, sigma, bounds, ...).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The arm co-observation graph does not connect all arms, so the joint
// mean/shift regression is unidentifiable.
class disconnected_design_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Factorization failed even though the design is connected.
class singular_gram_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shiftbai
