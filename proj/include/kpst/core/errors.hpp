#pragma once

#include <stdexcept>
#include <string>

namespace kpst {

// Exit-code mapping used by the CLI: usage 1, data 2, checkpoint 3, io 4.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kpst
