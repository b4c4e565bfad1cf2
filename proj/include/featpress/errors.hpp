#pragma once

#include <stdexcept>
#include <string>

namespace featpress {

// Malformed content: bad CSV cells, schema mismatches, corrupt containers.
struct data_error : std::runtime_error {
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem trouble: missing inputs, unwritable outputs.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace featpress
