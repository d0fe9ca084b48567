#pragma once

#include <cstddef>

namespace least::alloc_stats {

// Live-byte accounting for every operator new / delete in the process.
// Available only in binaries that link the least_alloc_stats library, which
// replaces the global allocation functions.

std::size_t current_bytes();
std::size_t peak_bytes();
/// Starts a new measurement window: the peak drops to the current level.
void reset_peak();

/// Peak bytes allocated above the level at construction.
class Window {
 public:
  Window();
  std::size_t peak_increment() const;
  std::size_t current_increment() const;

 private:
  std::size_t base_;
};

}  // namespace least::alloc_stats
