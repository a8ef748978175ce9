#include "qrc/random.hpp"

namespace qrc {

std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = splitmix64(parent);
  for (std::uint64_t tag : path) {
    state = splitmix64(state ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
  }
  return state;
}

}  // namespace qrc
