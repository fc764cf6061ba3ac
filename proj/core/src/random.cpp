#include "pathvar/random.hpp"


namespace pathvar {

RandomSource RandomSource::derive(std::uint64_t child) const noexcept {
    return RandomSource(seed_, mix64(stream_ ^ mix64(child + 0x632BE59BD9B4E019ULL)));
}

RandomSource::Engine RandomSource::engine() const {
    return Engine(mix64(mix64(seed_) ^ stream_));
}

}  // namespace pathvar
