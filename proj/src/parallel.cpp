#include "ibridge/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ibridge {

std::size_t resolve_threads(std::optional<std::size_t> requested)
{
    if (requested && *requested > 0) {
        return *requested;
    }
    if (const char* env = std::getenv("BRIDGE_THREADS")) {
        try {
            const long value = std::stol(env);
            if (value > 0) {
                return static_cast<std::size_t>(value);
            }
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace ibridge
