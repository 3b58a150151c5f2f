#include "hyptsne/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hyptsne {

int threads_from_environment() {
    const char* raw = std::getenv("HYPTSNE_THREADS");
    if (raw == nullptr) {
        return 1;
    }
    try {
        const int value = std::stoi(raw);
        return value > 0 ? value : 1;
    } catch (const std::exception&) {
        return 1;
    }
}

}
