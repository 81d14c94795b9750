#include "hrst/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hrst {

unsigned default_jobs() {
    const char* env = std::getenv("HRST_JOBS");
    if (env == nullptr || *env == '\0') {
        return 1;
    }
    try {
        const long v = std::stol(env);
        return v >= 1 ? static_cast<unsigned>(v) : 1u;
    } catch (const std::exception&) {
        return 1;
    }
}

}  // namespace hrst
