#include "msgreen/common.hpp"

namespace msgreen {

std::string version_string() { return "0.1.0"; }

}  // namespace msgreen
