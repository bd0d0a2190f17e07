#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ionlink::cli {

// Exit codes: 0 success, 1 validation error (JSON on `err`), 2 usage error.
// `args` includes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ionlink::cli
