#pragma once

#include <string>
#include <vector>

namespace mlsvm {

// Entry point behind the mlsvm binary; args excludes the program name.
// Exit codes: 0 ok, 2 missing input file, 3 corrupt model file, 1 other
// failures; argument errors return CLI usage errors (nonzero).
int run_cli(const std::vector<std::string>& args);

}  // namespace mlsvm
