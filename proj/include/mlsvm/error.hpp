#pragma once

#include <stdexcept>
#include <string>

namespace mlsvm {

// Malformed input file; message carries file name and line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated operation precondition or invalid argument.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mlsvm
