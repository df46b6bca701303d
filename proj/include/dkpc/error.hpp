#ifndef DKPC_ERROR_HPP
#define DKPC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dkpc {

// Error taxonomy mirrors the CLI exit codes: usage -> 1, data -> 2, numeric -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Wrong shapes / ranks fed to a tensor op.
struct DimensionError : Error {
  using Error::Error;
};

// Token id outside the vocabulary, or lookup of an unknown token.
struct VocabError : Error {
  using Error::Error;
};

// Malformed input files, schema violations, id mismatches.
struct DataError : Error {
  using Error::Error;
};

// Non-finite values, diverging training, failed numeric invariants.
struct NumericError : Error {
  using Error::Error;
};

// Bad command-line arguments or config keys.
struct UsageError : Error {
  using Error::Error;
};

}  // namespace dkpc

#endif  // DKPC_ERROR_HPP
