#ifndef QKM_ERROR_H_
#define QKM_ERROR_H_

#include <stdexcept>
#include <string>

namespace qkm {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition (bad dimension, out-of-domain
// parameter, infeasible dataset parameters).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// An algorithm could not complete on the given input (draw cap exceeded,
// too few clusters recovered, sample larger than the dataset).
class AlgorithmError : public Error {
 public:
  using Error::Error;
};

}  // namespace qkm

#endif  // QKM_ERROR_H_
