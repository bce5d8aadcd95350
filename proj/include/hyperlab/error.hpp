#ifndef HYPERLAB_ERROR_HPP_
#define HYPERLAB_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperlab {

enum class ErrorCode {
  UnknownSymbol,
  InvalidPresentation,
  InvalidRepresentation,
  SingularImage,
  NotUnimodular,
  InvalidOrders,
  ParseError,
  EdgeIntoStart,
  DuplicateEdge,
  AlreadyAugmented,
  NoGrowth,
  NonConvergence,
  SupportTooLarge,
  LengthMismatch,
  DepthTooLarge,
  InsufficientData,
  NotIrreducible,
  LabelMismatch,
  SigmaZero,
  InadmissiblePrefix,
  VertexNotMaximal,
  NotTreeLike,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; the code is what
// callers and tests dispatch on, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hyperlab

#endif  // HYPERLAB_ERROR_HPP_
