#include "hyperlab/error.hpp"

namespace hyperlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::InvalidPresentation: return "InvalidPresentation";
    case ErrorCode::InvalidRepresentation: return "InvalidRepresentation";
    case ErrorCode::SingularImage: return "SingularImage";
    case ErrorCode::NotUnimodular: return "NotUnimodular";
    case ErrorCode::InvalidOrders: return "InvalidOrders";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EdgeIntoStart: return "EdgeIntoStart";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::AlreadyAugmented: return "AlreadyAugmented";
    case ErrorCode::NoGrowth: return "NoGrowth";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DepthTooLarge: return "DepthTooLarge";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::SigmaZero: return "SigmaZero";
    case ErrorCode::InadmissiblePrefix: return "InadmissiblePrefix";
    case ErrorCode::VertexNotMaximal: return "VertexNotMaximal";
    case ErrorCode::NotTreeLike: return "NotTreeLike";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace hyperlab
