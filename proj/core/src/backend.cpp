#include "opencat/embedding.hpp"
#include "opencat/error.hpp"

namespace opencat {

#ifndef OPENCAT_HAVE_ONNX
bool onnx_support_available() { return false; }

std::unique_ptr<EmbeddingBackend> make_onnx_backend(const BackboneSpec&, const std::filesystem::path& model) {
  throw Error(ErrorCode::kBackendError, "cannot load " + model.string() + ": built without ONNX support");
}
#endif

}  // namespace opencat
