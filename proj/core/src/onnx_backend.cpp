#include <mutex>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include "opencat/embedding.hpp"
#include "opencat/error.hpp"

namespace opencat {
namespace {

class OnnxBackend final : public EmbeddingBackend {
 public:
  OnnxBackend(BackboneSpec spec, cv::dnn::Net net) : spec_(std::move(spec)), net_(std::move(net)) {}

  const BackboneSpec& spec() const override { return spec_; }

  std::vector<float> embed(const PlanarImage& input) const override {
    const int dims[4] = {1, input.channels, input.height, input.width};
    cv::Mat blob(4, dims, CV_32F);
    std::copy(input.data.begin(), input.data.end(), blob.ptr<float>());
    cv::Mat out;
    {
      // cv::dnn::Net keeps per-call state; serialize inference.
      std::lock_guard lock(mutex_);
      net_.setInput(blob);
      out = net_.forward().clone();
    }
    if (!out.isContinuous()) out = out.clone();
    const float* p = out.ptr<float>();
    return std::vector<float>(p, p + out.total());
  }

 private:
  BackboneSpec spec_;
  mutable cv::dnn::Net net_;
  mutable std::mutex mutex_;
};

}  // namespace

bool onnx_support_available() { return true; }

std::unique_ptr<EmbeddingBackend> make_onnx_backend(const BackboneSpec& spec, const std::filesystem::path& model) {
  validate_backbone_spec(spec);
  try {
    cv::dnn::Net net = cv::dnn::readNetFromONNX(model.string());
    if (net.empty()) throw Error(ErrorCode::kBackendError, "empty network in " + model.string());
    return std::make_unique<OnnxBackend>(spec, std::move(net));
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kBackendError, "cannot load " + model.string() + ": " + e.what());
  }
}

}  // namespace opencat
