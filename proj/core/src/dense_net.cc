#include "temarl/dense_net.h"

#include <cmath>
#include <utility>

#include "temarl/errors.h"

namespace temarl {

std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kIdentity:
      return "identity";
    case Activation::kSoftmax:
      return "softmax";
  }
  return "unknown";
}

DenseNet::DenseNet(std::string name, const std::vector<int>& sizes, Activation hidden,
                   Activation head, Rng& rng)
    : name_(std::move(name)) {
  Require(sizes.size() >= 2, "DenseNet '" + name_ + "' needs at least input and output sizes");
  for (int s : sizes) Require(s > 0, "DenseNet '" + name_ + "' has a non-positive layer width");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const int in = sizes[i], out = sizes[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer;
    const std::string prefix = name_ + ".l" + std::to_string(i);
    layer.weight.name = prefix + ".w";
    layer.bias.name = prefix + ".b";
    layer.weight.value = Matrix::NullaryExpr(in, out, [&] { return bound * unit(rng); });
    layer.bias.value = Matrix::NullaryExpr(1, out, [&] { return bound * unit(rng); });
    layer.activation = (i + 2 == sizes.size()) ? head : hidden;
    layers_.push_back(std::move(layer));
  }
}

DenseNet::DenseNet(std::string name, std::vector<DenseLayer> layers)
    : name_(std::move(name)), layers_(std::move(layers)) {
  validate();
}

void DenseNet::validate() const {
  Require(!layers_.empty(), "DenseNet '" + name_ + "' has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& l = layers_[i];
    Require(l.bias.value.rows() == 1 && l.bias.value.cols() == l.weight.value.cols(),
            "DenseNet '" + name_ + "': bias of layer " + std::to_string(i) + " mismatches weight");
    if (i > 0) {
      Require(layers_[i - 1].weight.value.cols() == l.weight.value.rows(),
              "DenseNet '" + name_ + "': layer " + std::to_string(i) + " is incompatible");
    }
  }
}

int DenseNet::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.value.rows());
}

int DenseNet::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.value.cols());
}

std::size_t DenseNet::num_parameters() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += static_cast<std::size_t>(l.weight.value.size() + l.bias.value.size());
  return n;
}

std::vector<Parameter*> DenseNet::parameters() {
  std::vector<Parameter*> out;
  for (DenseLayer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Parameter*> DenseNet::parameters() const {
  std::vector<const Parameter*> out;
  for (const DenseLayer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

Matrix DenseNet::forward(const Matrix& input) const {
  if (layers_.empty()) throw ContractViolation("DenseNet '" + name_ + "' has no layers");
  if (input.cols() != input_dim()) {
    throw ContractViolation("DenseNet '" + name_ + "': input width " + std::to_string(input.cols()) +
                            ", expected " + std::to_string(input_dim()));
  }
  Matrix h = input;
  for (const DenseLayer& l : layers_) {
    Matrix z(h.rows(), l.weight.value.cols());
    z.noalias() = h * l.weight.value;
    z.rowwise() += l.bias.value.row(0);
    switch (l.activation) {
      case Activation::kRelu:
        z.array() = z.array().max(0.0);
        h = std::move(z);
        break;
      case Activation::kIdentity:
        h = std::move(z);
        break;
      case Activation::kSoftmax:
        h = RowSoftmax(z);
        break;
    }
  }
  return h;
}

Vector DenseNet::forward(const Vector& input) const {
  Matrix row = input.transpose();
  return forward(row).row(0).transpose();
}

Var DenseNet::forward(Tape& tape, Var input) {
  if (tape.value(input).cols() != input_dim()) {
    throw ContractViolation("DenseNet '" + name_ + "': input width " + std::to_string(tape.value(input).cols()) +
                            ", expected " + std::to_string(input_dim()));
  }
  Var h = input;
  for (DenseLayer& l : layers_) {
    Var w = tape.parameter(l.weight);
    Var b = tape.parameter(l.bias);
    h = tape.affine(h, w, b);
    switch (l.activation) {
      case Activation::kRelu:
        h = tape.relu(h);
        break;
      case Activation::kIdentity:
        break;
      case Activation::kSoftmax:
        h = tape.softmax(h);
        break;
    }
  }
  return h;
}

Var DenseNet::forward_frozen(Tape& tape, Var input) const {
  if (tape.value(input).cols() != input_dim()) {
    throw ContractViolation("DenseNet '" + name_ + "': input width " + std::to_string(tape.value(input).cols()) +
                            ", expected " + std::to_string(input_dim()));
  }
  Var h = input;
  for (const DenseLayer& l : layers_) {
    Var w = tape.constant(l.weight.value);
    Var b = tape.constant(l.bias.value);
    h = tape.affine(h, w, b);
    switch (l.activation) {
      case Activation::kRelu:
        h = tape.relu(h);
        break;
      case Activation::kIdentity:
        break;
      case Activation::kSoftmax:
        h = tape.softmax(h);
        break;
    }
  }
  return h;
}

void DenseNet::copy_from(const DenseNet& other) {
  Require(other.layers_.size() == layers_.size(), "copy_from: layer count mismatch");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& src = other.layers_[i];
    DenseLayer& dst = layers_[i];
    Require(src.weight.value.rows() == dst.weight.value.rows() &&
                src.weight.value.cols() == dst.weight.value.cols(),
            "copy_from: shape mismatch in layer " + std::to_string(i));
    dst.weight.value = src.weight.value;
    dst.bias.value = src.bias.value;
  }
}

}  // namespace temarl
