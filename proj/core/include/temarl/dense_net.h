#ifndef TEMARL_DENSE_NET_H_
#define TEMARL_DENSE_NET_H_

#include <string>
#include <string_view>
#include <vector>

#include "temarl/autodiff.h"
#include "temarl/random.h"

namespace temarl {

enum class Activation { kRelu, kIdentity, kSoftmax };

std::string_view ActivationName(Activation a);

struct DenseLayer {
  Parameter weight;  // in x out
  Parameter bias;    // 1 x out
  Activation activation = Activation::kIdentity;
};

// Fully connected feed-forward network over row-per-sample batches.
class DenseNet {
 public:
  DenseNet() = default;

  // `sizes` lists every layer width including input and output. Hidden layers
  // use `hidden`, the last layer uses `head`. Weights and biases are drawn
  // from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  DenseNet(std::string name, const std::vector<int>& sizes, Activation hidden, Activation head,
           Rng& rng);

  // Takes ownership of explicit layers; dimensions are validated.
  DenseNet(std::string name, std::vector<DenseLayer> layers);

  const std::string& name() const { return name_; }
  int input_dim() const;
  int output_dim() const;
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_parameters() const;

  DenseLayer& layer(std::size_t i) { return layers_.at(i); }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  // Tape-free evaluation.
  Matrix forward(const Matrix& input) const;
  Vector forward(const Vector& input) const;

  // Recorded evaluation; parameters are registered on `tape` on every call.
  Var forward(Tape& tape, Var input);
  // Recorded evaluation with the parameters entered as constants: gradients
  // still flow to `input` but never into this net.
  Var forward_frozen(Tape& tape, Var input) const;

  // Copies parameter values from `other`, which must have the same shapes.
  void copy_from(const DenseNet& other);

 private:
  void validate() const;

  std::string name_;
  std::vector<DenseLayer> layers_;
};

}  // namespace temarl

#endif  // TEMARL_DENSE_NET_H_
