#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fieldcast/field.hpp"

namespace fieldcast {

// One learnable 2-D stencil bank. Regular layers gather (cross-correlate);
// transposed layers scatter, exactly adjoint to a gather of equal geometry.
// Weights: regular [oc][ic][kh][kw], transposed [ic][oc][kh][kw].
struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;
  int out_pad = 0;  // transposed layers only; 1 when stride 2
  bool transposed = false;
  std::vector<double> w;
  std::vector<double> b;

  std::size_t weight_count() const {
    return static_cast<std::size_t>(in_ch) * out_ch * kernel * kernel;
  }
};

Field conv_forward(const ConvLayer& l, const Field& in);
// Accumulates into d_in / d_w / d_b (all sized by caller).
void conv_backward(const ConvLayer& l, const Field& in, const Field& upstream,
                   Field* d_in, std::vector<double>* d_w,
                   std::vector<double>* d_b);

Field relu(const Field& x);
// upstream masked by pre-activation > 0
Field relu_backward(const Field& pre, const Field& upstream);

struct RedNetPlan {
  int m_blocks = 2;
  int stack_depth = 1;      // K source maps (or n+K observation maps)
  int field_channels = 1;   // channels of one map
  std::vector<int> channels;  // per encoder depth, length m_blocks
  int kernel = 3;

  int input_channels() const { return stack_depth * field_channels; }
};

struct RedNetCache {
  Field input;  // stacked maps, newest first along channels
  std::vector<Field> enc_pre1, enc_act1, enc_pre2, enc_act2;
  std::vector<Field> dec_in, dec_pre1, dec_act1, dec_sum;
  Field identity;  // weighted_collapse(stack, w_vc)
  Field out;
};

struct RedNetGrads {
  std::vector<std::vector<double>> enc_w, dec_w, enc_b, dec_b;
  std::vector<double> w_vc;
};

// Residual encoder-decoder over a stack of maps: M strided convolutional
// blocks down, M transposed blocks up with symmetric skip additions, and a
// trainable finite-difference identity path w_vc over the input stack.
// The final block has no output activation so predictions can be signed.
class RedNet {
 public:
  RedNet() = default;
  RedNet(const RedNetPlan& plan, std::uint64_t seed);

  const RedNetPlan& plan() const { return plan_; }
  const std::vector<double>& w_vc() const { return w_vc_; }
  std::vector<double>& w_vc() { return w_vc_; }

  // stack entries newest first; entries stacked along the channel axis.
  Field forward(const FieldStack& stack, RedNetCache* cache = nullptr) const;
  // Exact vector-Jacobian product. d_stack receives per-entry gradients.
  void backward(const RedNetCache& cache, const Field& upstream,
                std::vector<Field>* d_stack, RedNetGrads* grads) const;

  RedNetGrads zero_grads() const;

  std::size_t weight_param_count(bool encoder) const;
  std::size_t bias_param_count() const;
  void pack_weights(bool encoder, double* out) const;
  void unpack_weights(bool encoder, const double* in);
  void pack_biases(double* out) const;
  void unpack_biases(const double* in);
  void pack_grads(const RedNetGrads& g, bool encoder_weights, double* out) const;
  void pack_bias_grads(const RedNetGrads& g, double* out) const;

  const std::vector<ConvLayer>& encoder() const { return enc_; }
  const std::vector<ConvLayer>& decoder() const { return dec_; }
  std::vector<ConvLayer>& encoder() { return enc_; }
  std::vector<ConvLayer>& decoder() { return dec_; }

  std::size_t learnable_count() const;  // weights + biases + w_vc

 private:
  RedNetPlan plan_;
  // enc_[2m], enc_[2m+1]: the two layers of encoder block m+1.
  // dec_ stored in application order, deepest block first.
  std::vector<ConvLayer> enc_;
  std::vector<ConvLayer> dec_;
  std::vector<double> w_vc_;

  Field stack_to_input(const FieldStack& stack) const;
};

// Plain convolutional stack (three stride-1 layers, inner ReLUs) used by
// the physics+CNN baseline as its corrective module.
class ConvStack {
 public:
  ConvStack() = default;
  ConvStack(int in_channels, int hidden, int out_channels, std::uint64_t seed);

  struct Cache {
    Field input;
    std::vector<Field> pre, act;
    Field out;
  };

  Field forward(const Field& in, Cache* cache = nullptr) const;
  void backward(const Cache& cache, const Field& upstream, Field* d_in,
                std::vector<std::vector<double>>* d_w,
                std::vector<std::vector<double>>* d_b) const;

  const std::vector<ConvLayer>& layers() const { return layers_; }
  std::vector<ConvLayer>& layers() { return layers_; }
  std::size_t weight_count() const;
  std::size_t bias_count() const;
  void pack_weights(double* out) const;
  void unpack_weights(const double* in);
  void pack_biases(double* out) const;
  void unpack_biases(const double* in);

 private:
  std::vector<ConvLayer> layers_;
};

void uniform_fan_in_init(ConvLayer& l, std::mt19937_64& rng);

}  // namespace fieldcast
