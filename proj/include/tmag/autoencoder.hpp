#pragma once

#include "tmag/dataset.hpp"
#include "tmag/types.hpp"

namespace tmag {

// One autoencoder per entity kind (user/item). The encoder output z is the
// latent attribute embedding used for clustering, prediction fusion, the
// attribute augmentation channel and the contrastive term.
struct AutoencoderParams {
  Mat W1;  // d_z x d_x
  Vec b1;  // d_z
  Mat W2;  // d_x x d_z
  Vec b2;  // d_x

  Index latent_dim() const { return W1.rows(); }
  Index input_dim() const { return W1.cols(); }

  static AutoencoderParams init(Index d_x, Index d_z, RngStream& rng);
};

struct AeTrainOptions {
  Index d_z = 64;
  double lambda = 1e-4;
  double lr = 0.1;
  Index max_epochs = 2000;
  double tol = 1e-6;       // relative loss change, must hold 5 epochs in a row
  bool reg_biases = true;  // include b1/b2 in the L2 term
  std::uint64_t seed = 0;
};

struct AeTrainResult {
  AutoencoderParams params;
  std::vector<double> loss_history;  // one entry per epoch, initial loss first
};

// z = ReLU(W1 x + b1); x is a multi-hot bit list into the schema width.
Vec ae_encode(const AutoencoderParams& p, const std::vector<Index>& x_bits);

// x_r = ReLU(W2 z + b2).
Vec ae_decode(const AutoencoderParams& p, const Vec& z);

// Sum of squared reconstruction errors plus lambda * squared parameter norm.
double ae_loss(const AutoencoderParams& p, const AttributeTable& table, double lambda,
               bool reg_biases = true);

// Analytic full-batch gradient of ae_loss (reverse mode, ReLU subgradient 0 at 0).
AutoencoderParams ae_gradient(const AutoencoderParams& p, const AttributeTable& table,
                              double lambda, bool reg_biases = true);

// Full-batch gradient descent with step-halving on loss increase.
AeTrainResult train_autoencoder(const AttributeTable& table, const AeTrainOptions& opt);

// Encoder applied to every entity; rows are z vectors.
Mat ae_encode_table(const AutoencoderParams& p, const AttributeTable& table);

}  // namespace tmag
