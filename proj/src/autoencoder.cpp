#include "tmag/autoencoder.hpp"

#include <cmath>

#include "tmag/error.hpp"
#include "tmag/rng.hpp"

namespace tmag {
namespace {

Vec sparse_matvec(const Mat& W, const Vec& b, const std::vector<Index>& bits) {
  Vec out = b;
  for (Index idx : bits) out += W.col(idx);
  return out;
}

Vec relu(const Vec& v) { return v.cwiseMax(0.0); }

}  // namespace

AutoencoderParams AutoencoderParams::init(Index d_x, Index d_z, RngStream& rng) {
  AutoencoderParams p;
  p.W1.resize(d_z, d_x);
  p.W2.resize(d_x, d_z);
  xavier_fill(p.W1, d_x, d_z, rng);
  xavier_fill(p.W2, d_z, d_x, rng);
  p.b1 = Vec::Zero(d_z);
  p.b2 = Vec::Zero(d_x);
  return p;
}

Vec ae_encode(const AutoencoderParams& p, const std::vector<Index>& x_bits) {
  for (Index idx : x_bits)
    if (idx < 0 || idx >= p.input_dim()) throw DataError("attribute bit out of range");
  return relu(sparse_matvec(p.W1, p.b1, x_bits));
}

Vec ae_decode(const AutoencoderParams& p, const Vec& z) {
  if (z.size() != p.latent_dim()) throw DataError("latent dimension mismatch");
  return relu(p.W2 * z + p.b2);
}

double ae_loss(const AutoencoderParams& p, const AttributeTable& table, double lambda,
               bool reg_biases) {
  if (lambda < 0.0) throw UsageError("ae lambda must be >= 0");
  if (table.width != p.input_dim()) throw DataError("attribute width mismatch");
  double rec = 0.0;
  for (const auto& bits : table.entries) {
    Vec z = relu(sparse_matvec(p.W1, p.b1, bits));
    Vec xr = relu(p.W2 * z + p.b2);
    for (Index idx : bits) xr[idx] -= 1.0;  // xr - x, x multi-hot
    rec += xr.squaredNorm();
  }
  double reg = p.W1.squaredNorm() + p.W2.squaredNorm();
  if (reg_biases) reg += p.b1.squaredNorm() + p.b2.squaredNorm();
  return rec + lambda * reg;
}

AutoencoderParams ae_gradient(const AutoencoderParams& p, const AttributeTable& table,
                              double lambda, bool reg_biases) {
  AutoencoderParams g;
  g.W1 = Mat::Zero(p.W1.rows(), p.W1.cols());
  g.W2 = Mat::Zero(p.W2.rows(), p.W2.cols());
  g.b1 = Vec::Zero(p.b1.size());
  g.b2 = Vec::Zero(p.b2.size());

  for (const auto& bits : table.entries) {
    Vec pre1 = sparse_matvec(p.W1, p.b1, bits);
    Vec z = relu(pre1);
    Vec pre2 = p.W2 * z + p.b2;
    Vec xr = relu(pre2);
    Vec err = xr;
    for (Index idx : bits) err[idx] -= 1.0;

    Vec dpre2 = 2.0 * err.cwiseProduct((pre2.array() > 0.0).cast<double>().matrix());
    g.W2 += dpre2 * z.transpose();
    g.b2 += dpre2;
    Vec dz = p.W2.transpose() * dpre2;
    Vec dpre1 = dz.cwiseProduct((pre1.array() > 0.0).cast<double>().matrix());
    for (Index idx : bits) g.W1.col(idx) += dpre1;
    g.b1 += dpre1;
  }
  g.W1 += 2.0 * lambda * p.W1;
  g.W2 += 2.0 * lambda * p.W2;
  if (reg_biases) {
    g.b1 += 2.0 * lambda * p.b1;
    g.b2 += 2.0 * lambda * p.b2;
  }
  return g;
}

AeTrainResult train_autoencoder(const AttributeTable& table, const AeTrainOptions& opt) {
  if (opt.d_z < 1) throw UsageError("d_z must be >= 1");
  if (opt.lr <= 0.0) throw UsageError("ae learning rate must be > 0");
  RngStream rng = RngStream::keyed(opt.seed, 301);
  AeTrainResult res;
  res.params = AutoencoderParams::init(table.width, opt.d_z, rng);

  double lr = opt.lr;
  double loss = ae_loss(res.params, table, opt.lambda, opt.reg_biases);
  res.loss_history.push_back(loss);
  int quiet_epochs = 0;
  for (Index epoch = 0; epoch < opt.max_epochs; ++epoch) {
    if (!std::isfinite(loss))
      throw NumericError("autoencoder loss non-finite at epoch " + std::to_string(epoch));
    AutoencoderParams grad = ae_gradient(res.params, table, opt.lambda, opt.reg_biases);

    // Step-halving: retry with smaller lr until the full-batch loss decreases.
    AutoencoderParams trial;
    double trial_loss = 0.0;
    int halvings = 0;
    for (;; ++halvings) {
      trial.W1 = res.params.W1 - lr * grad.W1;
      trial.b1 = res.params.b1 - lr * grad.b1;
      trial.W2 = res.params.W2 - lr * grad.W2;
      trial.b2 = res.params.b2 - lr * grad.b2;
      trial_loss = ae_loss(trial, table, opt.lambda, opt.reg_biases);
      if (trial_loss <= loss + 1e-12 || halvings >= 60) break;
      lr *= 0.5;
    }
    if (halvings >= 60) break;  // gradient no longer yields descent at any step size

    double rel = std::abs(loss - trial_loss) / std::max(1.0, std::abs(loss));
    res.params = std::move(trial);
    loss = trial_loss;
    res.loss_history.push_back(loss);
    quiet_epochs = rel < opt.tol ? quiet_epochs + 1 : 0;
    if (quiet_epochs >= 5) break;
  }
  return res;
}

Mat ae_encode_table(const AutoencoderParams& p, const AttributeTable& table) {
  Mat Z(table.count(), p.latent_dim());
  for (Index e = 0; e < table.count(); ++e)
    Z.row(e) = ae_encode(p, table.bits(e)).transpose();
  return Z;
}

}  // namespace tmag
