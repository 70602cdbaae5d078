#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "soc/common.hpp"
#include "soc/corpus.hpp"

namespace soc {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Mean-pooled bag of embeddings, one tanh hidden layer, affine 2-way output.
// The <pad> embedding row is structurally inert: forward skips it (it still
// counts in the pooling denominator) and its row stays all-zeros.
struct ModelParams {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 0;
  std::size_t hidden_dim = 0;
  Matrix embedding;            // vocab x d
  Matrix w1;                   // d x h
  std::vector<double> b1;      // h
  Matrix w2;                   // h x 2
  std::array<double, 2> b2{};

  bool same_shape(const ModelParams& other) const {
    return vocab_size == other.vocab_size && embed_dim == other.embed_dim &&
           hidden_dim == other.hidden_dim;
  }
};

struct ForwardTrace {
  std::vector<std::uint32_t> tokens;
  std::vector<double> pooled;      // d
  std::vector<double> hidden_pre;  // h
  std::vector<double> hidden_act;  // h
  std::array<double, 2> logits{};
};

struct GradientSet {
  Matrix embedding;
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::array<double, 2> b2{};

  GradientSet() = default;
  explicit GradientSet(const ModelParams& params);
  void zero();
  void axpy(double scale, const GradientSet& other);
};

// Entries i.i.d. uniform in [-0.1, 0.1]; <pad> row zeroed.
ModelParams init_params(std::size_t vocab_size, std::size_t embed_dim,
                        std::size_t hidden_dim, std::uint64_t seed);

std::array<double, 2> forward(const ModelParams& params,
                              std::span<const std::uint32_t> tokens,
                              ForwardTrace* trace = nullptr);

// Unnormalized hate-vs-nonhate margin: logits[1] - logits[0].
double score(const ModelParams& params, std::span<const std::uint32_t> tokens);

GradientSet backward(const ModelParams& params, const ForwardTrace& trace,
                     const std::array<double, 2>& upstream);

// Accumulating form used in training loops: out += scale * dL/dtheta where
// L = upstream . logits.
void backward_accumulate(const ModelParams& params, const ForwardTrace& trace,
                         const std::array<double, 2>& upstream, double scale,
                         GradientSet& out);

// Gradient of score(); upstream (-1, +1).
GradientSet score_gradient(const ModelParams& params, const ForwardTrace& trace);

struct AdamState {
  GradientSet m;
  GradientSet v;
  std::uint64_t step = 0;

  AdamState() = default;
  explicit AdamState(const ModelParams& params) : m(params), v(params) {}
};

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps);

// "socmodel v1": dims, hexfloat weights, and the vocabulary that encoded the
// training data; round-trip exact.
void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     std::ostream& out);
void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     const std::string& path);
std::pair<ModelParams, Vocabulary> load_checkpoint(std::istream& in);
std::pair<ModelParams, Vocabulary> load_checkpoint(const std::string& path);

std::uint64_t params_hash(const ModelParams& params);

}  // namespace soc
