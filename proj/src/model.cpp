#include "soc/model.hpp"

#include <cmath>
#include <fstream>

#include "soc/io_util.hpp"
#include "soc/rng.hpp"

namespace soc {

GradientSet::GradientSet(const ModelParams& params)
    : embedding(params.vocab_size, params.embed_dim),
      w1(params.embed_dim, params.hidden_dim),
      b1(params.hidden_dim, 0.0),
      w2(params.hidden_dim, 2) {}

void GradientSet::zero() {
  std::fill(embedding.data.begin(), embedding.data.end(), 0.0);
  std::fill(w1.data.begin(), w1.data.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(w2.data.begin(), w2.data.end(), 0.0);
  b2.fill(0.0);
}

void GradientSet::axpy(double scale, const GradientSet& other) {
  for (std::size_t i = 0; i < embedding.data.size(); ++i) {
    embedding.data[i] += scale * other.embedding.data[i];
  }
  for (std::size_t i = 0; i < w1.data.size(); ++i) {
    w1.data[i] += scale * other.w1.data[i];
  }
  for (std::size_t i = 0; i < b1.size(); ++i) b1[i] += scale * other.b1[i];
  for (std::size_t i = 0; i < w2.data.size(); ++i) {
    w2.data[i] += scale * other.w2.data[i];
  }
  b2[0] += scale * other.b2[0];
  b2[1] += scale * other.b2[1];
}

ModelParams init_params(std::size_t vocab_size, std::size_t embed_dim,
                        std::size_t hidden_dim, std::uint64_t seed) {
  if (embed_dim == 0 || hidden_dim == 0) {
    throw Error("model dimensions must be >= 1");
  }
  ModelParams params;
  params.vocab_size = vocab_size;
  params.embed_dim = embed_dim;
  params.hidden_dim = hidden_dim;
  params.embedding = Matrix(vocab_size, embed_dim);
  params.w1 = Matrix(embed_dim, hidden_dim);
  params.b1.assign(hidden_dim, 0.0);
  params.w2 = Matrix(hidden_dim, 2);

  Rng rng = make_rng(seed);
  auto fill = [&rng](double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      data[i] = uniform_range(rng, -0.1, 0.1);
    }
  };
  fill(params.embedding.data.data(), params.embedding.data.size());
  fill(params.w1.data.data(), params.w1.data.size());
  fill(params.b1.data(), params.b1.size());
  fill(params.w2.data.data(), params.w2.data.size());
  fill(params.b2.data(), params.b2.size());
  for (std::size_t j = 0; j < embed_dim; ++j) params.embedding(kPadId, j) = 0.0;
  return params;
}

std::array<double, 2> forward(const ModelParams& params,
                              std::span<const std::uint32_t> tokens,
                              ForwardTrace* trace) {
  if (tokens.empty()) throw Error("forward requires a non-empty sequence");
  const auto d = params.embed_dim;
  const auto h = params.hidden_dim;

  // per-thread scratch; the Monte-Carlo loops call this millions of times
  thread_local std::vector<double> pooled;
  thread_local std::vector<double> pre;
  thread_local std::vector<double> act;
  pooled.assign(d, 0.0);
  for (const auto t : tokens) {
    if (t >= params.vocab_size) throw Error("token id out of range in forward");
    if (t == kPadId) continue;  // contributes zeros, still counted below
    const double* row = &params.embedding.data[t * d];
    for (std::size_t j = 0; j < d; ++j) pooled[j] += row[j];
  }
  const double inv_len = 1.0 / static_cast<double>(tokens.size());
  for (std::size_t j = 0; j < d; ++j) pooled[j] *= inv_len;

  pre.assign(h, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double x = pooled[i];
    const double* row = &params.w1.data[i * h];
    for (std::size_t j = 0; j < h; ++j) pre[j] += x * row[j];
  }
  act.resize(h);
  for (std::size_t j = 0; j < h; ++j) {
    pre[j] += params.b1[j];
    act[j] = std::tanh(pre[j]);
  }

  std::array<double, 2> logits = params.b2;
  for (std::size_t j = 0; j < h; ++j) {
    logits[0] += act[j] * params.w2(j, 0);
    logits[1] += act[j] * params.w2(j, 1);
  }

  if (trace) {
    trace->tokens.assign(tokens.begin(), tokens.end());
    trace->pooled = pooled;
    trace->hidden_pre = pre;
    trace->hidden_act = act;
    trace->logits = logits;
  }
  return logits;
}

double score(const ModelParams& params, std::span<const std::uint32_t> tokens) {
  const auto logits = forward(params, tokens);
  return logits[1] - logits[0];
}

void backward_accumulate(const ModelParams& params, const ForwardTrace& trace,
                         const std::array<double, 2>& upstream, double scale,
                         GradientSet& out) {
  const auto d = params.embed_dim;
  const auto h = params.hidden_dim;
  if (trace.pooled.size() != d || trace.hidden_act.size() != h) {
    throw Error("trace shape does not match parameters");
  }
  const double u0 = scale * upstream[0];
  const double u1 = scale * upstream[1];

  out.b2[0] += u0;
  out.b2[1] += u1;

  std::vector<double> d_act(h);
  for (std::size_t j = 0; j < h; ++j) {
    out.w2(j, 0) += trace.hidden_act[j] * u0;
    out.w2(j, 1) += trace.hidden_act[j] * u1;
    d_act[j] = params.w2(j, 0) * u0 + params.w2(j, 1) * u1;
  }

  std::vector<double> d_pre(h);
  for (std::size_t j = 0; j < h; ++j) {
    const double a = trace.hidden_act[j];
    d_pre[j] = d_act[j] * (1.0 - a * a);
    out.b1[j] += d_pre[j];
  }

  std::vector<double> d_pooled(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double x = trace.pooled[i];
    double acc = 0.0;
    const double* w1_row = &params.w1.data[i * h];
    double* g1_row = &out.w1.data[i * h];
    for (std::size_t j = 0; j < h; ++j) {
      g1_row[j] += x * d_pre[j];
      acc += w1_row[j] * d_pre[j];
    }
    d_pooled[i] = acc;
  }

  const double inv_len = 1.0 / static_cast<double>(trace.tokens.size());
  for (const auto t : trace.tokens) {
    if (t == kPadId) continue;
    double* row = &out.embedding.data[t * d];
    for (std::size_t i = 0; i < d; ++i) row[i] += d_pooled[i] * inv_len;
  }
}

GradientSet backward(const ModelParams& params, const ForwardTrace& trace,
                     const std::array<double, 2>& upstream) {
  GradientSet out(params);
  backward_accumulate(params, trace, upstream, 1.0, out);
  return out;
}

GradientSet score_gradient(const ModelParams& params,
                           const ForwardTrace& trace) {
  return backward(params, trace, {-1.0, 1.0});
}

namespace {

void adam_update(double* w, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bias1, double bias2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (grads.embedding.data.size() != params.embedding.data.size()) {
    throw Error("gradient shape does not match parameters");
  }
  state.step++;
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

  adam_update(params.embedding.data.data(), grads.embedding.data.data(),
              state.m.embedding.data.data(), state.v.embedding.data.data(),
              params.embedding.data.size(), lr, beta1, beta2, eps, bias1, bias2);
  adam_update(params.w1.data.data(), grads.w1.data.data(),
              state.m.w1.data.data(), state.v.w1.data.data(),
              params.w1.data.size(), lr, beta1, beta2, eps, bias1, bias2);
  adam_update(params.b1.data(), grads.b1.data(), state.m.b1.data(),
              state.v.b1.data(), params.b1.size(), lr, beta1, beta2, eps,
              bias1, bias2);
  adam_update(params.w2.data.data(), grads.w2.data.data(),
              state.m.w2.data.data(), state.v.w2.data.data(),
              params.w2.data.size(), lr, beta1, beta2, eps, bias1, bias2);
  adam_update(params.b2.data(), grads.b2.data(), state.m.b2.data(),
              state.v.b2.data(), params.b2.size(), lr, beta1, beta2, eps,
              bias1, bias2);

  // <pad> row is inert by construction; keep it exactly zero
  for (std::size_t j = 0; j < params.embed_dim; ++j) {
    params.embedding(kPadId, j) = 0.0;
  }
}

namespace {

void write_block(std::ostream& out, const char* name, const double* data,
                 std::size_t n) {
  out << name << " " << n << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << format_double_exact(data[i]) << "\n";
  }
}

void read_block(std::istream& in, const char* name, double* data,
                std::size_t n) {
  std::string tag;
  std::size_t count = 0;
  in >> tag >> count;
  if (tag != name || count != n) {
    throw Error(std::string("bad checkpoint block: expected ") + name);
  }
  std::string field;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> field)) throw Error("truncated checkpoint block");
    data[i] = parse_double_exact(field);
  }
}

}  // namespace

void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     std::ostream& out) {
  if (vocab.size() != params.vocab_size) {
    throw Error("checkpoint vocabulary does not match model");
  }
  out << "socmodel v1\n";
  out << "dims " << params.vocab_size << " " << params.embed_dim << " "
      << params.hidden_dim << "\n";
  write_block(out, "embedding", params.embedding.data.data(),
              params.embedding.data.size());
  write_block(out, "w1", params.w1.data.data(), params.w1.data.size());
  write_block(out, "b1", params.b1.data(), params.b1.size());
  write_block(out, "w2", params.w2.data.data(), params.w2.data.size());
  write_block(out, "b2", params.b2.data(), params.b2.size());
  out << "vocab " << vocab.size() << "\n";
  for (const auto& surface : vocab.id_to_surface) out << surface << "\n";
}

void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint: " + path);
  save_checkpoint(params, vocab, out);
}

std::pair<ModelParams, Vocabulary> load_checkpoint(std::istream& in) {
  std::string line, tag;
  if (!std::getline(in, line) || line != "socmodel v1") {
    throw Error("bad checkpoint header");
  }
  ModelParams params;
  in >> tag >> params.vocab_size >> params.embed_dim >> params.hidden_dim;
  if (tag != "dims") throw Error("bad checkpoint dims");
  params.embedding = Matrix(params.vocab_size, params.embed_dim);
  params.w1 = Matrix(params.embed_dim, params.hidden_dim);
  params.b1.assign(params.hidden_dim, 0.0);
  params.w2 = Matrix(params.hidden_dim, 2);
  read_block(in, "embedding", params.embedding.data.data(),
             params.embedding.data.size());
  read_block(in, "w1", params.w1.data.data(), params.w1.data.size());
  read_block(in, "b1", params.b1.data(), params.b1.size());
  read_block(in, "w2", params.w2.data.data(), params.w2.data.size());
  read_block(in, "b2", params.b2.data(), params.b2.size());
  std::size_t vocab_count = 0;
  in >> tag >> vocab_count;
  if (tag != "vocab" || vocab_count != params.vocab_size) {
    throw Error("bad checkpoint vocab section");
  }
  std::getline(in, line);
  Vocabulary vocab;
  for (std::size_t i = 0; i < vocab_count; ++i) {
    if (!std::getline(in, line)) throw Error("truncated checkpoint vocab");
    if (i < kNumReserved) {
      if (line != vocab.surface(static_cast<std::uint32_t>(i))) {
        throw Error("reserved vocabulary entry mismatch in checkpoint");
      }
    } else {
      vocab.add(line);
    }
  }
  return {std::move(params), std::move(vocab)};
}

std::pair<ModelParams, Vocabulary> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint: " + path);
  return load_checkpoint(in);
}

std::uint64_t params_hash(const ModelParams& params) {
  std::uint64_t h = fnv1a(&params.vocab_size, sizeof(params.vocab_size));
  h = fnv1a(params.embedding.data.data(),
            params.embedding.data.size() * sizeof(double), h);
  h = fnv1a(params.w1.data.data(), params.w1.data.size() * sizeof(double), h);
  h = fnv1a(params.b1.data(), params.b1.size() * sizeof(double), h);
  h = fnv1a(params.w2.data.data(), params.w2.data.size() * sizeof(double), h);
  h = fnv1a(params.b2.data(), params.b2.size() * sizeof(double), h);
  return h;
}

}  // namespace soc
