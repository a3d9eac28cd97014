#include "fieldcast/rednet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fieldcast/errors.hpp"
#include "fieldcast/pde.hpp"

namespace fieldcast {

namespace {

inline std::size_t widx(const ConvLayer& l, int a, int b, int p, int q) {
  // regular: a = oc, b = ic; transposed: a = ic, b = oc
  const int second = l.transposed ? l.out_ch : l.in_ch;
  return ((static_cast<std::size_t>(a) * second + b) * l.kernel + p) *
             l.kernel + q;
}

void check_in_channels(const ConvLayer& l, const Field& in) {
  if (in.channels() != l.in_ch) {
    throw shape_error("conv layer expects " + std::to_string(l.in_ch) +
                      " input channels, got " + in.shape_str());
  }
}

}  // namespace

Field conv_forward(const ConvLayer& l, const Field& in) {
  check_in_channels(l, in);
  const int H = in.height(), W = in.width(), k = l.kernel;
  if (!l.transposed) {
    const int Ho = (H + 2 * l.pad - k) / l.stride + 1;
    const int Wo = (W + 2 * l.pad - k) / l.stride + 1;
    Field out(l.out_ch, Ho, Wo);
    for (int oc = 0; oc < l.out_ch; ++oc) {
      for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox) {
          double acc = l.b[oc];
          for (int ic = 0; ic < l.in_ch; ++ic) {
            for (int p = 0; p < k; ++p) {
              const int iy = oy * l.stride + p - l.pad;
              if (iy < 0 || iy >= H) continue;
              for (int q = 0; q < k; ++q) {
                const int ix = ox * l.stride + q - l.pad;
                if (ix < 0 || ix >= W) continue;
                acc += l.w[widx(l, oc, ic, p, q)] * in.at(ic, iy, ix);
              }
            }
          }
          out.at(oc, oy, ox) = acc;
        }
      }
    }
    return out;
  }
  const int Ho = (H - 1) * l.stride - 2 * l.pad + k + l.out_pad;
  const int Wo = (W - 1) * l.stride - 2 * l.pad + k + l.out_pad;
  Field out(l.out_ch, Ho, Wo);
  for (int oc = 0; oc < l.out_ch; ++oc)
    for (int oy = 0; oy < Ho; ++oy)
      for (int ox = 0; ox < Wo; ++ox) out.at(oc, oy, ox) = l.b[oc];
  for (int ic = 0; ic < l.in_ch; ++ic) {
    for (int iy = 0; iy < H; ++iy) {
      for (int ix = 0; ix < W; ++ix) {
        const double v = in.at(ic, iy, ix);
        if (v == 0.0) continue;
        for (int oc = 0; oc < l.out_ch; ++oc) {
          for (int p = 0; p < k; ++p) {
            const int oy = iy * l.stride + p - l.pad;
            if (oy < 0 || oy >= Ho) continue;
            for (int q = 0; q < k; ++q) {
              const int ox = ix * l.stride + q - l.pad;
              if (ox < 0 || ox >= Wo) continue;
              out.at(oc, oy, ox) += l.w[widx(l, ic, oc, p, q)] * v;
            }
          }
        }
      }
    }
  }
  return out;
}

void conv_backward(const ConvLayer& l, const Field& in, const Field& upstream,
                   Field* d_in, std::vector<double>* d_w,
                   std::vector<double>* d_b) {
  const int H = in.height(), W = in.width(), k = l.kernel;
  const int Ho = upstream.height(), Wo = upstream.width();
  if (!l.transposed) {
    for (int oc = 0; oc < l.out_ch; ++oc) {
      for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox) {
          const double g = upstream.at(oc, oy, ox);
          if (g == 0.0) continue;
          (*d_b)[oc] += g;
          for (int ic = 0; ic < l.in_ch; ++ic) {
            for (int p = 0; p < k; ++p) {
              const int iy = oy * l.stride + p - l.pad;
              if (iy < 0 || iy >= H) continue;
              for (int q = 0; q < k; ++q) {
                const int ix = ox * l.stride + q - l.pad;
                if (ix < 0 || ix >= W) continue;
                d_in->at(ic, iy, ix) += l.w[widx(l, oc, ic, p, q)] * g;
                (*d_w)[widx(l, oc, ic, p, q)] += in.at(ic, iy, ix) * g;
              }
            }
          }
        }
      }
    }
    return;
  }
  for (int oc = 0; oc < l.out_ch; ++oc)
    for (int oy = 0; oy < Ho; ++oy)
      for (int ox = 0; ox < Wo; ++ox) (*d_b)[oc] += upstream.at(oc, oy, ox);
  for (int ic = 0; ic < l.in_ch; ++ic) {
    for (int iy = 0; iy < H; ++iy) {
      for (int ix = 0; ix < W; ++ix) {
        const double v = in.at(ic, iy, ix);
        double acc = 0.0;
        for (int oc = 0; oc < l.out_ch; ++oc) {
          for (int p = 0; p < k; ++p) {
            const int oy = iy * l.stride + p - l.pad;
            if (oy < 0 || oy >= Ho) continue;
            for (int q = 0; q < k; ++q) {
              const int ox = ix * l.stride + q - l.pad;
              if (ox < 0 || ox >= Wo) continue;
              const double g = upstream.at(oc, oy, ox);
              acc += l.w[widx(l, ic, oc, p, q)] * g;
              (*d_w)[widx(l, ic, oc, p, q)] += v * g;
            }
          }
        }
        d_in->at(ic, iy, ix) += acc;
      }
    }
  }
}

Field relu(const Field& x) {
  Field out = x;
  double* d = out.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (d[i] < 0.0) d[i] = 0.0;
  return out;
}

Field relu_backward(const Field& pre, const Field& upstream) {
  Field out = upstream;
  const double* p = pre.data();
  double* d = out.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (p[i] <= 0.0) d[i] = 0.0;
  return out;
}

void uniform_fan_in_init(ConvLayer& l, std::mt19937_64& rng) {
  const double bound =
      1.0 / std::sqrt(static_cast<double>(l.in_ch) * l.kernel * l.kernel);
  std::uniform_real_distribution<double> dist(-bound, bound);
  l.w.assign(l.weight_count(), 0.0);
  for (double& v : l.w) v = dist(rng);
  l.b.assign(l.out_ch, 0.0);
}

RedNet::RedNet(const RedNetPlan& plan, std::uint64_t seed) : plan_(plan) {
  if (plan.m_blocks < 1) throw config_error("rednet: m_blocks must be >= 1");
  if (static_cast<int>(plan.channels.size()) != plan.m_blocks) {
    throw config_error("rednet: channel plan length " +
                       std::to_string(plan.channels.size()) + " vs M = " +
                       std::to_string(plan.m_blocks));
  }
  std::mt19937_64 rng(seed);
  const int in0 = plan.input_channels();
  for (int m = 0; m < plan.m_blocks; ++m) {
    const int ci = (m == 0) ? in0 : plan.channels[m - 1];
    const int co = plan.channels[m];
    ConvLayer l1{ci, co, plan.kernel, 2, plan.kernel / 2, 0, false, {}, {}};
    ConvLayer l2{co, co, plan.kernel, 1, plan.kernel / 2, 0, false, {}, {}};
    uniform_fan_in_init(l1, rng);
    uniform_fan_in_init(l2, rng);
    enc_.push_back(std::move(l1));
    enc_.push_back(std::move(l2));
  }
  // decoder in application order: block M first, block 1 last
  for (int m = plan.m_blocks; m >= 1; --m) {
    const int ci = plan.channels[m - 1];
    const int co = (m == 1) ? plan.field_channels : plan.channels[m - 2];
    ConvLayer l1{ci, ci, plan.kernel, 1, plan.kernel / 2, 0, true, {}, {}};
    ConvLayer l2{ci, co, plan.kernel, 2, plan.kernel / 2, 1, true, {}, {}};
    uniform_fan_in_init(l1, rng);
    uniform_fan_in_init(l2, rng);
    if (m == 1) {
      // start from the pure finite-difference extrapolator
      std::fill(l2.w.begin(), l2.w.end(), 0.0);
    }
    dec_.push_back(std::move(l1));
    dec_.push_back(std::move(l2));
  }
  w_vc_ = temporal_coeffs(plan.stack_depth);
}

Field RedNet::stack_to_input(const FieldStack& stack) const {
  if (stack.depth() != plan_.stack_depth) {
    throw shape_error("rednet: stack depth " + std::to_string(stack.depth()) +
                      " vs plan depth " + std::to_string(plan_.stack_depth));
  }
  const Field& f0 = stack.entry(0);
  if (f0.channels() != plan_.field_channels) {
    throw shape_error("rednet: field channels " +
                      std::to_string(f0.channels()) + " vs plan " +
                      std::to_string(plan_.field_channels));
  }
  Field in(plan_.input_channels(), f0.height(), f0.width());
  int c = 0;
  for (int p = 0; p < stack.depth(); ++p) {
    for (int fc = 0; fc < plan_.field_channels; ++fc, ++c) {
      for (int i = 0; i < f0.height(); ++i)
        for (int j = 0; j < f0.width(); ++j)
          in.at(c, i, j) = stack.entry(p).at(fc, i, j);
    }
  }
  return in;
}

Field RedNet::forward(const FieldStack& stack, RedNetCache* cache) const {
  Field a0 = stack_to_input(stack);
  const int M = plan_.m_blocks;
  if ((a0.height() % (1 << M)) != 0 || (a0.width() % (1 << M)) != 0) {
    throw config_error("rednet: grid " + a0.shape_str() +
                       " not divisible by 2^M with M = " + std::to_string(M));
  }

  RedNetCache local;
  RedNetCache& c = cache ? *cache : local;
  c.input = a0;
  c.enc_pre1.clear();
  c.enc_act1.clear();
  c.enc_pre2.clear();
  c.enc_act2.clear();
  c.dec_in.clear();
  c.dec_pre1.clear();
  c.dec_act1.clear();
  c.dec_sum.clear();

  Field x = a0;
  for (int m = 0; m < M; ++m) {
    Field p1 = conv_forward(enc_[2 * m], x);
    Field a1 = relu(p1);
    Field p2 = conv_forward(enc_[2 * m + 1], a1);
    Field a2 = relu(p2);
    c.enc_pre1.push_back(std::move(p1));
    c.enc_act1.push_back(std::move(a1));
    c.enc_pre2.push_back(std::move(p2));
    x = a2;
    c.enc_act2.push_back(x);
  }

  // decoder: dec_[2d], dec_[2d+1] is block m = M - d
  for (int d = 0; d < M; ++d) {
    const int m = M - d;  // 1-based block index
    c.dec_in.push_back(x);
    Field p1 = conv_forward(dec_[2 * d], x);
    Field a1 = relu(p1);
    Field p2 = conv_forward(dec_[2 * d + 1], a1);
    c.dec_pre1.push_back(std::move(p1));
    c.dec_act1.push_back(std::move(a1));
    if (m > 1) {
      Field sum = p2 + c.enc_act2[m - 2];  // skip from encoder block m-1
      c.dec_sum.push_back(sum);
      x = relu(sum);
    } else {
      c.dec_sum.push_back(p2);
      x = std::move(p2);
    }
  }

  c.identity = weighted_collapse(stack, w_vc_);
  Field out = x + c.identity;
  c.out = out;
  return out;
}

void RedNet::backward(const RedNetCache& cache, const Field& upstream,
                      std::vector<Field>* d_stack, RedNetGrads* grads) const {
  const int M = plan_.m_blocks;

  // identity path: d w_vc[p] += <upstream, stack entry p>; d entry p += w_vc[p]*up
  // stack entries are recoverable from cache.input channel slices.
  const int fc = plan_.field_channels;
  for (int p = 0; p < plan_.stack_depth; ++p) {
    Field entry(fc, cache.input.height(), cache.input.width());
    for (int ch = 0; ch < fc; ++ch)
      for (int i = 0; i < entry.height(); ++i)
        for (int j = 0; j < entry.width(); ++j)
          entry.at(ch, i, j) = cache.input.at(p * fc + ch, i, j);
    grads->w_vc[p] += upstream.dot(entry);
    (*d_stack)[p].axpy(w_vc_[p], upstream);
  }

  // gradient wrt the network (non-identity) output
  Field g = upstream;
  // encoder activation gradients accumulated from skips
  std::vector<Field> g_enc_act2(M);
  for (int m = 0; m < M; ++m)
    g_enc_act2[m] = Field(cache.enc_act2[m].channels(),
                          cache.enc_act2[m].height(), cache.enc_act2[m].width());

  // decoder, reverse application order: block 1 first, block M last
  for (int d = M - 1; d >= 0; --d) {
    const int m = M - d;
    Field g_p2 = g;
    if (m > 1) {
      g_p2 = relu_backward(cache.dec_sum[d], g);
      g_enc_act2[m - 2] += g_p2;  // skip addition
    }
    Field g_a1(cache.dec_act1[d].channels(), cache.dec_act1[d].height(),
               cache.dec_act1[d].width());
    conv_backward(dec_[2 * d + 1], cache.dec_act1[d], g_p2, &g_a1,
                  &grads->dec_w[2 * d + 1], &grads->dec_b[2 * d + 1]);
    Field g_p1 = relu_backward(cache.dec_pre1[d], g_a1);
    Field g_in(cache.dec_in[d].channels(), cache.dec_in[d].height(),
               cache.dec_in[d].width());
    conv_backward(dec_[2 * d], cache.dec_in[d], g_p1, &g_in,
                  &grads->dec_w[2 * d], &grads->dec_b[2 * d]);
    if (m == M) {
      g_enc_act2[M - 1] += g_in;  // decoder entry point is enc_act2[M-1]
    } else {
      g = std::move(g_in);  // gradient wrt the next-deeper block's output
    }
  }

  // encoder, reverse order; gradient wrt block output accumulates skip + chain
  Field g_x = g_enc_act2[M - 1];
  for (int m = M - 1; m >= 0; --m) {
    if (m < M - 1) g_x += g_enc_act2[m];
    Field g_p2 = relu_backward(cache.enc_pre2[m], g_x);
    Field g_a1(cache.enc_act1[m].channels(), cache.enc_act1[m].height(),
               cache.enc_act1[m].width());
    conv_backward(enc_[2 * m + 1], cache.enc_act1[m], g_p2, &g_a1,
                  &grads->enc_w[2 * m + 1], &grads->enc_b[2 * m + 1]);
    Field g_p1 = relu_backward(cache.enc_pre1[m], g_a1);
    const Field& in = (m == 0) ? cache.input : cache.enc_act2[m - 1];
    Field g_in(in.channels(), in.height(), in.width());
    conv_backward(enc_[2 * m], in, g_p1, &g_in, &grads->enc_w[2 * m],
                  &grads->enc_b[2 * m]);
    g_x = std::move(g_in);
  }

  // g_x is now the gradient wrt the stacked input; split back into entries
  for (int p = 0; p < plan_.stack_depth; ++p) {
    for (int ch = 0; ch < fc; ++ch)
      for (int i = 0; i < g_x.height(); ++i)
        for (int j = 0; j < g_x.width(); ++j)
          (*d_stack)[p].at(ch, i, j) += g_x.at(p * fc + ch, i, j);
  }
}

RedNetGrads RedNet::zero_grads() const {
  RedNetGrads g;
  for (const auto& l : enc_) {
    g.enc_w.emplace_back(l.weight_count(), 0.0);
    g.enc_b.emplace_back(l.out_ch, 0.0);
  }
  for (const auto& l : dec_) {
    g.dec_w.emplace_back(l.weight_count(), 0.0);
    g.dec_b.emplace_back(l.out_ch, 0.0);
  }
  g.w_vc.assign(w_vc_.size(), 0.0);
  return g;
}

std::size_t RedNet::weight_param_count(bool encoder) const {
  std::size_t n = 0;
  for (const auto& l : (encoder ? enc_ : dec_)) n += l.weight_count();
  return n;
}

std::size_t RedNet::bias_param_count() const {
  std::size_t n = 0;
  for (const auto& l : enc_) n += l.b.size();
  for (const auto& l : dec_) n += l.b.size();
  return n;
}

void RedNet::pack_weights(bool encoder, double* out) const {
  for (const auto& l : (encoder ? enc_ : dec_)) {
    std::memcpy(out, l.w.data(), l.w.size() * sizeof(double));
    out += l.w.size();
  }
}

void RedNet::unpack_weights(bool encoder, const double* in) {
  for (auto& l : (encoder ? enc_ : dec_)) {
    std::memcpy(l.w.data(), in, l.w.size() * sizeof(double));
    in += l.w.size();
  }
}

void RedNet::pack_biases(double* out) const {
  for (const auto& l : enc_) {
    std::memcpy(out, l.b.data(), l.b.size() * sizeof(double));
    out += l.b.size();
  }
  for (const auto& l : dec_) {
    std::memcpy(out, l.b.data(), l.b.size() * sizeof(double));
    out += l.b.size();
  }
}

void RedNet::unpack_biases(const double* in) {
  for (auto& l : enc_) {
    std::memcpy(l.b.data(), in, l.b.size() * sizeof(double));
    in += l.b.size();
  }
  for (auto& l : dec_) {
    std::memcpy(l.b.data(), in, l.b.size() * sizeof(double));
    in += l.b.size();
  }
}

void RedNet::pack_grads(const RedNetGrads& g, bool encoder_weights,
                        double* out) const {
  const auto& src = encoder_weights ? g.enc_w : g.dec_w;
  for (const auto& v : src) {
    std::memcpy(out, v.data(), v.size() * sizeof(double));
    out += v.size();
  }
}

void RedNet::pack_bias_grads(const RedNetGrads& g, double* out) const {
  for (const auto& v : g.enc_b) {
    std::memcpy(out, v.data(), v.size() * sizeof(double));
    out += v.size();
  }
  for (const auto& v : g.dec_b) {
    std::memcpy(out, v.data(), v.size() * sizeof(double));
    out += v.size();
  }
}

std::size_t RedNet::learnable_count() const {
  return weight_param_count(true) + weight_param_count(false) +
         bias_param_count() + w_vc_.size();
}

ConvStack::ConvStack(int in_channels, int hidden, int out_channels,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ConvLayer l1{in_channels, hidden, 3, 1, 1, 0, false, {}, {}};
  ConvLayer l2{hidden, hidden, 3, 1, 1, 0, false, {}, {}};
  ConvLayer l3{hidden, out_channels, 3, 1, 1, 0, false, {}, {}};
  uniform_fan_in_init(l1, rng);
  uniform_fan_in_init(l2, rng);
  uniform_fan_in_init(l3, rng);
  std::fill(l3.w.begin(), l3.w.end(), 0.0);
  layers_ = {std::move(l1), std::move(l2), std::move(l3)};
}

Field ConvStack::forward(const Field& in, Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  c.input = in;
  c.pre.clear();
  c.act.clear();
  Field x = in;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Field p = conv_forward(layers_[i], x);
    if (i + 1 < layers_.size()) {
      Field a = relu(p);
      c.pre.push_back(std::move(p));
      x = a;
      c.act.push_back(x);
    } else {
      x = p;
    }
  }
  c.out = x;
  return x;
}

void ConvStack::backward(const Cache& cache, const Field& upstream,
                         Field* d_in, std::vector<std::vector<double>>* d_w,
                         std::vector<std::vector<double>>* d_b) const {
  Field g = upstream;
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    const Field& in = (i == 0) ? cache.input : cache.act[i - 1];
    Field g_in(in.channels(), in.height(), in.width());
    conv_backward(layers_[i], in, g, &g_in, &(*d_w)[i], &(*d_b)[i]);
    if (i > 0) g = relu_backward(cache.pre[i - 1], g_in);
    else *d_in += g_in;
  }
}

std::size_t ConvStack::weight_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight_count();
  return n;
}

std::size_t ConvStack::bias_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.b.size();
  return n;
}

void ConvStack::pack_weights(double* out) const {
  for (const auto& l : layers_) {
    std::memcpy(out, l.w.data(), l.w.size() * sizeof(double));
    out += l.w.size();
  }
}

void ConvStack::unpack_weights(const double* in) {
  for (auto& l : layers_) {
    std::memcpy(l.w.data(), in, l.w.size() * sizeof(double));
    in += l.w.size();
  }
}

void ConvStack::pack_biases(double* out) const {
  for (const auto& l : layers_) {
    std::memcpy(out, l.b.data(), l.b.size() * sizeof(double));
    out += l.b.size();
  }
}

void ConvStack::unpack_biases(const double* in) {
  for (auto& l : layers_) {
    std::memcpy(l.b.data(), in, l.b.size() * sizeof(double));
    in += l.b.size();
  }
}

}  // namespace fieldcast
