#include "rh/value_net.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "rh/error.hpp"
#include "rh/random.hpp"

namespace rh {
namespace {

struct Dense {
  const ParamBlock* w;
  const ParamBlock* b;
};

// y = W x + b over a contiguous input.
void affine(const Dense& d, const double* p, const double* x, double* y) {
  const int rows = d.w->rows;
  const int cols = d.w->cols;
  const double* W = p + d.w->offset;
  const double* B = p + d.b->offset;
  for (int r = 0; r < rows; ++r) {
    double acc = B[r];
    const double* row = W + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

// Accumulates dW += dy x^T, db += dy and, when dx is set, dx += W^T dy.
void affine_back(const Dense& d, const double* p, const double* x, const double* dy,
                 double* grad, double* dx) {
  const int rows = d.w->rows;
  const int cols = d.w->cols;
  const double* W = p + d.w->offset;
  double* gW = grad + d.w->offset;
  double* gB = grad + d.b->offset;
  for (int r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    gB[r] += g;
    double* grow = gW + static_cast<std::size_t>(r) * cols;
    const double* row = W + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) grow[c] += g * x[c];
    if (dx != nullptr) {
      for (int c = 0; c < cols; ++c) dx[c] += g * row[c];
    }
  }
}

struct Layout {
  std::vector<Dense> msg, upd, head;
  Dense embed{};
};

Layout layout_of(const ValueNet& net) {
  Layout l;
  const auto& s = net.shape();
  for (int k = 0; k < s.layers; ++k) {
    l.msg.push_back({&net.block(fmt::format("msg{}.weight", k)), &net.block(fmt::format("msg{}.bias", k))});
    l.upd.push_back({&net.block(fmt::format("upd{}.weight", k)), &net.block(fmt::format("upd{}.bias", k))});
  }
  l.embed = {&net.block("embed.weight"), &net.block("embed.bias")};
  for (std::size_t k = 0; k <= s.head.size(); ++k) {
    l.head.push_back({&net.block(fmt::format("head{}.weight", k)), &net.block(fmt::format("head{}.bias", k))});
  }
  return l;
}

struct Cache {
  // h[k] is node states entering layer k, n x width_k, row-major.
  std::vector<std::vector<double>> h;
  std::vector<int> width;
  std::vector<std::vector<double>> msg;     // per layer, edges x hidden
  std::vector<std::vector<double>> agg;     // per layer, nodes x hidden
  std::vector<std::vector<int>> argmax;     // per layer, nodes x hidden, -1 without edges
  std::vector<double> embed_in, z;
  std::vector<std::vector<double>> act;     // head activations, act[0] = z
  double out = 0.0;
};

void check_graph(const TrafficGraph& g, const NetShape& s) {
  const int n = static_cast<int>(g.nodes.size());
  if (n == 0 || g.ego_index < 0 || g.ego_index >= n) throw ParameterError("graph has no ego node");
  if (s.node_in != kNodeFeatures || s.edge_in != kEdgeFeatures || s.ego_in != kEgoFeatures) {
    throw ParameterError("network input widths do not match the graph features");
  }
  for (const GraphEdge& e : g.edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw ParameterError("graph edge refers to a missing node");
    }
  }
}

double run_forward(const ValueNet& net, const Layout& L, const TrafficGraph& g, Cache& c) {
  const auto& s = net.shape();
  check_graph(g, s);
  const double* p = net.params().data();
  const int n = static_cast<int>(g.nodes.size());
  const int m = static_cast<int>(g.edges.size());
  const int H = s.hidden;

  c.h.assign(static_cast<std::size_t>(s.layers + 1), {});
  c.width.assign(static_cast<std::size_t>(s.layers + 1), H);
  c.width[0] = s.node_in;
  c.h[0].resize(static_cast<std::size_t>(n * s.node_in));
  for (int v = 0; v < n; ++v) {
    std::copy(g.nodes[static_cast<std::size_t>(v)].begin(), g.nodes[static_cast<std::size_t>(v)].end(),
              c.h[0].begin() + v * s.node_in);
  }
  c.msg.assign(static_cast<std::size_t>(s.layers), {});
  c.agg.assign(static_cast<std::size_t>(s.layers), {});
  c.argmax.assign(static_cast<std::size_t>(s.layers), {});

  std::vector<double> in;
  for (int k = 0; k < s.layers; ++k) {
    const int w = c.width[static_cast<std::size_t>(k)];
    const auto& hk = c.h[static_cast<std::size_t>(k)];
    auto& msg = c.msg[static_cast<std::size_t>(k)];
    auto& agg = c.agg[static_cast<std::size_t>(k)];
    auto& arg = c.argmax[static_cast<std::size_t>(k)];
    msg.assign(static_cast<std::size_t>(m * H), 0.0);
    agg.assign(static_cast<std::size_t>(n * H), 0.0);
    arg.assign(static_cast<std::size_t>(n * H), -1);
    in.resize(static_cast<std::size_t>(w + s.edge_in));
    for (int e = 0; e < m; ++e) {
      const GraphEdge& ed = g.edges[static_cast<std::size_t>(e)];
      std::copy_n(hk.begin() + ed.src * w, w, in.begin());
      std::copy(ed.features.begin(), ed.features.end(), in.begin() + w);
      double* me = msg.data() + static_cast<std::size_t>(e) * H;
      affine(L.msg[static_cast<std::size_t>(k)], p, in.data(), me);
      double* av = agg.data() + static_cast<std::size_t>(ed.dst) * H;
      int* iv = arg.data() + static_cast<std::size_t>(ed.dst) * H;
      for (int j = 0; j < H; ++j) {
        if (iv[j] < 0 || me[j] > av[j]) {
          av[j] = me[j];
          iv[j] = e;
        }
      }
    }
    auto& next = c.h[static_cast<std::size_t>(k + 1)];
    next.resize(static_cast<std::size_t>(n * H));
    in.resize(static_cast<std::size_t>(w + H));
    for (int v = 0; v < n; ++v) {
      std::copy_n(hk.begin() + v * w, w, in.begin());
      std::copy_n(agg.begin() + v * H, H, in.begin() + w);
      double* out = next.data() + static_cast<std::size_t>(v) * H;
      affine(L.upd[static_cast<std::size_t>(k)], p, in.data(), out);
      for (int j = 0; j < H; ++j) out[j] = std::tanh(out[j]);
    }
  }

  const int wK = c.width.back();
  c.embed_in.resize(static_cast<std::size_t>(wK + s.ego_in));
  std::copy_n(c.h.back().begin() + g.ego_index * wK, wK, c.embed_in.begin());
  std::copy(g.ego.begin(), g.ego.end(), c.embed_in.begin() + wK);
  c.z.resize(static_cast<std::size_t>(s.embed));
  affine(L.embed, p, c.embed_in.data(), c.z.data());
  for (double& x : c.z) x = std::tanh(x);

  c.act.assign(1, c.z);
  for (std::size_t k = 0; k < L.head.size(); ++k) {
    std::vector<double> y(static_cast<std::size_t>(L.head[k].w->rows));
    affine(L.head[k], p, c.act.back().data(), y.data());
    if (k + 1 < L.head.size()) {
      for (double& x : y) x = std::tanh(x);
    }
    c.act.push_back(std::move(y));
  }
  c.out = c.act.back()[0];
  return net.output_offset() + net.output_scale() * c.out;
}

}  // namespace

void NetShape::validate() const {
  if (node_in <= 0 || edge_in <= 0 || ego_in <= 0 || hidden <= 0 || layers <= 0 || embed <= 0) {
    throw ParameterError("network widths must be positive");
  }
  for (int w : head) {
    if (w <= 0) throw ParameterError("head widths must be positive");
  }
}

ValueNet::ValueNet(NetShape shape) : shape_(std::move(shape)) {
  shape_.validate();
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    blocks_.push_back({std::move(name), offset, rows, cols});
    offset += blocks_.back().size();
  };
  for (int k = 0; k < shape_.layers; ++k) {
    const int w = k == 0 ? shape_.node_in : shape_.hidden;
    add(fmt::format("msg{}.weight", k), shape_.hidden, w + shape_.edge_in);
    add(fmt::format("msg{}.bias", k), shape_.hidden, 1);
    add(fmt::format("upd{}.weight", k), shape_.hidden, w + shape_.hidden);
    add(fmt::format("upd{}.bias", k), shape_.hidden, 1);
  }
  add("embed.weight", shape_.embed, shape_.hidden + shape_.ego_in);
  add("embed.bias", shape_.embed, 1);
  int prev = shape_.embed;
  for (std::size_t k = 0; k <= shape_.head.size(); ++k) {
    const int w = k < shape_.head.size() ? shape_.head[k] : 1;
    add(fmt::format("head{}.weight", k), w, prev);
    add(fmt::format("head{}.bias", k), w, 1);
    prev = w;
  }
  params_.assign(offset, 0.0);
}

const ParamBlock& ValueNet::block(const std::string& name) const {
  for (const ParamBlock& b : blocks_) {
    if (b.name == name) return b;
  }
  throw LookupError(fmt::format("no parameter block '{}'", name));
}

void ValueNet::initialize(std::uint64_t seed) {
  auto rng = make_rng(seed, "init");
  for (const ParamBlock& b : blocks_) {
    double* p = params_.data() + b.offset;
    if (b.is_bias()) {
      std::fill_n(p, b.size(), 0.0);
      continue;
    }
    const double limit = std::sqrt(6.0 / (b.rows + b.cols));
    for (std::size_t i = 0; i < b.size(); ++i) p[i] = uniform(rng, -limit, limit);
  }
}

void ValueNet::set_output_affine(double offset, double scale) {
  if (!std::isfinite(offset) || !std::isfinite(scale) || scale == 0.0) {
    throw ParameterError("output affine must be finite with a non-zero scale");
  }
  offset_ = offset;
  scale_ = scale;
}

double ValueNet::forward(const TrafficGraph& g) const {
  Cache c;
  return run_forward(*this, layout_of(*this), g, c);
}

double ValueNet::backward(const TrafficGraph& g, double upstream, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw ParameterError("gradient buffer has the wrong size");
  const Layout L = layout_of(*this);
  Cache c;
  const double value = run_forward(*this, L, g, c);
  if (upstream == 0.0) return value;
  const double* p = params_.data();
  double* gp = grad.data();
  const int n = static_cast<int>(g.nodes.size());
  const int H = shape_.hidden;

  // Head.
  std::vector<double> dy{upstream * scale_};
  for (std::size_t k = L.head.size(); k-- > 0;) {
    const auto& x = c.act[k];
    std::vector<double> dx(x.size(), 0.0);
    affine_back(L.head[k], p, x.data(), dy.data(), gp, dx.data());
    if (k > 0) {
      for (std::size_t j = 0; j < dx.size(); ++j) dx[j] *= 1.0 - x[j] * x[j];
    }
    dy = std::move(dx);
  }
  // dy is now dL/dz; through the embedder tanh.
  for (std::size_t j = 0; j < dy.size(); ++j) dy[j] *= 1.0 - c.z[j] * c.z[j];
  std::vector<double> d_embed_in(c.embed_in.size(), 0.0);
  affine_back(L.embed, p, c.embed_in.data(), dy.data(), gp, d_embed_in.data());

  const int wK = c.width.back();
  std::vector<double> dh(static_cast<std::size_t>(n * wK), 0.0);
  std::copy_n(d_embed_in.begin(), wK, dh.begin() + g.ego_index * wK);

  std::vector<double> in, din;
  for (int k = shape_.layers - 1; k >= 0; --k) {
    const int w = c.width[static_cast<std::size_t>(k)];
    const auto& hk = c.h[static_cast<std::size_t>(k)];
    const auto& hn = c.h[static_cast<std::size_t>(k + 1)];
    const auto& agg = c.agg[static_cast<std::size_t>(k)];
    const auto& arg = c.argmax[static_cast<std::size_t>(k)];
    std::vector<double> dprev(static_cast<std::size_t>(n * w), 0.0);
    std::vector<double> dmsg(c.msg[static_cast<std::size_t>(k)].size(), 0.0);
    in.resize(static_cast<std::size_t>(w + H));
    din.resize(static_cast<std::size_t>(w + H));
    std::vector<double> dpre(static_cast<std::size_t>(H));
    for (int v = 0; v < n; ++v) {
      bool any = false;
      for (int j = 0; j < H; ++j) {
        const double y = hn[static_cast<std::size_t>(v * H + j)];
        dpre[static_cast<std::size_t>(j)] = dh[static_cast<std::size_t>(v * H + j)] * (1.0 - y * y);
        any = any || dpre[static_cast<std::size_t>(j)] != 0.0;
      }
      if (!any) continue;
      std::copy_n(hk.begin() + v * w, w, in.begin());
      std::copy_n(agg.begin() + v * H, H, in.begin() + w);
      std::fill(din.begin(), din.end(), 0.0);
      affine_back(L.upd[static_cast<std::size_t>(k)], p, in.data(), dpre.data(), gp, din.data());
      for (int j = 0; j < w; ++j) dprev[static_cast<std::size_t>(v * w + j)] += din[static_cast<std::size_t>(j)];
      for (int j = 0; j < H; ++j) {
        const int e = arg[static_cast<std::size_t>(v * H + j)];
        if (e >= 0) dmsg[static_cast<std::size_t>(e * H + j)] += din[static_cast<std::size_t>(w + j)];
      }
    }
    in.resize(static_cast<std::size_t>(w + shape_.edge_in));
    din.resize(static_cast<std::size_t>(w + shape_.edge_in));
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const double* dm = dmsg.data() + e * static_cast<std::size_t>(H);
      if (std::all_of(dm, dm + H, [](double x) { return x == 0.0; })) continue;
      const GraphEdge& ed = g.edges[e];
      std::copy_n(hk.begin() + ed.src * w, w, in.begin());
      std::copy(ed.features.begin(), ed.features.end(), in.begin() + w);
      std::fill(din.begin(), din.end(), 0.0);
      affine_back(L.msg[static_cast<std::size_t>(k)], p, in.data(), dm, gp, din.data());
      for (int j = 0; j < w; ++j) dprev[static_cast<std::size_t>(ed.src * w + j)] += din[static_cast<std::size_t>(j)];
    }
    dh = std::move(dprev);
  }
  return value;
}

}  // namespace rh
