#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mini_world.hpp"
#include "rh/checkpoint.hpp"
#include "rh/error.hpp"
#include "rh/graph.hpp"
#include "rh/optimizer.hpp"
#include "rh/random.hpp"
#include "rh/value_net.hpp"

using namespace rh;

namespace {

NetShape small_shape() {
  NetShape s;
  s.hidden = 5;
  s.layers = 2;
  s.embed = 4;
  s.head = {6, 3};
  return s;
}

TrafficGraph random_graph(Rng& rng, int max_nodes = 6) {
  TrafficGraph g;
  const int n = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(max_nodes)));
  for (int v = 0; v < n; ++v) {
    g.nodes.push_back({uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1),
                       static_cast<double>(uniform_index(rng, 3))});
    g.vehicle_ids.push_back(v == 0 ? kEgoId : v);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (uniform01(rng) < 0.5) continue;
      for (auto [s, d] : {std::pair{a, b}, std::pair{b, a}}) {
        GraphEdge e;
        e.src = s;
        e.dst = d;
        for (double& f : e.features) f = uniform(rng, -1, 1);
        g.edges.push_back(e);
      }
    }
  }
  for (double& f : g.ego) f = uniform(rng, -1, 1);
  return g;
}

// Plain re-statement of the forward pass over named blocks.
double reference_forward(const ValueNet& net, const TrafficGraph& g) {
  const NetShape& s = net.shape();
  const auto p = net.params();
  auto dense = [&](const std::string& name, const std::vector<double>& x) {
    const ParamBlock& w = net.block(name + ".weight");
    const ParamBlock& b = net.block(name + ".bias");
    std::vector<double> y(static_cast<std::size_t>(w.rows));
    for (int r = 0; r < w.rows; ++r) {
      double acc = p[b.offset + static_cast<std::size_t>(r)];
      for (int c = 0; c < w.cols; ++c) {
        acc += p[w.offset + static_cast<std::size_t>(r * w.cols + c)] * x[static_cast<std::size_t>(c)];
      }
      y[static_cast<std::size_t>(r)] = acc;
    }
    return y;
  };
  std::vector<std::vector<double>> h;
  for (const auto& nf : g.nodes) h.emplace_back(nf.begin(), nf.end());
  for (int k = 0; k < s.layers; ++k) {
    std::vector<std::vector<double>> next;
    for (std::size_t v = 0; v < h.size(); ++v) {
      std::vector<double> agg(static_cast<std::size_t>(s.hidden), 0.0);
      bool first = true;
      for (const GraphEdge& e : g.edges) {
        if (e.dst != static_cast<int>(v)) continue;
        std::vector<double> in = h[static_cast<std::size_t>(e.src)];
        in.insert(in.end(), e.features.begin(), e.features.end());
        const auto m = dense("msg" + std::to_string(k), in);
        for (std::size_t j = 0; j < m.size(); ++j) agg[j] = first ? m[j] : std::max(agg[j], m[j]);
        first = false;
      }
      std::vector<double> in = h[v];
      in.insert(in.end(), agg.begin(), agg.end());
      auto out = dense("upd" + std::to_string(k), in);
      for (double& x : out) x = std::tanh(x);
      next.push_back(out);
    }
    h = next;
  }
  std::vector<double> x = h[static_cast<std::size_t>(g.ego_index)];
  x.insert(x.end(), g.ego.begin(), g.ego.end());
  x = dense("embed", x);
  for (double& v : x) v = std::tanh(v);
  for (std::size_t k = 0; k <= s.head.size(); ++k) {
    x = dense("head" + std::to_string(k), x);
    if (k < s.head.size()) {
      for (double& v : x) v = std::tanh(v);
    }
  }
  return net.output_offset() + net.output_scale() * x[0];
}

}  // namespace

TEST_CASE("features: normalisations") {
  CHECK(features::velocity(35.0) == doctest::Approx(1.0));
  CHECK(features::velocity(15.0) == 0.0);
  CHECK(features::position(-25.0) == doctest::Approx(-0.5));
  CHECK(features::sign_distance(0.0) == doctest::Approx(-1.0));
  CHECK(features::sign_distance(100.0) == doctest::Approx(1.0));
  CHECK(features::signed_log(0.0) == 0.0);
  CHECK(features::signed_log(-(std::exp(2.0) - 1.0)) == doctest::Approx(-2.0));
  CHECK(features::yaw_rate(3.0) == 1.0);
  CHECK(features::heading_error(-2.0) == doctest::Approx(-std::acos(-1.0) / 4));
  CHECK(features::road_bound(7.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("sign distance ahead") {
  const std::vector<NoOvertakingZone> zones = {{300.0, 450.0}};
  CHECK(sign_distance_ahead(260.0, zones, 100.0) == doctest::Approx(40.0));
  CHECK(sign_distance_ahead(100.0, zones, 100.0) == 100.0);
  CHECK(sign_distance_ahead(320.0, zones, 100.0) == 0.0);
}

TEST_CASE("graph: isolated ego and neighbourhood structure") {
  Scenario sc = mini::empty_road(3, 3.5, 450.0, 5);
  mini::add_vehicle(sc, 4, 0, 5, 170.0, 3.5, 20.0);  // 70 m away, nobody closer
  const RoadState ego = mini::constant_ego(0, 1, 100.0, 0.0, 20.0).states[0];
  const TrafficGraph lonely = build_graph(sc, ego, 0);
  CHECK(lonely.nodes.size() == 1);
  CHECK(lonely.edges.empty());
  CHECK(lonely.ego[kEgoGoalDistLongitudinal] == doctest::Approx(features::signed_log(350.0)));
  CHECK(lonely.ego[kEgoLane] == 0.0);
  CHECK(lonely.ego[kEgoDistLeftBound] == doctest::Approx(1.75 / 2));

  // A chain: the far vehicle is reached through the middle one.
  mini::add_vehicle(sc, 2, 0, 5, 130.0, 3.5, 25.0);
  const TrafficGraph chain = build_graph(sc, ego, 0);
  CHECK(chain.nodes.size() == 3);
  CHECK(chain.vehicle_ids == std::vector<int>{kEgoId, 2, 4});
  CHECK(chain.edges.size() == 4);
  for (const GraphEdge& e : chain.edges) {
    const bool mirrored = std::any_of(chain.edges.begin(), chain.edges.end(), [&](const GraphEdge& f) {
      return f.src == e.dst && f.dst == e.src;
    });
    CHECK(mirrored);
  }
  CHECK(chain.nodes[1][0] == doctest::Approx(0.6));
  CHECK(chain.nodes[1][2] == doctest::Approx(0.5));
  CHECK(chain.nodes[1][3] == 1.0);
  CHECK_THROWS_AS(build_graph(sc, ego, 5), StateError);
}

TEST_CASE("graph: left-of and same-lane edge flags") {
  Scenario sc = mini::empty_road(3, 3.5, 450.0, 2);
  mini::add_vehicle(sc, 1, 0, 2, 101.0, 3.5, 20.0);
  mini::add_vehicle(sc, 2, 0, 2, 120.0, 0.0, 20.0);
  const RoadState ego = mini::constant_ego(0, 1, 100.0, 0.0, 20.0).states[0];
  const TrafficGraph g = build_graph(sc, ego, 0);
  for (const GraphEdge& e : g.edges) {
    const int src = g.vehicle_ids[static_cast<std::size_t>(e.src)];
    const int dst = g.vehicle_ids[static_cast<std::size_t>(e.dst)];
    if (src == 1 && dst == kEgoId) CHECK(e.features[4] == 1.0);
    if (src == kEgoId && dst == 1) CHECK(e.features[4] == 0.0);
    if (src == 2 && dst == kEgoId) {
      CHECK(e.features[5] == 1.0);
      CHECK(e.features[4] == 0.0);
    }
  }
}

TEST_CASE("value net: zero parameters give zero") {
  ValueNet net(small_shape());
  Rng rng = make_rng(1, "graphs");
  for (int k = 0; k < 5; ++k) CHECK(net.forward(random_graph(rng)) == 0.0);
}

TEST_CASE("value net: matches the plain re-statement") {
  Rng rng = make_rng(2, "graphs");
  for (const NetShape& shape : {small_shape(), NetShape{}}) {
    ValueNet net(shape);
    net.initialize(9);
    for (double& b : net.params()) b += 0.01;  // non-zero biases too
    net.set_output_affine(3.0, 2.5);
    for (int k = 0; k < 5; ++k) {
      const TrafficGraph g = random_graph(rng);
      CHECK(net.forward(g) == doctest::Approx(reference_forward(net, g)).epsilon(1e-12));
    }
  }
}

TEST_CASE("value net: hand computation on a two-node graph") {
  NetShape s;
  s.hidden = 1;
  s.layers = 1;
  s.embed = 1;
  s.head = {};
  ValueNet net(s);
  auto set = [&](const std::string& name, std::vector<double> v) {
    const ParamBlock& b = net.block(name);
    REQUIRE(v.size() == b.size());
    std::copy(v.begin(), v.end(), net.params().begin() + static_cast<long>(b.offset));
  };
  set("msg0.weight", {0.5, 0, 0, 0, 1.0, 0, 0, 0, 0, 0});
  set("msg0.bias", {0.1});
  set("upd0.weight", {0, 0, 0, 0, 2.0});
  set("upd0.bias", {0.0});
  set("embed.weight", {1.0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.5});
  set("embed.bias", {0.0});
  set("head0.weight", {3.0});
  set("head0.bias", {-1.0});
  TrafficGraph g;
  g.nodes = {{0.2, 0, 0, 0}, {0.4, 0, 0, 0}};
  g.vehicle_ids = {kEgoId, 1};
  g.edges = {{1, 0, {0.3, 0, 0, 0, 0, 0}}};
  g.ego[kEgoSignDistance] = 0.6;
  // message 1->0: 0.5*0.4 + 1.0*0.3 + 0.1 = 0.6; ego state tanh(2*0.6)
  const double h = std::tanh(1.2);
  const double z = std::tanh(h + 0.5 * 0.6);
  CHECK(net.forward(g) == doctest::Approx(3.0 * z - 1.0).epsilon(1e-14));
}

TEST_CASE("value net: in-edge order does not matter") {
  Rng rng = make_rng(3, "graphs");
  ValueNet net(small_shape());
  net.initialize(4);
  for (int k = 0; k < 10; ++k) {
    TrafficGraph g = random_graph(rng);
    const double v = net.forward(g);
    std::reverse(g.edges.begin(), g.edges.end());
    CHECK(net.forward(g) == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("value net: gradients against central differences") {
  Rng rng = make_rng(4, "graphs");
  ValueNet net(small_shape());
  net.initialize(5);
  net.set_output_affine(0.5, 1.7);
  for (double& p : net.params()) p += uniform(rng, -0.05, 0.05);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    const TrafficGraph g = random_graph(rng);
    std::vector<double> grad(net.size(), 0.0);
    net.backward(g, 1.0, grad);
    for (std::size_t i = 0; i < net.size(); ++i) {
      const double keep = net.params()[i];
      net.params()[i] = keep + 1e-5;
      const double up = net.forward(g);
      net.params()[i] = keep - 1e-5;
      const double down = net.forward(g);
      net.params()[i] = keep;
      const double fd = (up - down) / 2e-5;
      const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      worst = std::max(worst, std::abs(fd - grad[i]) / denom);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("value net: zero upstream and dead paths") {
  Rng rng = make_rng(6, "graphs");
  ValueNet net(small_shape());
  net.initialize(7);
  const TrafficGraph g = random_graph(rng);
  std::vector<double> grad(net.size(), 0.0);
  const double v = net.backward(g, 0.0, grad);
  CHECK(v == net.forward(g));
  CHECK(std::all_of(grad.begin(), grad.end(), [](double x) { return x == 0.0; }));

  TrafficGraph alone;
  alone.nodes = {{0.1, 0.2, 0.3, 1.0}};
  alone.vehicle_ids = {kEgoId};
  for (double& f : alone.ego) f = 0.3;
  net.backward(alone, 1.0, grad);
  for (const char* name : {"msg0.weight", "msg0.bias", "msg1.weight", "msg1.bias"}) {
    const ParamBlock& b = net.block(name);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(grad[b.offset + i] == 0.0);
  }
  CHECK_THROWS_AS(net.backward(alone, 1.0, std::span<double>(grad.data(), 3)), ParameterError);
}

TEST_CASE("value net: default parameter layout") {
  const ValueNet net;
  CHECK(net.block("head3.weight").rows == 1);
  CHECK(net.block("msg0.weight").cols == kNodeFeatures + kEdgeFeatures);
  CHECK(net.block("embed.weight").cols == 80 + kEgoFeatures);
  CHECK_THROWS_AS(net.block("nope"), LookupError);
  const ParamBlock& last = net.blocks().back();
  CHECK(last.offset + last.size() == net.size());
}

TEST_CASE("adam: fixed points and convergence") {
  AdamState st;
  std::vector<double> p = {1.0, -2.0};
  AdamParams no_decay;
  no_decay.weight_decay = 0.0;
  adam_step(p, std::vector<double>{0.0, 0.0}, st, no_decay);
  CHECK(p == std::vector<double>{1.0, -2.0});

  AdamState one;
  std::vector<double> q = {1.0};
  adam_step(q, std::vector<double>{1.0}, one);
  CHECK(q[0] < 1.0);

  AdamState quad;
  std::vector<double> x = {0.0};
  AdamParams fast;
  fast.lr = 0.05;
  fast.weight_decay = 0.0;
  for (int k = 0; k < 1000; ++k) adam_step(x, std::vector<double>{2.0 * (x[0] - 3.0)}, quad, fast);
  CHECK(std::abs(x[0] - 3.0) < 1e-3);

  std::vector<double> y = {1.0};
  AdamState bad;
  CHECK_THROWS_AS(adam_step(y, std::vector<double>{NAN}, bad), TrainingError);
  CHECK(y[0] == 1.0);
}

TEST_CASE("checkpoint round trip") {
  ValueNet net(small_shape());
  net.initialize(8);
  net.set_output_affine(-4.0, 12.5);
  const std::string bytes = encode_checkpoint(net);
  const ValueNet back = decode_checkpoint(bytes);
  CHECK(encode_checkpoint(back) == bytes);
  CHECK(back.output_scale() == 12.5);
  CHECK(back.shape().head == small_shape().head);
  CHECK(std::equal(back.params().begin(), back.params().end(), net.params().begin()));
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(decode_checkpoint("RHNET 2\n"), FormatError);
}
